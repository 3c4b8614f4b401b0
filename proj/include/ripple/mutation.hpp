#pragma once

#include "ripple/dataset.hpp"
#include "ripple/graph.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

namespace ripple {

struct MutationSpec {
  double rate = 0.5;
  std::size_t top_n = 20;  // number of target characters
  std::array<bool, kEdgeTypeCount> allowed{true, true, true};
  std::uint64_t seed = 1;

  void validate() const;
};

// Characters ranked by spam document frequency minus normal document
// frequency; only positive scores qualify. Ties broken by code point.
std::vector<char32_t> select_targets(std::span<const LabeledText> data, std::size_t top_n);

struct MutationResult {
  std::vector<LabeledText> texts;
  std::vector<char32_t> targets;
  std::size_t eligible = 0;  // target occurrences with at least one candidate
  std::size_t replaced = 0;
};

// Replaces target characters in spam texts, each occurrence with
// probability `rate`, by a graph neighbor drawn in proportion to edge weight
// over the allowed types. Characters in `exclude` are never used as
// replacements. Normal texts and labels are never touched.
MutationResult mutate_corpus(std::span<const LabeledText> data, const VariationGraph& g,
                             const MutationSpec& spec,
                             const std::unordered_set<char32_t>& exclude = {});

// Same, with an explicit target list.
MutationResult mutate_corpus(std::span<const LabeledText> data, const VariationGraph& g,
                             const MutationSpec& spec, std::span<const char32_t> targets,
                             const std::unordered_set<char32_t>& exclude);

// Characters that appear in `mutated` at a position where `original`
// differs. Both corpora must be aligned.
std::unordered_set<char32_t> introduced_characters(std::span<const LabeledText> original,
                                                   std::span<const LabeledText> mutated);

}  // namespace ripple
