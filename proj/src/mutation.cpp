#include "ripple/mutation.hpp"

#include "ripple/errors.hpp"
#include "ripple/random.hpp"

#include <algorithm>
#include <unordered_map>

namespace ripple {

void MutationSpec::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ValidationError("mutation rate must be in [0, 1]");
  if (std::none_of(allowed.begin(), allowed.end(), [](bool b) { return b; })) {
    throw ValidationError("at least one edge type must be enabled for mutation");
  }
}

std::vector<char32_t> select_targets(std::span<const LabeledText> data, std::size_t top_n) {
  std::unordered_map<char32_t, long> score;
  for (const auto& t : data) {
    std::u32string distinct = t.text;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (char32_t c : distinct) score[c] += t.label == classifier::kSpam ? 1 : -1;
  }
  std::vector<std::pair<char32_t, long>> ranked;
  for (const auto& [c, s] : score)
    if (s > 0) ranked.emplace_back(c, s);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < ranked.size() && i < top_n; ++i) out.push_back(ranked[i].first);
  return out;
}

MutationResult mutate_corpus(std::span<const LabeledText> data, const VariationGraph& g,
                             const MutationSpec& spec, const std::unordered_set<char32_t>& exclude) {
  spec.validate();
  if (data.empty()) throw ValidationError("cannot mutate an empty dataset");
  const auto targets = select_targets(data, spec.top_n);
  return mutate_corpus(data, g, spec, targets, exclude);
}

MutationResult mutate_corpus(std::span<const LabeledText> data, const VariationGraph& g,
                             const MutationSpec& spec, std::span<const char32_t> targets,
                             const std::unordered_set<char32_t>& exclude) {
  spec.validate();
  if (data.empty()) throw ValidationError("cannot mutate an empty dataset");

  struct Candidates {
    std::vector<char32_t> chars;
    std::vector<double> weights;
    double total = 0.0;
  };
  std::unordered_map<char32_t, Candidates> pool;
  for (char32_t c : targets) {
    Candidates cand;
    if (auto v = g.find(c)) {
      for (EdgeType t : kEdgeTypes) {
        if (!spec.allowed[index(t)]) continue;
        for (const Adjacent& a : g.adjacency(*v, t)) {
          const char32_t r = g.character(a.vertex);
          if (exclude.contains(r)) continue;
          cand.chars.push_back(r);
          cand.weights.push_back(a.weight);
          cand.total += a.weight;
        }
      }
    }
    pool.emplace(c, std::move(cand));
  }

  MutationResult result;
  result.targets.assign(targets.begin(), targets.end());
  result.texts.assign(data.begin(), data.end());
  Rng rng(spec.seed);
  for (auto& t : result.texts) {
    if (t.label != classifier::kSpam) continue;
    for (char32_t& c : t.text) {
      auto it = pool.find(c);
      if (it == pool.end() || it->second.chars.empty()) continue;
      ++result.eligible;
      if (rng.uniform() < spec.rate) {
        const Candidates& cand = it->second;
        c = cand.chars[sample_weighted(cand.weights, cand.total, rng)];
        ++result.replaced;
      }
    }
  }
  return result;
}

std::unordered_set<char32_t> introduced_characters(std::span<const LabeledText> original,
                                                   std::span<const LabeledText> mutated) {
  if (original.size() != mutated.size()) throw ValidationError("corpora are not aligned");
  std::unordered_set<char32_t> out;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const auto& a = original[i].text;
    const auto& b = mutated[i].text;
    if (a.size() != b.size()) throw ValidationError("corpora are not aligned");
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a[k] != b[k]) out.insert(b[k]);
  }
  return out;
}

}  // namespace ripple
