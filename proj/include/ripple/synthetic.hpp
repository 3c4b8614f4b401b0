#pragma once

#include "ripple/dataset.hpp"
#include "ripple/encoding.hpp"

#include <cstdint>
#include <vector>

namespace ripple {

// Self-contained stand-in for a real corpus: characters come in clusters of
// one base character plus glyph/phonetic variants that share most of its
// codes. Texts are random filler around short keyword phrases of their class. Only base characters occur in generated texts; variants exist only
// in the encoding table, i.e. in the graph.
struct SyntheticConfig {
  std::size_t clusters = 80;
  std::size_t variants_per_cluster = 2;
  std::size_t spam_keywords = 12;
  std::size_t normal_keywords = 0;  // 0 = normal texts are plain filler
  std::size_t train_size = 2000;
  std::size_t test_size = 2000;
  double spam_fraction = 0.5;
  std::size_t min_length = 12;
  std::size_t max_length = 24;
  std::size_t phrases = 1;        // keyword phrases per text
  std::size_t phrase_length = 2;  // keywords per phrase
  double keyword_noise = 0.05;  // chance a text also carries a keyword of the other class
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticCorpus {
  std::vector<CharacterRecord> table;
  std::vector<char32_t> base;             // characters used in texts
  std::vector<char32_t> spam_keywords;
  std::vector<char32_t> normal_keywords;
  std::vector<LabeledText> train;
  std::vector<LabeledText> test;
};

SyntheticCorpus generate_synthetic(const SyntheticConfig& config);

}  // namespace ripple
