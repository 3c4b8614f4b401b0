#pragma once

#include "ripple/random.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace ripple {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Draws ids from the unigram distribution raised to 0.75.
class NegativeSampler {
 public:
  explicit NegativeSampler(std::span<const std::uint64_t> counts, double power = 0.75);

  std::uint32_t operator()(Rng& rng) const;
  bool empty() const noexcept { return cumulative_.empty(); }

 private:
  std::vector<double> cumulative_;
  std::vector<std::uint32_t> ids_;
};

struct TextSkipGramConfig {
  std::size_t dim = 128;
  std::size_t window = 5;
  std::size_t negatives = 5;
  double learning_rate = 0.025;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

// Plain skip-gram with negative sampling over token-id sequences.
struct TextEmbeddings {
  Eigen::MatrixXd vectors;  // d x vocabulary; zero for ids never seen
  std::vector<bool> seen;
};

TextEmbeddings train_text_skipgram(const std::vector<std::vector<std::uint32_t>>& sequences,
                                   std::size_t vocabulary, const TextSkipGramConfig& config);

}  // namespace ripple
