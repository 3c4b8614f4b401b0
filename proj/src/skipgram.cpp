#include "ripple/skipgram.hpp"

#include "ripple/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ripple {

NegativeSampler::NegativeSampler(std::span<const std::uint64_t> counts, double power) {
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    acc += std::pow(static_cast<double>(counts[i]), power);
    cumulative_.push_back(acc);
    ids_.push_back(static_cast<std::uint32_t>(i));
  }
}

std::uint32_t NegativeSampler::operator()(Rng& rng) const {
  const double target = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  return ids_[static_cast<std::size_t>(it - cumulative_.begin())];
}

void TextSkipGramConfig::validate() const {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
  if (window < 1) throw ValidationError("window must be at least 1");
  if (negatives < 1) throw ValidationError("negatives must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
}

TextEmbeddings train_text_skipgram(const std::vector<std::vector<std::uint32_t>>& sequences,
                                   std::size_t vocabulary, const TextSkipGramConfig& config) {
  config.validate();
  const auto d = static_cast<Eigen::Index>(config.dim);
  const auto V = static_cast<Eigen::Index>(vocabulary);
  Rng rng(config.seed);

  std::vector<std::uint64_t> counts(vocabulary, 0);
  std::size_t tokens = 0;
  for (const auto& s : sequences) {
    for (std::uint32_t t : s) {
      if (t >= vocabulary) throw ValidationError("token id outside the vocabulary");
      ++counts[t];
    }
    tokens += s.size();
  }

  TextEmbeddings out;
  out.vectors.resize(d, V);
  const double scale = 0.5 / static_cast<double>(config.dim);
  for (Eigen::Index j = 0; j < V; ++j)
    for (Eigen::Index i = 0; i < d; ++i) out.vectors(i, j) = rng.uniform(-scale, scale);
  Eigen::MatrixXd context = Eigen::MatrixXd::Zero(d, V);
  out.seen.assign(vocabulary, false);
  for (std::size_t v = 0; v < vocabulary; ++v) out.seen[v] = counts[v] > 0;

  const NegativeSampler sampler(counts);
  std::size_t distinct = 0;
  for (auto c : counts) distinct += c > 0;

  if (!sampler.empty() && distinct > 1) {
    const double total = static_cast<double>(tokens * config.epochs);
    double processed = 0.0;
    Eigen::VectorXd grad(d);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      for (const auto& seq : sequences) {
        const double lr = config.learning_rate * std::max(1e-4, 1.0 - processed / total);
        for (std::size_t i = 0; i < seq.size(); ++i) {
          const std::size_t reach = 1 + rng.below(config.window);
          const std::size_t lo = i >= reach ? i - reach : 0;
          const std::size_t hi = std::min(seq.size() - 1, i + reach);
          for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            auto h = out.vectors.col(seq[i]);
            grad.setZero();
            for (std::size_t n = 0; n <= config.negatives; ++n) {
              std::uint32_t target = seq[j];
              double label = 1.0;
              if (n > 0) {
                target = sampler(rng);
                if (target == seq[j]) continue;
                label = 0.0;
              }
              const double g = sigmoid(context.col(target).dot(h)) - label;
              grad.noalias() += g * context.col(target);
              context.col(target).noalias() -= lr * g * h;
            }
            h.noalias() -= lr * grad;
          }
        }
        processed += static_cast<double>(seq.size());
      }
    }
  }
  for (std::size_t v = 0; v < vocabulary; ++v) {
    if (!out.seen[v]) out.vectors.col(static_cast<Eigen::Index>(v)).setZero();
  }
  return out;
}

}  // namespace ripple
