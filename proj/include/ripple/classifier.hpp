#pragma once

#include "ripple/binary_io.hpp"
#include "ripple/nn.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ripple::classifier {

using nn::Matrix;
using nn::Param;
using nn::ParamList;
using nn::Vector;

enum Label : int { kNormal = 0, kSpam = 1 };

struct ConvConfig {
  std::vector<std::size_t> widths{3, 4, 5};
  std::size_t filters = 128;
  double dropout = 0.1;
  double init_scale = 0.08;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ConvTape {
  Matrix input;                         // padded, D x n
  std::vector<std::vector<int>> argmax;  // per width, per filter
  Vector pooled;                        // after ReLU
  Vector dropped;                       // after dropout
  Vector mask;                          // empty when not training
  Vector probabilities;
};

// Single convolution layer with several filter widths, max-over-time
// pooling over valid positions, ReLU, dropout and a dense 2-way output.
class ConvClassifier {
 public:
  ConvClassifier() = default;
  ConvClassifier(std::size_t input_dim, const ConvConfig& config);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t max_width() const;
  std::size_t feature_dim() const { return widths_.size() * filters_; }
  const std::vector<std::size_t>& widths() const { return widths_; }

  // Logits (2). Sequences shorter than the widest filter are right-padded
  // with zero columns.
  Vector logits(const Matrix& sequence, bool training = false, Rng* rng = nullptr,
                ConvTape* tape = nullptr) const;

  // Accumulates gradients from d/dlogits; returns d/d input (unpadded).
  Matrix backward(const ConvTape& tape, const Vector& grad_logits, std::size_t length);

  ParamList parameters();

  std::vector<Param> conv_weight;  // per width: filters x (width * D)
  std::vector<Param> conv_bias;    // per width: filters x 1
  Param dense_weight;              // 2 x features
  Param dense_bias;                // 2 x 1

  void write(BinaryWriter& out) const;
  static ConvClassifier read(BinaryReader& in);

 private:
  std::size_t input_dim_ = 0;
  std::size_t filters_ = 0;
  double dropout_ = 0.0;
  std::vector<std::size_t> widths_;
};

Vector softmax(const Vector& logits);

struct Prediction {
  Label label;
  double spam_probability;
};

// Ties go to the normal class.
Prediction classify(const ConvClassifier& model, const Matrix& sequence);

struct Example {
  std::vector<std::uint32_t> tokens;
  Label label;
};

// Maps token ids to a feature sequence; optionally trainable.
class FeatureEncoder {
 public:
  virtual ~FeatureEncoder() = default;

  virtual std::size_t dim() const = 0;
  // The most recent training-mode encode() is the one backward() refers to.
  virtual Matrix encode(std::span<const std::uint32_t> tokens, bool training, Rng& rng) = 0;
  virtual void backward(const Matrix& /*grad*/) {}
  virtual ParamList parameters() { return {}; }
};

// Fixed lookup table, one column per token id.
class TableEncoder final : public FeatureEncoder {
 public:
  explicit TableEncoder(Matrix table) : table_(std::move(table)) {}

  std::size_t dim() const override { return static_cast<std::size_t>(table_.rows()); }
  Matrix encode(std::span<const std::uint32_t> tokens, bool training, Rng& rng) override;

 private:
  Matrix table_;
};

struct TrainConfig {
  std::size_t batch = 64;
  std::size_t epochs = 5;
  nn::Method method = nn::Method::Adam;
  double learning_rate = 0.001;
  double momentum = 0.9;
  double clip_norm = 5.0;
  bool freeze_encoder = false;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// Mini-batch momentum SGD on cross-entropy. Gradients flow into the
// encoder's parameters unless `freeze_encoder` is set.
TrainResult train_classifier(ConvClassifier& model, FeatureEncoder& encoder,
                             std::span<const Example> data, const TrainConfig& config);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

// Spam is the positive class.
struct EvalReport {
  Confusion confusion;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

EvalReport report_from_confusion(const Confusion& c);
EvalReport evaluate(const ConvClassifier& model, FeatureEncoder& encoder,
                    std::span<const Example> data);

std::string format_report(const EvalReport& r);
std::string format_report_kv(const EvalReport& r, const std::string& prefix = "");

}  // namespace ripple::classifier
