#pragma once

#include "ripple/binary_io.hpp"
#include "ripple/nn.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

// Enhanced bidirectional language model: graph/text combination gate,
// stacked forward and backward LSTMs, and the learned layer aggregation that
// produces the SS embedding.
namespace ripple::sslm {

using nn::Matrix;
using nn::Param;
using nn::ParamList;
using nn::Vector;

// Fully connected 2d -> d reduction applied to the graph embedding before
// the gate.
struct Projection {
  Param weight;  // d x 2d
  Param bias;    // d x 1

  Projection() = default;
  Projection(std::size_t in_dim, std::size_t out_dim);

  Matrix forward(const Matrix& input) const;
  // Accumulates gradients; returns d/d input.
  Matrix backward(const Matrix& input, const Matrix& grad_out);
  ParamList parameters() { return {&weight, &bias}; }
};

struct GateParams {
  Param weight;  // d x 2d, applied to [G ; T]
  Param bias;    // d x 1

  GateParams() = default;
  explicit GateParams(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(bias.value.rows()); }
  ParamList parameters() { return {&weight, &bias}; }
};

struct GateTape {
  Matrix graph;
  Matrix text;
  Matrix preference;  // P
};

// P = sigmoid(W [G ; T] + b),  N = P * T + (1 - P) * G  (column-wise).
Matrix gate_forward(const Matrix& graph, const Matrix& text, const GateParams& params,
                    GateTape* tape = nullptr);
Vector gate_forward(const Vector& graph, const Vector& text, const GateParams& params);

struct GateInputGrad {
  Matrix graph;
  Matrix text;
};

GateInputGrad gate_backward(GateParams& params, const GateTape& tape, const Matrix& grad_out);

struct BiLM {
  std::size_t layers = 0;
  std::size_t hidden = 0;
  std::vector<nn::LstmCell> forward;
  std::vector<nn::LstmCell> backward;

  BiLM() = default;
  BiLM(std::size_t dim, std::size_t layer_count);

  ParamList parameters();
};

struct BiLMTape {
  std::vector<nn::LstmTape> forward;
  std::vector<nn::LstmTape> backward;
  std::vector<Matrix> forward_mask;  // empty when dropout is off
  std::vector<Matrix> backward_mask;
};

// Returns H_0..H_L, each 2d x n. H_0 = [N ; N] and H_l = [backward ; forward]
// for layer l. Each direction's layer l reads the same direction's layer
// l-1 output, so the forward stack never sees later positions. Dropout, when
// rate > 0, is applied to every LSTM layer output.
std::vector<Matrix> bilm_forward(const BiLM& model, const Matrix& input, BiLMTape* tape = nullptr,
                                 double dropout = 0.0, Rng* rng = nullptr);

// `grad_layers` holds d/dH_l for l = 0..L. Returns d/d input.
Matrix bilm_backward(BiLM& model, const BiLMTape& tape, std::span<const Matrix> grad_layers);

struct AggParams {
  Param weights;  // raw s_l, (L+1) x 1
  Param scale;    // omega, 1 x 1

  AggParams() = default;
  explicit AggParams(std::size_t layers);

  ParamList parameters() { return {&weights, &scale}; }
};

std::vector<double> layer_weights(const AggParams& params);  // softmax(s)

// SS = omega * sum_l softmax(s)_l H_l
Matrix aggregate(std::span<const Matrix> layers, const AggParams& params);
std::vector<Matrix> aggregate_backward(AggParams& params, std::span<const Matrix> layers,
                                       const Matrix& grad_out);

struct SSConfig {
  std::size_t dim = 128;
  std::size_t layers = 2;
  double dropout = 0.1;
  double init_scale = 0.08;
  std::uint64_t seed = 1;

  void validate() const;
};

// Output layer for language-model pretraining.
struct LmHead {
  Param weight;  // V x d
  Param bias;    // V x 1

  ParamList parameters() { return {&weight, &bias}; }
};

// Full SS encoder over fixed per-character tables:
//   graph table (2d x V, integrated graph embeddings) and
//   text table  (d x V, skip-gram textual embeddings).
class SSModel {
 public:
  struct Tape {
    std::vector<std::uint32_t> tokens;
    Matrix graph_in;
    Matrix projected;
    GateTape gate;
    BiLMTape bilm;
    std::vector<Matrix> layers;
  };

  SSModel() = default;
  SSModel(Matrix graph_table, Matrix text_table, const SSConfig& config);

  std::size_t dim() const { return config_.dim; }
  std::size_t output_dim() const { return 2 * config_.dim; }
  std::size_t vocabulary() const { return static_cast<std::size_t>(graph_table_.cols()); }
  const SSConfig& config() const { return config_; }

  // Combination representation N (d x n).
  Matrix combine(std::span<const std::uint32_t> tokens, Tape* tape = nullptr) const;
  // BiLM layer outputs H_0..H_L.
  std::vector<Matrix> layers(std::span<const std::uint32_t> tokens, bool training, Rng* rng,
                             Tape* tape = nullptr) const;
  // SS embeddings (2d x n).
  Matrix forward(std::span<const std::uint32_t> tokens, bool training = false, Rng* rng = nullptr,
                 Tape* tape = nullptr) const;

  // Accumulates gradients of every trainable from d/dSS.
  void backward(const Tape& tape, const Matrix& grad_ss);
  // Same, starting from d/dH_l (used by pretraining, which bypasses
  // aggregation).
  void backward_layers(const Tape& tape, std::span<const Matrix> grad_layers);

  // Projection, gate, BiLM and aggregation. The LM head is separate.
  ParamList parameters();
  ParamList encoder_parameters();  // everything except aggregation

  Projection projection;
  GateParams gate;
  BiLM bilm;
  AggParams aggregation;
  LmHead head;

  const Matrix& graph_table() const { return graph_table_; }
  const Matrix& text_table() const { return text_table_; }

 private:
  SSConfig config_;
  Matrix graph_table_;
  Matrix text_table_;
};

struct PretrainConfig {
  std::size_t epochs = 1;
  nn::Method method = nn::Method::Adam;
  double learning_rate = 0.001;
  double momentum = 0.9;
  double clip_norm = 5.0;
  std::size_t batch = 16;
  std::size_t samples = 32;  // sampled-softmax negatives per prediction
  double holdout = 0.1;      // trailing fraction of the corpus held out
  std::uint64_t seed = 1;

  void validate() const;
};

struct PretrainReport {
  double initial_holdout_loss = 0.0;
  double final_holdout_loss = 0.0;
  double holdout_accuracy = 0.0;
  std::vector<double> epoch_loss;
};

using Corpus = std::vector<std::vector<std::uint32_t>>;

// Forward stack predicts the next character, backward stack the previous
// one; trained with sampled softmax over the vocabulary.
PretrainReport pretrain_bilm(SSModel& model, const Corpus& corpus, const PretrainConfig& config);

// Mean full-softmax cross-entropy per prediction over both directions.
double lm_loss(const SSModel& model, std::span<const std::vector<std::uint32_t>> corpus);
// Forward next-character accuracy.
double lm_accuracy(const SSModel& model, std::span<const std::vector<std::uint32_t>> corpus);

void save_model(const SSModel& model, const std::filesystem::path& path);
SSModel load_model(const std::filesystem::path& path);

void write_model(const SSModel& model, BinaryWriter& out);
SSModel read_model(BinaryReader& in);

}  // namespace ripple::sslm
