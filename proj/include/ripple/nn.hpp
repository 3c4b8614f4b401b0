#pragma once

#include "ripple/random.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <vector>

// Minimal differentiable-layer kernel. Sequences are matrices with one
// column per position.
namespace ripple::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

using ParamList = std::vector<Param*>;

void init_uniform(Param& p, double scale, Rng& rng);
void zero_grads(std::span<Param* const> params);
double grad_norm(std::span<Param* const> params);

enum class Method { Momentum, Adam };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

// Momentum SGD or Adam, both with global gradient-norm clipping applied
// before the update.
class Optimizer {
 public:
  struct Options {
    Method method = Method::Adam;
    double learning_rate = 0.001;
    double momentum = 0.9;  // Adam: beta1
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 5.0;  // <= 0 disables clipping
  };

  explicit Optimizer(Options options) : options_(options) {}

  // Applies the accumulated gradients; the parameter list must be the same
  // (same order) on every call.
  void step(std::span<Param* const> params);

  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::uint64_t steps_ = 0;
};

// Inverted-dropout mask: 0 with probability `rate`, else 1 / (1 - rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

Matrix sigmoid(const Matrix& x);

// Standard LSTM cell; gate rows are ordered input, forget, output, candidate.
struct LstmCell {
  std::size_t input = 0;
  std::size_t hidden = 0;
  Param w;  // 4h x input
  Param u;  // 4h x h
  Param b;  // 4h x 1

  LstmCell() = default;
  LstmCell(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

  ParamList parameters() { return {&w, &u, &b}; }
};

struct LstmTape {
  bool reverse = false;
  Matrix input;   // input x n
  Matrix gates;   // 4h x n, post-activation
  Matrix cell;    // h x n
  Matrix hidden;  // h x n
};

// Runs the cell over the columns of `input`, right-to-left when `reverse`.
// Output column k is the hidden state after consuming position k.
Matrix lstm_forward(const LstmCell& cell, const Matrix& input, bool reverse,
                    LstmTape* tape = nullptr);

// Backpropagation through time. Accumulates parameter gradients and returns
// the gradient with respect to the input.
Matrix lstm_backward(LstmCell& cell, const LstmTape& tape, const Matrix& grad_hidden);

}  // namespace ripple::nn
