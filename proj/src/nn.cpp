#include "ripple/nn.hpp"

#include <cmath>

namespace ripple::nn {

void init_uniform(Param& p, double scale, Rng& rng) {
  for (Eigen::Index j = 0; j < p.value.cols(); ++j)
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) p.value(i, j) = rng.uniform(-scale, scale);
  p.zero_grad();
}

void zero_grads(std::span<Param* const> params) {
  for (Param* p : params) p->zero_grad();
}

double grad_norm(std::span<Param* const> params) {
  double sq = 0.0;
  for (const Param* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

std::string_view to_string(Method m) { return m == Method::Adam ? "adam" : "momentum"; }

std::optional<Method> parse_method(std::string_view name) {
  if (name == "adam") return Method::Adam;
  if (name == "momentum" || name == "sgd") return Method::Momentum;
  return std::nullopt;
}

void Optimizer::step(std::span<Param* const> params) {
  if (first_.size() != params.size()) {
    first_.clear();
    second_.clear();
    for (const Param* p : params) {
      first_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      if (options_.method == Method::Adam) second_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  double factor = 1.0;
  if (options_.clip_norm > 0.0) {
    const double norm = grad_norm(params);
    if (norm > options_.clip_norm) factor = options_.clip_norm / norm;
  }
  ++steps_;
  const double b1 = options_.momentum, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    if (options_.method == Method::Momentum) {
      first_[i] = b1 * first_[i] + factor * p.grad;
      p.value -= options_.learning_rate * first_[i];
      continue;
    }
    first_[i] = b1 * first_[i] + (1.0 - b1) * factor * p.grad;
    second_[i] = b2 * second_[i] + (1.0 - b2) * (factor * p.grad).cwiseAbs2();
    const double lr = options_.learning_rate * std::sqrt(c2) / c1;
    p.value.array() -= lr * first_[i].array() / (second_[i].array().sqrt() + options_.epsilon);
  }
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform() < rate ? 0.0 : keep;
  return m;
}

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

LstmCell::LstmCell(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim)
    : input(input_dim),
      hidden(hidden_dim),
      w(prefix + ".w", static_cast<Eigen::Index>(4 * hidden_dim), static_cast<Eigen::Index>(input_dim)),
      u(prefix + ".u", static_cast<Eigen::Index>(4 * hidden_dim), static_cast<Eigen::Index>(hidden_dim)),
      b(prefix + ".b", static_cast<Eigen::Index>(4 * hidden_dim), 1) {}

Matrix lstm_forward(const LstmCell& cell, const Matrix& input, bool reverse, LstmTape* tape) {
  const auto h = static_cast<Eigen::Index>(cell.hidden);
  const Eigen::Index n = input.cols();
  Matrix pre = cell.w.value * input;  // input projections for every step at once
  pre.colwise() += cell.b.value.col(0);

  Matrix gates(4 * h, n), cells(h, n), hidden(h, n);
  Vector h_prev = Vector::Zero(h), c_prev = Vector::Zero(h);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    Vector a = pre.col(t);
    a.noalias() += cell.u.value * h_prev;
    auto g = gates.col(t);
    for (Eigen::Index k = 0; k < 3 * h; ++k) g(k) = 1.0 / (1.0 + std::exp(-a(k)));
    for (Eigen::Index k = 3 * h; k < 4 * h; ++k) g(k) = std::tanh(a(k));
    c_prev = g.segment(h, h).cwiseProduct(c_prev) + g.head(h).cwiseProduct(g.segment(3 * h, h));
    h_prev = g.segment(2 * h, h).cwiseProduct(c_prev.array().tanh().matrix());
    cells.col(t) = c_prev;
    hidden.col(t) = h_prev;
  }
  if (tape) {
    tape->reverse = reverse;
    tape->input = input;
    tape->gates = std::move(gates);
    tape->cell = std::move(cells);
    tape->hidden = hidden;
  }
  return hidden;
}

Matrix lstm_backward(LstmCell& cell, const LstmTape& tape, const Matrix& grad_hidden) {
  const auto h = static_cast<Eigen::Index>(cell.hidden);
  const Eigen::Index n = tape.input.cols();
  Matrix grad_pre(4 * h, n);  // d/d pre-activation, per step
  Vector dh_next = Vector::Zero(h), dc_next = Vector::Zero(h);
  for (Eigen::Index s = n - 1; s >= 0; --s) {
    const Eigen::Index t = tape.reverse ? n - 1 - s : s;
    const bool has_prev = s > 0;
    const Eigen::Index tp = tape.reverse ? t + 1 : t - 1;

    const auto g = tape.gates.col(t);
    const auto i_g = g.head(h);
    const auto f_g = g.segment(h, h);
    const auto o_g = g.segment(2 * h, h);
    const auto c_g = g.segment(3 * h, h);
    const Vector tanh_c = tape.cell.col(t).array().tanh().matrix();
    const Vector c_prev = has_prev ? Vector(tape.cell.col(tp)) : Vector::Zero(h);

    const Vector dh = grad_hidden.col(t) + dh_next;
    const Vector dc = dh.cwiseProduct(o_g).cwiseProduct((1.0 - tanh_c.array().square()).matrix()) + dc_next;

    auto da = grad_pre.col(t);
    da.head(h) = dc.cwiseProduct(c_g).cwiseProduct(i_g.cwiseProduct((1.0 - i_g.array()).matrix()));
    da.segment(h, h) = dc.cwiseProduct(c_prev).cwiseProduct(f_g.cwiseProduct((1.0 - f_g.array()).matrix()));
    da.segment(2 * h, h) = dh.cwiseProduct(tanh_c).cwiseProduct(o_g.cwiseProduct((1.0 - o_g.array()).matrix()));
    da.segment(3 * h, h) = dc.cwiseProduct(i_g).cwiseProduct((1.0 - c_g.array().square()).matrix());

    if (has_prev) cell.u.grad.noalias() += da * tape.hidden.col(tp).transpose();
    dh_next.noalias() = cell.u.value.transpose() * da;
    dc_next = dc.cwiseProduct(f_g);
  }
  cell.w.grad.noalias() += grad_pre * tape.input.transpose();
  cell.b.grad.col(0) += grad_pre.rowwise().sum();
  return cell.w.value.transpose() * grad_pre;
}

}  // namespace ripple::nn
