#include "ripple/classifier.hpp"

#include "ripple/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

namespace ripple::classifier {

void ConvConfig::validate() const {
  if (widths.empty()) throw ValidationError("at least one filter width is required");
  for (std::size_t w : widths)
    if (w < 1) throw ValidationError("filter widths must be positive");
  if (filters < 1) throw ValidationError("filter count must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("dropout must be in [0, 1)");
}

ConvClassifier::ConvClassifier(std::size_t input_dim, const ConvConfig& config)
    : input_dim_(input_dim), filters_(config.filters), dropout_(config.dropout), widths_(config.widths) {
  config.validate();
  if (input_dim == 0) throw ValidationError("classifier input dimension must be positive");
  Rng rng(config.seed);
  const auto nf = static_cast<Eigen::Index>(filters_);
  for (std::size_t w : widths_) {
    conv_weight.emplace_back("conv" + std::to_string(w) + ".weight", nf, static_cast<Eigen::Index>(w * input_dim));
    conv_bias.emplace_back("conv" + std::to_string(w) + ".bias", nf, 1);
    nn::init_uniform(conv_weight.back(), config.init_scale, rng);
  }
  dense_weight = Param("dense.weight", 2, static_cast<Eigen::Index>(feature_dim()));
  dense_bias = Param("dense.bias", 2, 1);
  nn::init_uniform(dense_weight, config.init_scale, rng);
}

std::size_t ConvClassifier::max_width() const {
  return widths_.empty() ? 0 : *std::max_element(widths_.begin(), widths_.end());
}

ParamList ConvClassifier::parameters() {
  ParamList out;
  for (auto& p : conv_weight) out.push_back(&p);
  for (auto& p : conv_bias) out.push_back(&p);
  out.push_back(&dense_weight);
  out.push_back(&dense_bias);
  return out;
}

Vector ConvClassifier::logits(const Matrix& sequence, bool training, Rng* rng, ConvTape* tape) const {
  const auto D = static_cast<Eigen::Index>(input_dim_);
  if (sequence.rows() != D) throw ValidationError("sequence dimension does not match the classifier");
  if (sequence.cols() < 1) throw ValidationError("cannot classify an empty sequence");
  const Eigen::Index length = std::max<Eigen::Index>(sequence.cols(), static_cast<Eigen::Index>(max_width()));
  Matrix input = Matrix::Zero(D, length);
  input.leftCols(sequence.cols()) = sequence;

  const auto nf = static_cast<Eigen::Index>(filters_);
  Vector pooled(static_cast<Eigen::Index>(feature_dim()));
  std::vector<std::vector<int>> argmax(widths_.size());
  for (std::size_t wi = 0; wi < widths_.size(); ++wi) {
    const auto w = static_cast<Eigen::Index>(widths_[wi]);
    const Eigen::Index positions = length - w + 1;
    // Column-major storage makes each window a contiguous w*D slice.
    Matrix windows(w * D, positions);
    for (Eigen::Index p = 0; p < positions; ++p) {
      windows.col(p) = Eigen::Map<const Vector>(input.data() + p * D, w * D);
    }
    Matrix z = conv_weight[wi].value * windows;
    z.colwise() += conv_bias[wi].value.col(0);
    argmax[wi].resize(static_cast<std::size_t>(nf));
    for (Eigen::Index j = 0; j < nf; ++j) {
      Eigen::Index best;
      const double m = z.row(j).maxCoeff(&best);
      pooled(static_cast<Eigen::Index>(wi) * nf + j) = std::max(m, 0.0);
      argmax[wi][static_cast<std::size_t>(j)] = static_cast<int>(best);
    }
  }

  Vector features = pooled;
  Vector mask;
  if (training && rng && dropout_ > 0.0) {
    mask = nn::dropout_mask(features.size(), 1, dropout_, *rng).col(0);
    features = features.cwiseProduct(mask);
  }
  Vector out = dense_weight.value * features + dense_bias.value.col(0);
  if (tape) {
    tape->input = std::move(input);
    tape->argmax = std::move(argmax);
    tape->pooled = std::move(pooled);
    tape->dropped = std::move(features);
    tape->mask = std::move(mask);
  }
  return out;
}

Matrix ConvClassifier::backward(const ConvTape& tape, const Vector& grad_logits, std::size_t length) {
  const auto D = static_cast<Eigen::Index>(input_dim_);
  const auto nf = static_cast<Eigen::Index>(filters_);
  dense_weight.grad.noalias() += grad_logits * tape.dropped.transpose();
  dense_bias.grad.col(0) += grad_logits;
  Vector grad_features = dense_weight.value.transpose() * grad_logits;
  if (tape.mask.size()) grad_features = grad_features.cwiseProduct(tape.mask);

  Matrix grad_input = Matrix::Zero(D, tape.input.cols());
  for (std::size_t wi = 0; wi < widths_.size(); ++wi) {
    const auto w = static_cast<Eigen::Index>(widths_[wi]);
    for (Eigen::Index j = 0; j < nf; ++j) {
      const Eigen::Index f = static_cast<Eigen::Index>(wi) * nf + j;
      if (tape.pooled(f) <= 0.0) continue;  // ReLU is flat here
      const double g = grad_features(f);
      if (g == 0.0) continue;
      const Eigen::Index p = tape.argmax[wi][static_cast<std::size_t>(j)];
      const Eigen::Map<const Vector> window(tape.input.data() + p * D, w * D);
      conv_weight[wi].grad.row(j).noalias() += g * window.transpose();
      conv_bias[wi].grad(j, 0) += g;
      Eigen::Map<Vector>(grad_input.data() + p * D, w * D).noalias() +=
          g * conv_weight[wi].value.row(j).transpose();
    }
  }
  return grad_input.leftCols(static_cast<Eigen::Index>(length));
}

void ConvClassifier::write(BinaryWriter& out) const {
  out.u64(input_dim_);
  out.u64(filters_);
  out.f64(dropout_);
  out.u64(widths_.size());
  for (std::size_t w : widths_) out.u64(w);
  for (const auto& p : conv_weight) out.matrix(p.value);
  for (const auto& p : conv_bias) out.matrix(p.value);
  out.matrix(dense_weight.value);
  out.matrix(dense_bias.value);
}

ConvClassifier ConvClassifier::read(BinaryReader& in) {
  ConvConfig config;
  const std::size_t input_dim = in.u64();
  config.filters = in.u64();
  config.dropout = in.f64();
  const std::uint64_t count = in.u64();
  if (count > 64) throw FormatError("corrupted classifier: implausible width count");
  config.widths.clear();
  for (std::uint64_t i = 0; i < count; ++i) config.widths.push_back(in.u64());
  ConvClassifier m;
  try {
    m = ConvClassifier(input_dim, config);
  } catch (const ValidationError& e) {
    throw FormatError(std::string("corrupted classifier: ") + e.what());
  }
  auto load = [&](Param& p) {
    Matrix v = in.matrix();
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw FormatError("corrupted classifier: tensor shape mismatch");
    }
    p.value = std::move(v);
    p.zero_grad();
  };
  for (auto& p : m.conv_weight) load(p);
  for (auto& p : m.conv_bias) load(p);
  load(m.dense_weight);
  load(m.dense_bias);
  return m;
}

Vector softmax(const Vector& logits) {
  const double peak = logits.maxCoeff();
  Vector p = (logits.array() - peak).exp().matrix();
  return p / p.sum();
}

Prediction classify(const ConvClassifier& model, const Matrix& sequence) {
  const Vector p = softmax(model.logits(sequence));
  const double spam = p(kSpam);
  return {spam > p(kNormal) ? kSpam : kNormal, spam};
}

Matrix TableEncoder::encode(std::span<const std::uint32_t> tokens, bool, Rng&) {
  Matrix out(table_.rows(), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k] >= table_.cols()) throw ValidationError("token id outside the embedding table");
    out.col(static_cast<Eigen::Index>(k)) = table_.col(tokens[k]);
  }
  return out;
}

void TrainConfig::validate() const {
  if (batch < 1) throw ValidationError("batch must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("momentum must be in [0, 1)");
}

TrainResult train_classifier(ConvClassifier& model, FeatureEncoder& encoder,
                             std::span<const Example> data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw ValidationError("training dataset is empty");
  if (encoder.dim() != model.input_dim()) throw ValidationError("encoder and classifier dimensions differ");
  const bool has_spam = std::any_of(data.begin(), data.end(), [](const Example& e) { return e.label == kSpam; });
  const bool has_normal = std::any_of(data.begin(), data.end(), [](const Example& e) { return e.label == kNormal; });
  if (!has_spam || !has_normal) std::cerr << "warning: training data contains a single class\n";

  ParamList params = model.parameters();
  ParamList encoder_params = config.freeze_encoder ? ParamList{} : encoder.parameters();
  params.insert(params.end(), encoder_params.begin(), encoder_params.end());
  const bool backprop_encoder = !encoder_params.empty();

  nn::Optimizer opt({config.method, config.learning_rate, config.momentum, 0.999, 1e-8, config.clip_norm});
  Rng rng(config.seed);
  std::vector<std::size_t> order(data.size());
  ConvTape tape;
  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span(order), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t stop = std::min(order.size(), start + config.batch);
      const double scale = 1.0 / static_cast<double>(stop - start);
      nn::zero_grads(params);
      for (std::size_t b = start; b < stop; ++b) {
        const Example& ex = data[order[b]];
        const Matrix seq = encoder.encode(ex.tokens, true, rng);
        const Vector p = softmax(model.logits(seq, true, &rng, &tape));
        total += -std::log(std::max(p(ex.label), 1e-300));
        Vector g = p;
        g(ex.label) -= 1.0;
        const Matrix grad_seq = model.backward(tape, g * scale, static_cast<std::size_t>(seq.cols()));
        if (backprop_encoder) encoder.backward(grad_seq);
      }
      opt.step(params);
    }
    result.epoch_loss.push_back(total / static_cast<double>(data.size()));
  }
  return result;
}

EvalReport report_from_confusion(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  const auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  r.accuracy = ratio(c.tp + c.tn, c.total());
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

EvalReport evaluate(const ConvClassifier& model, FeatureEncoder& encoder, std::span<const Example> data) {
  if (data.empty()) throw ValidationError("evaluation dataset is empty");
  Rng unused(0);
  Confusion c;
  for (const Example& ex : data) {
    const Prediction p = classify(model, encoder.encode(ex.tokens, false, unused));
    if (ex.label == kSpam) {
      (p.label == kSpam ? c.tp : c.fn) += 1;
    } else {
      (p.label == kSpam ? c.fp : c.tn) += 1;
    }
  }
  return report_from_confusion(c);
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << std::left << std::fixed << std::setprecision(4);
  out << std::setw(12) << "accuracy" << r.accuracy << '\n';
  out << std::setw(12) << "precision" << r.precision << '\n';
  out << std::setw(12) << "recall" << r.recall << '\n';
  out << std::setw(12) << "f1" << r.f1 << '\n';
  out << std::setw(12) << "confusion" << "tp=" << r.confusion.tp << " fp=" << r.confusion.fp
      << " fn=" << r.confusion.fn << " tn=" << r.confusion.tn << '\n';
  return out.str();
}

std::string format_report_kv(const EvalReport& r, const std::string& prefix) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << prefix << "accuracy=" << r.accuracy << '\n';
  out << prefix << "precision=" << r.precision << '\n';
  out << prefix << "recall=" << r.recall << '\n';
  out << prefix << "f1=" << r.f1 << '\n';
  out << prefix << "tp=" << r.confusion.tp << '\n';
  out << prefix << "fp=" << r.confusion.fp << '\n';
  out << prefix << "fn=" << r.confusion.fn << '\n';
  out << prefix << "tn=" << r.confusion.tn << '\n';
  return out.str();
}

}  // namespace ripple::classifier
