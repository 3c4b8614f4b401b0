#include "ripple/sslm.hpp"

#include "ripple/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ripple::sslm {

Projection::Projection(std::size_t in_dim, std::size_t out_dim)
    : weight("projection.weight", static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim)),
      bias("projection.bias", static_cast<Eigen::Index>(out_dim), 1) {}

Matrix Projection::forward(const Matrix& input) const {
  if (input.rows() != weight.value.cols()) throw ValidationError("projection input dimension mismatch");
  Matrix out = weight.value * input;
  out.colwise() += bias.value.col(0);
  return out;
}

Matrix Projection::backward(const Matrix& input, const Matrix& grad_out) {
  weight.grad.noalias() += grad_out * input.transpose();
  bias.grad.col(0) += grad_out.rowwise().sum();
  return weight.value.transpose() * grad_out;
}

GateParams::GateParams(std::size_t dim)
    : weight("gate.weight", static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(2 * dim)),
      bias("gate.bias", static_cast<Eigen::Index>(dim), 1) {}

Matrix gate_forward(const Matrix& graph, const Matrix& text, const GateParams& params,
                    GateTape* tape) {
  const Eigen::Index d = static_cast<Eigen::Index>(params.dim());
  if (graph.rows() != d || text.rows() != d || graph.cols() != text.cols()) {
    throw ValidationError("gate input dimension mismatch");
  }
  Matrix pre = params.weight.value.leftCols(d) * graph;
  pre.noalias() += params.weight.value.rightCols(d) * text;
  pre.colwise() += params.bias.value.col(0);
  Matrix p = nn::sigmoid(pre);
  Matrix n = p.cwiseProduct(text) + (1.0 - p.array()).matrix().cwiseProduct(graph);
  if (tape) {
    tape->graph = graph;
    tape->text = text;
    tape->preference = std::move(p);
  }
  return n;
}

Vector gate_forward(const Vector& graph, const Vector& text, const GateParams& params) {
  return gate_forward(Matrix(graph), Matrix(text), params).col(0);
}

GateInputGrad gate_backward(GateParams& params, const GateTape& tape, const Matrix& grad_out) {
  const Eigen::Index d = static_cast<Eigen::Index>(params.dim());
  const Matrix& p = tape.preference;
  const Matrix dp = grad_out.cwiseProduct(tape.text - tape.graph);
  const Matrix da = dp.cwiseProduct(p.cwiseProduct((1.0 - p.array()).matrix()));
  params.weight.grad.leftCols(d).noalias() += da * tape.graph.transpose();
  params.weight.grad.rightCols(d).noalias() += da * tape.text.transpose();
  params.bias.grad.col(0) += da.rowwise().sum();

  GateInputGrad g;
  g.graph = grad_out.cwiseProduct((1.0 - p.array()).matrix());
  g.graph.noalias() += params.weight.value.leftCols(d).transpose() * da;
  g.text = grad_out.cwiseProduct(p);
  g.text.noalias() += params.weight.value.rightCols(d).transpose() * da;
  return g;
}

BiLM::BiLM(std::size_t dim, std::size_t layer_count) : layers(layer_count), hidden(dim) {
  if (layer_count < 1) throw ValidationError("BiLM needs at least one layer");
  for (std::size_t l = 0; l < layer_count; ++l) {
    forward.emplace_back("bilm.forward." + std::to_string(l + 1), dim, dim);
    backward.emplace_back("bilm.backward." + std::to_string(l + 1), dim, dim);
  }
}

ParamList BiLM::parameters() {
  ParamList out;
  for (std::size_t l = 0; l < layers; ++l) {
    for (Param* p : forward[l].parameters()) out.push_back(p);
    for (Param* p : backward[l].parameters()) out.push_back(p);
  }
  return out;
}

std::vector<Matrix> bilm_forward(const BiLM& model, const Matrix& input, BiLMTape* tape,
                                 double dropout, Rng* rng) {
  if (input.cols() == 0) throw ValidationError("BiLM input sequence is empty");
  const Eigen::Index d = static_cast<Eigen::Index>(model.hidden);
  if (input.rows() != d) throw ValidationError("BiLM input dimension mismatch");
  const bool drop = dropout > 0.0 && rng != nullptr;

  std::vector<Matrix> layers;
  layers.reserve(model.layers + 1);
  Matrix h0(2 * d, input.cols());
  h0 << input, input;
  layers.push_back(std::move(h0));

  if (tape) {
    tape->forward.assign(model.layers, {});
    tape->backward.assign(model.layers, {});
    tape->forward_mask.clear();
    tape->backward_mask.clear();
  }
  Matrix fwd = input, bwd = input;
  for (std::size_t l = 0; l < model.layers; ++l) {
    fwd = nn::lstm_forward(model.forward[l], fwd, false, tape ? &tape->forward[l] : nullptr);
    bwd = nn::lstm_forward(model.backward[l], bwd, true, tape ? &tape->backward[l] : nullptr);
    if (drop) {
      Matrix fm = nn::dropout_mask(fwd.rows(), fwd.cols(), dropout, *rng);
      Matrix bm = nn::dropout_mask(bwd.rows(), bwd.cols(), dropout, *rng);
      fwd = fwd.cwiseProduct(fm);
      bwd = bwd.cwiseProduct(bm);
      if (tape) {
        tape->forward_mask.push_back(std::move(fm));
        tape->backward_mask.push_back(std::move(bm));
      }
    }
    Matrix hl(2 * d, input.cols());
    hl << bwd, fwd;
    layers.push_back(std::move(hl));
  }
  return layers;
}

Matrix bilm_backward(BiLM& model, const BiLMTape& tape, std::span<const Matrix> grad_layers) {
  const Eigen::Index d = static_cast<Eigen::Index>(model.hidden);
  if (grad_layers.size() != model.layers + 1) throw ValidationError("BiLM gradient layer count mismatch");
  const bool drop = !tape.forward_mask.empty();
  const Eigen::Index n = grad_layers[0].cols();
  Matrix carry_f = Matrix::Zero(d, n), carry_b = Matrix::Zero(d, n);
  for (std::size_t l = model.layers; l >= 1; --l) {
    Matrix gf = grad_layers[l].bottomRows(d) + carry_f;
    Matrix gb = grad_layers[l].topRows(d) + carry_b;
    if (drop) {
      gf = gf.cwiseProduct(tape.forward_mask[l - 1]);
      gb = gb.cwiseProduct(tape.backward_mask[l - 1]);
    }
    carry_f = nn::lstm_backward(model.forward[l - 1], tape.forward[l - 1], gf);
    carry_b = nn::lstm_backward(model.backward[l - 1], tape.backward[l - 1], gb);
  }
  return carry_f + carry_b + grad_layers[0].topRows(d) + grad_layers[0].bottomRows(d);
}

AggParams::AggParams(std::size_t layers)
    : weights("aggregation.s", static_cast<Eigen::Index>(layers + 1), 1), scale("aggregation.omega", 1, 1) {
  scale.value(0, 0) = 1.0;
}

std::vector<double> layer_weights(const AggParams& params) {
  const auto& s = params.weights.value;
  const double peak = s.maxCoeff();
  std::vector<double> w(static_cast<std::size_t>(s.rows()));
  double z = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    w[l] = std::exp(s(static_cast<Eigen::Index>(l), 0) - peak);
    z += w[l];
  }
  for (double& x : w) x /= z;
  return w;
}

Matrix aggregate(std::span<const Matrix> layers, const AggParams& params) {
  if (layers.size() != static_cast<std::size_t>(params.weights.value.rows())) {
    throw ValidationError("aggregation expects one weight per layer");
  }
  for (const auto& h : layers) {
    if (h.rows() != layers[0].rows() || h.cols() != layers[0].cols()) {
      throw ValidationError("aggregation layers differ in shape");
    }
  }
  const auto w = layer_weights(params);
  Matrix out = Matrix::Zero(layers[0].rows(), layers[0].cols());
  for (std::size_t l = 0; l < layers.size(); ++l) out += w[l] * layers[l];
  return params.scale.value(0, 0) * out;
}

std::vector<Matrix> aggregate_backward(AggParams& params, std::span<const Matrix> layers,
                                       const Matrix& grad_out) {
  const auto w = layer_weights(params);
  const double omega = params.scale.value(0, 0);
  std::vector<double> a(layers.size());
  double mixed = 0.0;
  std::vector<Matrix> grads;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    a[l] = layers[l].cwiseProduct(grad_out).sum();
    mixed += w[l] * a[l];
    grads.push_back(omega * w[l] * grad_out);
  }
  params.scale.grad(0, 0) += mixed;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    params.weights.grad(static_cast<Eigen::Index>(l), 0) += omega * w[l] * (a[l] - mixed);
  }
  return grads;
}

void SSConfig::validate() const {
  if (dim == 0) throw ValidationError("dim must be positive");
  if (layers < 1) throw ValidationError("layers must be at least 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("dropout must be in [0, 1)");
  if (!(init_scale > 0.0)) throw ValidationError("init_scale must be positive");
}

SSModel::SSModel(Matrix graph_table, Matrix text_table, const SSConfig& config)
    : config_(config), graph_table_(std::move(graph_table)), text_table_(std::move(text_table)) {
  config_.validate();
  const auto d = static_cast<Eigen::Index>(config_.dim);
  if (text_table_.rows() != d || graph_table_.rows() != 2 * d) {
    throw ValidationError("embedding tables must be 2d x V (graph) and d x V (text)");
  }
  if (text_table_.cols() != graph_table_.cols()) throw ValidationError("embedding tables differ in vocabulary");
  projection = Projection(2 * config_.dim, config_.dim);
  gate = GateParams(config_.dim);
  bilm = BiLM(config_.dim, config_.layers);
  aggregation = AggParams(config_.layers);
  head.weight = Param("head.weight", graph_table_.cols(), d);
  head.bias = Param("head.bias", graph_table_.cols(), 1);

  Rng rng(config_.seed);
  for (Param* p : encoder_parameters()) nn::init_uniform(*p, config_.init_scale, rng);
  nn::init_uniform(head.weight, config_.init_scale, rng);
}

ParamList SSModel::encoder_parameters() {
  ParamList out = projection.parameters();
  for (Param* p : gate.parameters()) out.push_back(p);
  for (Param* p : bilm.parameters()) out.push_back(p);
  return out;
}

ParamList SSModel::parameters() {
  ParamList out = encoder_parameters();
  for (Param* p : aggregation.parameters()) out.push_back(p);
  return out;
}

Matrix SSModel::combine(std::span<const std::uint32_t> tokens, Tape* tape) const {
  const Eigen::Index n = static_cast<Eigen::Index>(tokens.size());
  Matrix graph(graph_table_.rows(), n), text(text_table_.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::uint32_t t = tokens[static_cast<std::size_t>(k)];
    if (t >= vocabulary()) throw ValidationError("token id outside the model vocabulary");
    graph.col(k) = graph_table_.col(t);
    text.col(k) = text_table_.col(t);
  }
  Matrix projected = projection.forward(graph);
  Matrix combined = gate_forward(projected, text, gate, tape ? &tape->gate : nullptr);
  if (tape) {
    tape->tokens.assign(tokens.begin(), tokens.end());
    tape->graph_in = std::move(graph);
    tape->projected = std::move(projected);
  }
  return combined;
}

std::vector<Matrix> SSModel::layers(std::span<const std::uint32_t> tokens, bool training, Rng* rng,
                                    Tape* tape) const {
  if (tokens.empty()) throw ValidationError("empty token sequence");
  const Matrix combined = combine(tokens, tape);
  auto out = bilm_forward(bilm, combined, tape ? &tape->bilm : nullptr,
                          training ? config_.dropout : 0.0, training ? rng : nullptr);
  if (tape) tape->layers = out;
  return out;
}

Matrix SSModel::forward(std::span<const std::uint32_t> tokens, bool training, Rng* rng,
                        Tape* tape) const {
  return aggregate(layers(tokens, training, rng, tape), aggregation);
}

void SSModel::backward(const Tape& tape, const Matrix& grad_ss) {
  const auto grads = aggregate_backward(aggregation, tape.layers, grad_ss);
  backward_layers(tape, grads);
}

void SSModel::backward_layers(const Tape& tape, std::span<const Matrix> grad_layers) {
  const Matrix grad_n = bilm_backward(bilm, tape.bilm, grad_layers);
  const GateInputGrad g = gate_backward(gate, tape.gate, grad_n);
  projection.backward(tape.graph_in, g.graph);
}

// ---------------------------------------------------------------------------
// Pretraining

void PretrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("lm learning rate must be positive");
  if (batch < 1) throw ValidationError("lm batch must be at least 1");
  if (samples < 1) throw ValidationError("lm samples must be at least 1");
  if (holdout < 0.0 || holdout >= 1.0) throw ValidationError("holdout must be in [0, 1)");
}

namespace {

// Candidate ids for one prediction: the target first, then negatives drawn
// uniformly without the target. With uniform proposals the log-Q correction
// of sampled softmax is a constant and drops out.
void candidates(std::uint32_t target, std::size_t vocab, std::size_t samples, Rng& rng,
                std::vector<std::uint32_t>& out) {
  out.clear();
  out.push_back(target);
  if (samples + 1 >= vocab) {
    for (std::uint32_t v = 0; v < vocab; ++v)
      if (v != target) out.push_back(v);
    return;
  }
  for (std::size_t s = 0; s < samples; ++s) {
    auto v = static_cast<std::uint32_t>(rng.below(vocab - 1));
    if (v >= target) ++v;
    out.push_back(v);
  }
}

// Softmax cross-entropy over the candidate rows; accumulates head gradients
// (scaled by `weight`) and returns d/dh.
double candidate_loss(LmHead& head, const Vector& h, std::span<const std::uint32_t> cands,
                      double weight, Vector& grad_h) {
  Vector logits(static_cast<Eigen::Index>(cands.size()));
  for (std::size_t i = 0; i < cands.size(); ++i) {
    logits(static_cast<Eigen::Index>(i)) = head.weight.value.row(cands[i]).dot(h) + head.bias.value(cands[i], 0);
  }
  const double peak = logits.maxCoeff();
  Vector p = (logits.array() - peak).exp().matrix();
  const double z = p.sum();
  p /= z;
  const double loss = -(logits(0) - peak - std::log(z));
  p(0) -= 1.0;
  grad_h.setZero(h.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double g = weight * p(static_cast<Eigen::Index>(i));
    grad_h.noalias() += g * head.weight.value.row(cands[i]).transpose();
    head.weight.grad.row(cands[i]).noalias() += g * h.transpose();
    head.bias.grad(cands[i], 0) += g;
  }
  return loss;
}

struct HeldOut {
  double loss = 0.0;
  double accuracy = 0.0;
};

HeldOut score_full(const SSModel& model, std::span<const std::vector<std::uint32_t>> corpus) {
  const Eigen::Index d = static_cast<Eigen::Index>(model.dim());
  double loss = 0.0;
  std::size_t predictions = 0, forward_predictions = 0, correct = 0;
  for (const auto& seq : corpus) {
    if (seq.size() < 2) continue;
    const auto layers = model.layers(seq, false, nullptr);
    const Matrix& top = layers.back();
    const Eigen::Index n = top.cols();
    for (Eigen::Index k = 0; k < n; ++k) {
      for (int dir = 0; dir < 2; ++dir) {
        const bool fwd = dir == 0;
        const Eigen::Index target_pos = fwd ? k + 1 : k - 1;
        if (target_pos < 0 || target_pos >= n) continue;
        const Vector h = fwd ? Vector(top.col(k).tail(d)) : Vector(top.col(k).head(d));
        const Vector logits = model.head.weight.value * h + model.head.bias.value.col(0);
        const double peak = logits.maxCoeff();
        const double lse = peak + std::log((logits.array() - peak).exp().sum());
        const std::uint32_t target = seq[static_cast<std::size_t>(target_pos)];
        loss += lse - logits(target);
        ++predictions;
        if (fwd) {
          Eigen::Index best;
          logits.maxCoeff(&best);
          correct += static_cast<std::uint32_t>(best) == target;
          ++forward_predictions;
        }
      }
    }
  }
  HeldOut r;
  r.loss = predictions ? loss / static_cast<double>(predictions) : 0.0;
  r.accuracy = forward_predictions ? static_cast<double>(correct) / static_cast<double>(forward_predictions) : 0.0;
  return r;
}

}  // namespace

double lm_loss(const SSModel& model, std::span<const std::vector<std::uint32_t>> corpus) {
  return score_full(model, corpus).loss;
}

double lm_accuracy(const SSModel& model, std::span<const std::vector<std::uint32_t>> corpus) {
  return score_full(model, corpus).accuracy;
}

PretrainReport pretrain_bilm(SSModel& model, const Corpus& corpus, const PretrainConfig& config) {
  config.validate();
  if (corpus.empty()) throw ValidationError("pretraining corpus is empty");
  std::size_t held = static_cast<std::size_t>(config.holdout * static_cast<double>(corpus.size()));
  if (held >= corpus.size()) held = corpus.size() - 1;
  const std::span<const std::vector<std::uint32_t>> all(corpus);
  const auto train = all.first(corpus.size() - held);
  const auto holdout = held ? all.last(held) : train;

  PretrainReport report;
  report.initial_holdout_loss = lm_loss(model, holdout);

  const Eigen::Index d = static_cast<Eigen::Index>(model.dim());
  ParamList params = model.encoder_parameters();
  for (Param* p : model.head.parameters()) params.push_back(p);
  nn::Optimizer opt({config.method, config.learning_rate, config.momentum, 0.999, 1e-8, config.clip_norm});
  Rng rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::vector<std::uint32_t> cands;
  Vector grad_h;
  SSModel::Tape tape;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span(order), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_predictions = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t stop = std::min(order.size(), start + config.batch);
      std::size_t batch_predictions = 0;
      for (std::size_t b = start; b < stop; ++b) batch_predictions += std::max<std::size_t>(train[order[b]].size(), 1) - 1;
      if (batch_predictions == 0) continue;
      const double weight = 1.0 / (2.0 * static_cast<double>(batch_predictions));
      nn::zero_grads(params);
      for (std::size_t b = start; b < stop; ++b) {
        const auto& seq = train[order[b]];
        if (seq.size() < 2) continue;
        const auto layers = model.layers(seq, true, &rng, &tape);
        const Matrix& top = layers.back();
        const Eigen::Index n = top.cols();
        std::vector<Matrix> grads(layers.size());
        for (std::size_t l = 0; l < layers.size(); ++l) grads[l] = Matrix::Zero(layers[l].rows(), n);
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k + 1 < n) {
            candidates(seq[static_cast<std::size_t>(k + 1)], model.vocabulary(), config.samples, rng, cands);
            epoch_loss += candidate_loss(model.head, top.col(k).tail(d), cands, weight, grad_h);
            grads.back().col(k).tail(d) += grad_h;
            ++epoch_predictions;
          }
          if (k > 0) {
            candidates(seq[static_cast<std::size_t>(k - 1)], model.vocabulary(), config.samples, rng, cands);
            epoch_loss += candidate_loss(model.head, top.col(k).head(d), cands, weight, grad_h);
            grads.back().col(k).head(d) += grad_h;
            ++epoch_predictions;
          }
        }
        model.backward_layers(tape, grads);
      }
      opt.step(params);
    }
    report.epoch_loss.push_back(epoch_predictions ? epoch_loss / static_cast<double>(epoch_predictions) : 0.0);
  }
  const HeldOut final_score = score_full(model, holdout);
  report.final_holdout_loss = final_score.loss;
  report.holdout_accuracy = final_score.accuracy;
  return report;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::string_view kModelMagic = "RIPPLE-SSLM";
constexpr std::uint32_t kModelVersion = 1;

std::vector<const Param*> all_params(const SSModel& m) {
  auto& mm = const_cast<SSModel&>(m);
  std::vector<const Param*> out;
  for (Param* p : mm.parameters()) out.push_back(p);
  for (Param* p : mm.head.parameters()) out.push_back(p);
  return out;
}
}  // namespace

void write_model(const SSModel& model, BinaryWriter& w) {
  const SSConfig& c = model.config();
  w.u64(c.dim);
  w.u64(c.layers);
  w.f64(c.dropout);
  w.f64(c.init_scale);
  w.u64(c.seed);
  w.matrix(model.graph_table());
  w.matrix(model.text_table());
  const auto params = all_params(model);
  w.u64(params.size());
  for (const Param* p : params) {
    w.str(p->name);
    w.matrix(p->value);
  }
}

SSModel read_model(BinaryReader& r) {
  SSConfig c;
  c.dim = r.u64();
  c.layers = r.u64();
  c.dropout = r.f64();
  c.init_scale = r.f64();
  c.seed = r.u64();
  Matrix graph = r.matrix();
  Matrix text = r.matrix();
  SSModel model;
  try {
    model = SSModel(std::move(graph), std::move(text), c);
  } catch (const ValidationError& e) {
    throw FormatError(std::string("corrupted model: ") + e.what());
  }
  ParamList params = model.parameters();
  for (Param* p : model.head.parameters()) params.push_back(p);
  if (r.u64() != params.size()) throw FormatError("corrupted model: parameter count mismatch");
  for (Param* p : params) {
    const std::string name = r.str();
    Matrix value = r.matrix();
    if (name != p->name || value.rows() != p->value.rows() || value.cols() != p->value.cols()) {
      throw FormatError("corrupted model: unexpected tensor '" + name + "'");
    }
    p->value = std::move(value);
    p->zero_grad();
  }
  return model;
}

void save_model(const SSModel& model, const std::filesystem::path& path) {
  BinaryWriter w;
  write_model(model, w);
  std::ostringstream header;
  header << "dim=" << model.dim() << " layers=" << model.config().layers
         << " vocabulary=" << model.vocabulary();
  write_artifact(path, kModelMagic, kModelVersion, header.str(), w);
}

SSModel load_model(const std::filesystem::path& path) {
  const Artifact a = read_artifact(path, kModelMagic, kModelVersion);
  BinaryReader r(a.payload);
  SSModel m = read_model(r);
  r.expect_done();
  return m;
}

}  // namespace ripple::sslm
