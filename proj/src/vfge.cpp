#include "ripple/vfge.hpp"

#include "ripple/binary_io.hpp"
#include "ripple/errors.hpp"
#include "ripple/skipgram.hpp"
#include "ripple/text.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace ripple::vfge {

void WalkConfig::validate() const {
  if (walks_per_vertex == 0) throw ValidationError("walks_per_vertex must be positive");
  if (walk_length == 0) throw ValidationError("walk_length must be positive");
}

std::size_t WalkCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& w : walks) n += w.size();
  return n;
}

Step hierarchical_step(const VariationGraph& g, std::uint32_t from, Rng& rng) {
  std::array<double, kEdgeTypeCount> type_weight{};
  double total = 0.0;
  for (EdgeType t : kEdgeTypes) {
    type_weight[index(t)] = g.strength(from, t);
    total += type_weight[index(t)];
  }
  if (!(total > 0.0)) throw ValidationError("walk reached an isolated vertex");
  const auto t = static_cast<EdgeType>(sample_weighted(type_weight, total, rng));

  const auto adj = g.adjacency(from, t);
  double target = rng.uniform() * g.strength(from, t);
  for (const Adjacent& a : adj) {
    target -= a.weight;
    if (target < 0.0) return {a.vertex, t};
  }
  return {adj.back().vertex, t};
}

WalkCorpus generate_walks(const VariationGraph& g, const WalkConfig& config) {
  config.validate();
  WalkCorpus corpus;
  corpus.walks_per_vertex = config.walks_per_vertex;
  corpus.walk_length = config.walk_length;
  corpus.seed = config.seed;
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) == 0) continue;
    for (std::size_t r = 0; r < config.walks_per_vertex; ++r) {
      Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(v) * config.walks_per_vertex + r);
      Walk walk;
      walk.reserve(config.walk_length);
      walk.push_back(v);
      while (walk.size() < config.walk_length) walk.push_back(hierarchical_step(g, walk.back(), rng).vertex);
      corpus.walks.push_back(std::move(walk));
    }
  }
  return corpus;
}

namespace {
constexpr std::string_view kWalkMagic = "RIPPLE-WALKS";
constexpr std::string_view kFamilyMagic = "RIPPLE-FAMILIES";
constexpr std::string_view kEmbeddingMagic = "RIPPLE-VFGE";
constexpr std::uint32_t kVersion = 1;

void write_u32s(BinaryWriter& w, const std::vector<std::uint32_t>& values) {
  w.u64(values.size());
  for (std::uint32_t x : values) w.u32(x);
}

std::vector<std::uint32_t> read_u32s(BinaryReader& r) {
  const std::uint64_t n = r.u64();
  std::vector<std::uint32_t> values;
  values.reserve(std::min<std::uint64_t>(n, 1u << 24));
  for (std::uint64_t i = 0; i < n; ++i) values.push_back(r.u32());
  return values;
}
}  // namespace

void save_walks(const WalkCorpus& corpus, const std::filesystem::path& path) {
  BinaryWriter w;
  w.u64(corpus.walks_per_vertex);
  w.u64(corpus.walk_length);
  w.u64(corpus.seed);
  w.u64(corpus.walks.size());
  for (const auto& walk : corpus.walks) write_u32s(w, walk);
  std::ostringstream header;
  header << "walks=" << corpus.walks.size() << " walk_length=" << corpus.walk_length
         << " seed=" << corpus.seed;
  write_artifact(path, kWalkMagic, kVersion, header.str(), w);
}

WalkCorpus load_walks(const std::filesystem::path& path) {
  const Artifact a = read_artifact(path, kWalkMagic, kVersion);
  BinaryReader r(a.payload);
  WalkCorpus c;
  c.walks_per_vertex = r.u64();
  c.walk_length = r.u64();
  c.seed = r.u64();
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) c.walks.push_back(read_u32s(r));
  r.expect_done();
  return c;
}

// ---------------------------------------------------------------------------

void FamilyConfig::validate() const {
  if (families < 1) throw ValidationError("family count must be at least 1");
  if (alpha < 0.0 || !std::isfinite(alpha)) throw ValidationError("alpha must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be positive");
}

void family_weights(std::span<const double> walk_counts, std::span<const double> vertex_counts,
                    std::span<const double> family_totals, std::size_t vocabulary, double alpha,
                    double eta, std::span<double> out) {
  const double v_eta = static_cast<double>(vocabulary) * eta;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = (walk_counts[k] + alpha) * (vertex_counts[k] + eta) / (family_totals[k] + v_eta);
  }
}

FamilyState initialize_families(const WalkCorpus& corpus, std::size_t vocabulary,
                                const FamilyConfig& config, Rng& rng) {
  config.validate();
  if (corpus.walks.empty()) throw ValidationError("walk corpus is empty");
  FamilyState s;
  s.families = config.families;
  s.vocabulary = vocabulary;
  s.alpha = config.resolved_alpha();
  s.eta = config.eta;
  s.walk_family.assign(corpus.walks.size() * s.families, 0);
  s.family_vertex.assign(s.families * vocabulary, 0);
  s.family_total.assign(s.families, 0);
  s.assignment.resize(corpus.walks.size());
  for (std::size_t d = 0; d < corpus.walks.size(); ++d) {
    const auto& walk = corpus.walks[d];
    auto& z = s.assignment[d];
    z.resize(walk.size());
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (walk[i] >= vocabulary) throw ValidationError("walk token outside the vocabulary");
      const auto k = static_cast<std::uint32_t>(s.families == 1 ? 0 : rng.below(s.families));
      z[i] = k;
      ++s.walk_family[d * s.families + k];
      ++s.family_vertex[k * vocabulary + walk[i]];
      ++s.family_total[k];
    }
  }
  return s;
}

void gibbs_sweep(FamilyState& s, const WalkCorpus& corpus, Rng& rng) {
  const std::size_t K = s.families;
  if (K == 1) return;  // the conditional is identically 1
  std::vector<double> walk_counts(K), vertex_counts(K), totals(K), weights(K);
  for (std::size_t d = 0; d < corpus.walks.size(); ++d) {
    const auto& walk = corpus.walks[d];
    auto& z = s.assignment[d];
    std::uint32_t* ndk = &s.walk_family[d * K];
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const std::uint32_t w = walk[i];
      const std::uint32_t old = z[i];
      --ndk[old];
      --s.family_vertex[old * s.vocabulary + w];
      --s.family_total[old];

      for (std::size_t k = 0; k < K; ++k) {
        walk_counts[k] = ndk[k];
        vertex_counts[k] = s.family_vertex[k * s.vocabulary + w];
        totals[k] = s.family_total[k];
      }
      family_weights(walk_counts, vertex_counts, totals, s.vocabulary, s.alpha, s.eta, weights);
      const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      const auto k = static_cast<std::uint32_t>(sample_weighted(weights, total, rng));

      z[i] = k;
      ++ndk[k];
      ++s.family_vertex[k * s.vocabulary + w];
      ++s.family_total[k];
    }
  }
}

FamilyState gibbs_assign(const WalkCorpus& corpus, std::size_t vocabulary,
                         const FamilyConfig& config) {
  Rng rng(config.seed);
  FamilyState s = initialize_families(corpus, vocabulary, config, rng);
  for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) gibbs_sweep(s, corpus, rng);
  return s;
}

bool counts_consistent(const FamilyState& s, const WalkCorpus& corpus) {
  if (s.assignment.size() != corpus.walks.size()) return false;
  std::vector<std::uint32_t> ndk(corpus.walks.size() * s.families, 0);
  std::vector<std::uint32_t> nkw(s.families * s.vocabulary, 0);
  std::vector<std::uint32_t> nk(s.families, 0);
  for (std::size_t d = 0; d < corpus.walks.size(); ++d) {
    if (s.assignment[d].size() != corpus.walks[d].size()) return false;
    std::size_t row = 0;
    for (std::size_t i = 0; i < corpus.walks[d].size(); ++i) {
      const std::uint32_t k = s.assignment[d][i];
      if (k >= s.families) return false;
      ++ndk[d * s.families + k];
      ++nkw[k * s.vocabulary + corpus.walks[d][i]];
      ++nk[k];
    }
    for (std::size_t k = 0; k < s.families; ++k) row += s.n_dk(d, k);
    if (row != corpus.walks[d].size()) return false;
  }
  for (std::size_t k = 0; k < s.families; ++k) {
    std::uint64_t sum = 0;
    for (std::size_t v = 0; v < s.vocabulary; ++v) sum += s.n_kw(k, v);
    if (sum != s.family_total[k]) return false;
  }
  return ndk == s.walk_family && nkw == s.family_vertex && nk == s.family_total;
}

std::vector<double> family_posterior(const FamilyState& s, std::uint32_t vertex) {
  if (vertex >= s.vocabulary) throw ValidationError("vertex outside the family state vocabulary");
  const std::size_t K = s.families;
  const double v_eta = static_cast<double>(s.vocabulary) * s.eta;
  double prior_norm = 0.0;
  for (std::size_t k = 0; k < K; ++k) prior_norm += s.family_total[k] + s.alpha;
  std::vector<double> p(K);
  double z = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double prior = (s.family_total[k] + s.alpha) / prior_norm;
    p[k] = (s.n_kw(k, vertex) + s.eta) / (s.family_total[k] + v_eta) * prior;
    z += p[k];
  }
  for (double& x : p) x /= z;
  return p;
}

std::uint32_t dominant_family(const FamilyState& s, std::uint32_t vertex) {
  const auto p = family_posterior(s, vertex);
  return static_cast<std::uint32_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void save_families(const FamilyState& s, const std::filesystem::path& path) {
  BinaryWriter w;
  w.u64(s.families);
  w.u64(s.vocabulary);
  w.f64(s.alpha);
  w.f64(s.eta);
  w.u64(s.assignment.size());
  for (const auto& z : s.assignment) write_u32s(w, z);
  write_u32s(w, s.walk_family);
  write_u32s(w, s.family_vertex);
  write_u32s(w, s.family_total);
  std::ostringstream header;
  header << "families=" << s.families << " vocabulary=" << s.vocabulary;
  write_artifact(path, kFamilyMagic, kVersion, header.str(), w);
}

FamilyState load_families(const std::filesystem::path& path) {
  const Artifact a = read_artifact(path, kFamilyMagic, kVersion);
  BinaryReader r(a.payload);
  FamilyState s;
  s.families = r.u64();
  s.vocabulary = r.u64();
  s.alpha = r.f64();
  s.eta = r.f64();
  const std::uint64_t walks = r.u64();
  for (std::uint64_t d = 0; d < walks; ++d) s.assignment.push_back(read_u32s(r));
  s.walk_family = read_u32s(r);
  s.family_vertex = read_u32s(r);
  s.family_total = read_u32s(r);
  r.expect_done();
  if (s.walk_family.size() != walks * s.families ||
      s.family_vertex.size() != s.families * s.vocabulary || s.family_total.size() != s.families) {
    throw FormatError("corrupted family state: table sizes disagree");
  }
  return s;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd PairEmbeddings::center(std::uint32_t c, std::uint32_t f) const {
  Eigen::VectorXd h(2 * dim);
  h << char_in.col(c), fam_in.col(f);
  return h;
}

Eigen::VectorXd PairEmbeddings::context(std::uint32_t c, std::uint32_t f) const {
  Eigen::VectorXd u(2 * dim);
  u << char_out.col(c), fam_out.col(f);
  return u;
}

bool PairEmbeddings::operator==(const PairEmbeddings& o) const {
  return dim == o.dim && char_in == o.char_in && char_out == o.char_out && fam_in == o.fam_in &&
         fam_out == o.fam_out;
}

void SkipGramConfig::validate() const {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
  if (window < 1) throw ValidationError("window must be at least 1");
  if (negatives < 1) throw ValidationError("negatives must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (threads < 1) throw ValidationError("threads must be at least 1");
}

PairEmbeddings init_pair_embeddings(std::size_t vocabulary, std::size_t families, std::size_t dim,
                                    std::uint64_t seed) {
  Rng rng(seed);
  PairEmbeddings e;
  e.dim = dim;
  const auto d = static_cast<Eigen::Index>(dim);
  const double scale = 0.5 / static_cast<double>(dim);
  e.char_in.resize(d, static_cast<Eigen::Index>(vocabulary));
  e.fam_in.resize(d, static_cast<Eigen::Index>(families));
  for (Eigen::Index j = 0; j < e.char_in.cols(); ++j)
    for (Eigen::Index i = 0; i < d; ++i) e.char_in(i, j) = rng.uniform(-scale, scale);
  for (Eigen::Index j = 0; j < e.fam_in.cols(); ++j)
    for (Eigen::Index i = 0; i < d; ++i) e.fam_in(i, j) = rng.uniform(-scale, scale);
  e.char_out = Eigen::MatrixXd::Zero(d, e.char_in.cols());
  e.fam_out = Eigen::MatrixXd::Zero(d, e.fam_in.cols());
  return e;
}

namespace {

// log(sigmoid(x)) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

template <typename Visit>
double pair_loss_impl(const PairEmbeddings& emb, const PairSample& sample, Visit&& visit) {
  const auto c_in = emb.char_in.col(sample.center.character);
  const auto f_in = emb.fam_in.col(sample.center.family);
  double loss = 0.0;
  auto term = [&](const CharFamily& out, double label) {
    const double s = emb.char_out.col(out.character).dot(c_in) + emb.fam_out.col(out.family).dot(f_in);
    loss -= label > 0.5 ? log_sigmoid(s) : log_sigmoid(-s);
    visit(out, sigmoid(s) - label);
  };
  term(sample.context, 1.0);
  for (const auto& n : sample.negatives) term(n, 0.0);
  return loss;
}

}  // namespace

double pair_loss(const PairEmbeddings& emb, const PairSample& sample) {
  return pair_loss_impl(emb, sample, [](const CharFamily&, double) {});
}

double pair_loss_and_gradient(const PairEmbeddings& emb, const PairSample& sample,
                              PairGradient& grad) {
  const Eigen::Index d = static_cast<Eigen::Index>(emb.dim);
  grad.center.setZero(2 * d);
  grad.outputs.resize(1 + sample.negatives.size());
  Eigen::VectorXd h = emb.center(sample.center.character, sample.center.family);
  std::size_t slot = 0;
  return pair_loss_impl(emb, sample, [&](const CharFamily& out, double g) {
    grad.center.head(d).noalias() += g * emb.char_out.col(out.character);
    grad.center.tail(d).noalias() += g * emb.fam_out.col(out.family);
    auto& [who, gu] = grad.outputs[slot++];
    who = out;
    gu = g * h;
  });
}

std::vector<double> pair_softmax(const PairEmbeddings& emb, const FamilyState& state,
                                 CharFamily center) {
  const Eigen::VectorXd h = emb.center(center.character, center.family);
  const std::size_t V = emb.vocabulary();
  std::vector<double> logits(V);
  for (std::uint32_t k = 0; k < V; ++k) {
    logits[k] = emb.context(k, dominant_family(state, k)).dot(h);
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& x : logits) {
    x = std::exp(x - peak);
    z += x;
  }
  for (double& x : logits) x /= z;
  return logits;
}

namespace {

void apply_gradient(PairEmbeddings& emb, const PairSample& sample, const PairGradient& g,
                    double lr) {
  const Eigen::Index d = static_cast<Eigen::Index>(emb.dim);
  for (const auto& [who, gu] : g.outputs) {
    emb.char_out.col(who.character).noalias() -= lr * gu.head(d);
    emb.fam_out.col(who.family).noalias() -= lr * gu.tail(d);
  }
  emb.char_in.col(sample.center.character).noalias() -= lr * g.center.head(d);
  emb.fam_in.col(sample.center.family).noalias() -= lr * g.center.tail(d);
}

struct ShardStats {
  double loss = 0.0;
  std::size_t samples = 0;
};

ShardStats train_shard(PairEmbeddings& emb, const WalkCorpus& corpus, const FamilyState& state,
                       std::span<const std::size_t> order, const NegativeSampler& sampler,
                       const std::vector<std::uint32_t>& dominant, const SkipGramConfig& config,
                       std::atomic<std::size_t>& processed, std::size_t total_tokens, Rng& rng) {
  ShardStats stats;
  PairSample sample;
  PairGradient grad;
  sample.negatives.resize(config.negatives);
  for (std::size_t d : order) {
    const auto& walk = corpus.walks[d];
    const auto& z = state.assignment[d];
    const double progress = static_cast<double>(processed.load(std::memory_order_relaxed)) /
                            static_cast<double>(total_tokens);
    const double lr = config.learning_rate * std::max(1e-4, 1.0 - progress);
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const std::size_t reach = 1 + rng.below(config.window);
      sample.center = {walk[i], z[i]};
      const std::size_t lo = i >= reach ? i - reach : 0;
      const std::size_t hi = std::min(walk.size() - 1, i + reach);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        sample.context = {walk[j], z[j]};
        for (auto& neg : sample.negatives) {
          std::uint32_t c = sampler(rng);
          for (int retry = 0; c == walk[j] && retry < 8; ++retry) c = sampler(rng);
          neg = {c, dominant[c]};
        }
        stats.loss += pair_loss_and_gradient(emb, sample, grad);
        ++stats.samples;
        apply_gradient(emb, sample, grad, lr);
      }
    }
    processed.fetch_add(walk.size(), std::memory_order_relaxed);
  }
  return stats;
}

}  // namespace

void train_pair_skipgram(PairEmbeddings& emb, const WalkCorpus& corpus, const FamilyState& state,
                         const SkipGramConfig& config, SkipGramReport* report) {
  config.validate();
  if (emb.vocabulary() != state.vocabulary || emb.families() != state.families) {
    throw ValidationError("embedding tables do not match the family state");
  }
  if (state.assignment.size() != corpus.walks.size()) {
    throw ValidationError("family state does not cover the walk corpus");
  }
  if (config.epochs == 0 || corpus.walks.empty()) return;

  std::vector<std::uint64_t> counts(state.vocabulary, 0);
  for (const auto& w : corpus.walks)
    for (std::uint32_t v : w) ++counts[v];
  const NegativeSampler sampler(counts);
  std::vector<std::uint32_t> dominant(state.vocabulary);
  for (std::uint32_t v = 0; v < state.vocabulary; ++v) dominant[v] = dominant_family(state, v);

  const std::size_t total_tokens = corpus.token_count() * config.epochs;
  std::atomic<std::size_t> processed{0};
  Rng rng(config.seed);
  std::vector<std::size_t> order(corpus.walks.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span(order), rng);
    ShardStats total;
    if (config.threads == 1) {
      total = train_shard(emb, corpus, state, order, sampler, dominant, config, processed,
                          total_tokens, rng);
    } else {
      // Lock-free updates over walk shards; results depend on scheduling.
      const std::size_t shards = std::min(config.threads, order.size());
      std::vector<ShardStats> results(shards);
      std::vector<std::thread> workers;
      for (std::size_t s = 0; s < shards; ++s) {
        const std::size_t begin = order.size() * s / shards;
        const std::size_t end = order.size() * (s + 1) / shards;
        workers.emplace_back([&, s, begin, end] {
          Rng local = Rng::stream(config.seed, epoch * 1000003 + s);
          results[s] = train_shard(emb, corpus, state, std::span(order).subspan(begin, end - begin),
                                   sampler, dominant, config, processed, total_tokens, local);
        });
      }
      for (auto& w : workers) w.join();
      for (const auto& r : results) {
        total.loss += r.loss;
        total.samples += r.samples;
      }
    }
    if (report) report->epoch_loss.push_back(total.samples ? total.loss / total.samples : 0.0);
  }
}

PairEmbeddings train_pair_skipgram(const WalkCorpus& corpus, const FamilyState& state,
                                   const SkipGramConfig& config, SkipGramReport* report) {
  config.validate();
  PairEmbeddings emb = init_pair_embeddings(state.vocabulary, state.families, config.dim, config.seed);
  train_pair_skipgram(emb, corpus, state, config, report);
  return emb;
}

Eigen::VectorXd integrate(const PairEmbeddings& emb, const FamilyState& state,
                          std::uint32_t vertex) {
  if (vertex >= emb.vocabulary()) throw ValidationError("vertex outside the embedding vocabulary");
  const auto posterior = family_posterior(state, vertex);
  const Eigen::Index d = static_cast<Eigen::Index>(emb.dim);
  Eigen::VectorXd g(2 * d);
  g.head(d) = emb.char_in.col(vertex);
  g.tail(d).setZero();
  for (std::size_t k = 0; k < posterior.size(); ++k) g.tail(d) += posterior[k] * emb.fam_in.col(k);
  return g;
}

Eigen::MatrixXd integrate_all(const PairEmbeddings& emb, const FamilyState& state) {
  Eigen::MatrixXd out(2 * emb.dim, emb.vocabulary());
  for (std::uint32_t v = 0; v < emb.vocabulary(); ++v) out.col(v) = integrate(emb, state, v);
  return out;
}

std::vector<Similar> nearest(const Eigen::MatrixXd& integrated, std::uint32_t vertex,
                             std::size_t k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  if (vertex >= integrated.cols()) throw ValidationError("vertex outside the embedding vocabulary");
  const Eigen::VectorXd q = integrated.col(vertex);
  const double qn = q.norm();
  std::vector<Similar> all;
  for (std::uint32_t v = 0; v < integrated.cols(); ++v) {
    if (v == vertex) continue;
    const double n = integrated.col(v).norm();
    const double score = (qn > 0 && n > 0) ? integrated.col(v).dot(q) / (qn * n) : 0.0;
    all.push_back({v, score});
  }
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    [](const Similar& a, const Similar& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.vertex < b.vertex;
                    });
  all.resize(take);
  return all;
}

std::vector<Similar> nearest(const PairEmbeddings& emb, const FamilyState& state,
                             std::uint32_t vertex, std::size_t k) {
  return nearest(integrate_all(emb, state), vertex, k);
}

void save_embeddings(const PairEmbeddings& emb, const std::filesystem::path& path) {
  BinaryWriter w;
  w.u64(emb.dim);
  w.matrix(emb.char_in);
  w.matrix(emb.char_out);
  w.matrix(emb.fam_in);
  w.matrix(emb.fam_out);
  std::ostringstream header;
  header << "vocabulary=" << emb.vocabulary() << " families=" << emb.families() << " dim=" << emb.dim;
  write_artifact(path, kEmbeddingMagic, kVersion, header.str(), w);
}

PairEmbeddings load_embeddings(const std::filesystem::path& path) {
  const Artifact a = read_artifact(path, kEmbeddingMagic, kVersion);
  BinaryReader r(a.payload);
  PairEmbeddings e;
  e.dim = r.u64();
  e.char_in = r.matrix();
  e.char_out = r.matrix();
  e.fam_in = r.matrix();
  e.fam_out = r.matrix();
  r.expect_done();
  const auto d = static_cast<Eigen::Index>(e.dim);
  if (e.char_in.rows() != d || e.char_out.rows() != d || e.fam_in.rows() != d ||
      e.fam_out.rows() != d || e.char_in.cols() != e.char_out.cols() ||
      e.fam_in.cols() != e.fam_out.cols()) {
    throw FormatError("corrupted embeddings: inconsistent shapes");
  }
  return e;
}

void export_text(const Eigen::MatrixXd& integrated, const VariationGraph& g, std::ostream& out) {
  out << integrated.cols() << ' ' << integrated.rows() << '\n';
  std::ostringstream line;
  line.precision(9);
  for (std::uint32_t v = 0; v < integrated.cols(); ++v) {
    line.str("");
    line << utf8_encode(g.character(v));
    for (Eigen::Index i = 0; i < integrated.rows(); ++i) line << ' ' << integrated(i, v);
    out << line.str() << '\n';
  }
}

VfgeModel train_vfge(const VariationGraph& g, const VfgeConfig& config) {
  config.walks.validate();
  return train_vfge(generate_walks(g, config.walks), g.vertex_count(), config);
}

VfgeModel train_vfge(WalkCorpus corpus, std::size_t vocabulary, const VfgeConfig& config) {
  config.families.validate();
  config.skipgram.validate();
  if (config.rounds < 1) throw ValidationError("rounds must be at least 1");
  if (corpus.walks.empty()) throw ValidationError("graph has no edges; no walks to learn from");
  VfgeModel m;
  m.corpus = std::move(corpus);
  Rng rng(config.families.seed);
  m.state = initialize_families(m.corpus, vocabulary, config.families, rng);
  m.embeddings = init_pair_embeddings(vocabulary, config.families.families,
                                      config.skipgram.dim, config.skipgram.seed);
  for (std::size_t round = 0; round < config.rounds; ++round) {
    for (std::size_t s = 0; s < config.families.sweeps; ++s) gibbs_sweep(m.state, m.corpus, rng);
    SkipGramConfig sg = config.skipgram;
    sg.seed = config.skipgram.seed + round;
    train_pair_skipgram(m.embeddings, m.corpus, m.state, sg, &m.report);
  }
  return m;
}

}  // namespace ripple::vfge
