#pragma once

#include "ripple/graph.hpp"
#include "ripple/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

// Variation family-enhanced graph embedding: hierarchical random walks,
// collapsed Gibbs family assignment, character-family pair skip-gram and the
// family-enhanced integration of the two embedding tables.
namespace ripple::vfge {

using Walk = std::vector<std::uint32_t>;

struct WalkConfig {
  std::size_t walks_per_vertex = 10;
  std::size_t walk_length = 80;
  std::uint64_t seed = 1;

  void validate() const;
};

struct WalkCorpus {
  std::vector<Walk> walks;
  std::size_t walks_per_vertex = 0;
  std::size_t walk_length = 0;
  std::uint64_t seed = 0;

  std::size_t token_count() const;
  bool operator==(const WalkCorpus&) const = default;
};

struct Step {
  std::uint32_t vertex;
  EdgeType type;
};

// One hierarchical step from `from`: an edge type is chosen in proportion to
// the vertex's total incident weight of that type, then a neighbor within the
// type in proportion to edge weight. `from` must have at least one edge.
Step hierarchical_step(const VariationGraph& g, std::uint32_t from, Rng& rng);

// Walks start from every non-isolated vertex, `walks_per_vertex` times. Walk
// (vertex v, round r) draws from its own RNG stream, so the corpus only
// depends on the seed.
WalkCorpus generate_walks(const VariationGraph& g, const WalkConfig& config);

void save_walks(const WalkCorpus& corpus, const std::filesystem::path& path);
WalkCorpus load_walks(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Family assignment

struct FamilyConfig {
  std::size_t families = 500;
  double alpha = 0.0;  // <= 0 selects 50 / families
  double eta = 0.01;
  std::size_t sweeps = 200;
  std::uint64_t seed = 1;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(families); }
  void validate() const;
};

// Collapsed Gibbs state. Walks play the role of documents and vertices the
// role of words.
struct FamilyState {
  std::size_t families = 0;
  std::size_t vocabulary = 0;
  double alpha = 0.0;
  double eta = 0.0;
  std::vector<std::vector<std::uint32_t>> assignment;  // z, per walk token
  std::vector<std::uint32_t> walk_family;              // n_dk, walks x families
  std::vector<std::uint32_t> family_vertex;            // n_kw, families x vocabulary
  std::vector<std::uint32_t> family_total;             // n_k

  std::uint32_t n_dk(std::size_t walk, std::size_t k) const { return walk_family[walk * families + k]; }
  std::uint32_t n_kw(std::size_t k, std::size_t v) const { return family_vertex[k * vocabulary + v]; }

  bool operator==(const FamilyState&) const = default;
};

// Unnormalized collapsed conditional for one token, with the token itself
// already removed from the counts:
//   w_k = (n_dk + alpha) * (n_kw + eta) / (n_k + V * eta)
// All three spans have one entry per family.
void family_weights(std::span<const double> walk_counts, std::span<const double> vertex_counts,
                    std::span<const double> family_totals, std::size_t vocabulary, double alpha,
                    double eta, std::span<double> out);

// Uniform random initialization followed by `config.sweeps` sweeps.
FamilyState gibbs_assign(const WalkCorpus& corpus, std::size_t vocabulary,
                         const FamilyConfig& config);

FamilyState initialize_families(const WalkCorpus& corpus, std::size_t vocabulary,
                                const FamilyConfig& config, Rng& rng);
void gibbs_sweep(FamilyState& state, const WalkCorpus& corpus, Rng& rng);

// Checks n_dk row sums against walk lengths, n_kw row sums against n_k, and
// that the tables match the assignment vector.
bool counts_consistent(const FamilyState& state, const WalkCorpus& corpus);

// Pr(F_k | c) from the family-vertex counts and family prevalence.
std::vector<double> family_posterior(const FamilyState& state, std::uint32_t vertex);
std::uint32_t dominant_family(const FamilyState& state, std::uint32_t vertex);

void save_families(const FamilyState& state, const std::filesystem::path& path);
FamilyState load_families(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Character-family pair skip-gram

struct PairEmbeddings {
  std::size_t dim = 0;
  Eigen::MatrixXd char_in;   // d x |C|, one column per character
  Eigen::MatrixXd char_out;  // d x |C|
  Eigen::MatrixXd fam_in;    // d x K
  Eigen::MatrixXd fam_out;   // d x K

  std::size_t vocabulary() const { return static_cast<std::size_t>(char_in.cols()); }
  std::size_t families() const { return static_cast<std::size_t>(fam_in.cols()); }

  // [C_c ; F_f] on the input side, dimension 2d.
  Eigen::VectorXd center(std::uint32_t c, std::uint32_t f) const;
  // [C'_c ; F'_f] on the output side.
  Eigen::VectorXd context(std::uint32_t c, std::uint32_t f) const;

  bool operator==(const PairEmbeddings& other) const;
};

struct SkipGramConfig {
  std::size_t dim = 128;
  std::size_t window = 5;
  std::size_t negatives = 5;
  double learning_rate = 0.025;
  std::size_t epochs = 1;
  std::uint64_t seed = 1;
  // 1 = deterministic single-threaded; > 1 = lock-free updates over walk
  // shards, not reproducible.
  std::size_t threads = 1;

  void validate() const;
};

// Input tables uniform in +-0.5/d, output tables zero.
PairEmbeddings init_pair_embeddings(std::size_t vocabulary, std::size_t families, std::size_t dim,
                                    std::uint64_t seed);

struct CharFamily {
  std::uint32_t character;
  std::uint32_t family;
};

struct PairSample {
  CharFamily center;
  CharFamily context;
  std::vector<CharFamily> negatives;
};

// Sparse gradient of the negative-sampling loss of one sample:
//   -log s(u_ctx . h) - sum_neg log s(-u_neg . h),  h = center(), u = context()
struct PairGradient {
  Eigen::VectorXd center;                                  // d/dh, 2d
  std::vector<std::pair<CharFamily, Eigen::VectorXd>> outputs;  // d/du per output pair
};

double pair_loss(const PairEmbeddings& emb, const PairSample& sample);
double pair_loss_and_gradient(const PairEmbeddings& emb, const PairSample& sample,
                              PairGradient& grad);

// Full softmax over every character paired with its dominant family, for a
// given center pair. Entries sum to one.
std::vector<double> pair_softmax(const PairEmbeddings& emb, const FamilyState& state,
                                 CharFamily center);

struct SkipGramReport {
  std::vector<double> epoch_loss;  // mean sample loss per epoch
};

PairEmbeddings train_pair_skipgram(const WalkCorpus& corpus, const FamilyState& state,
                                   const SkipGramConfig& config,
                                   SkipGramReport* report = nullptr);

// Continues training existing embeddings (alternating assign/embed rounds).
void train_pair_skipgram(PairEmbeddings& emb, const WalkCorpus& corpus, const FamilyState& state,
                         const SkipGramConfig& config, SkipGramReport* report = nullptr);

// G_c = [C_c ; sum_k Pr(F_k|c) F_k], dimension 2d.
Eigen::VectorXd integrate(const PairEmbeddings& emb, const FamilyState& state,
                          std::uint32_t vertex);
Eigen::MatrixXd integrate_all(const PairEmbeddings& emb, const FamilyState& state);

struct Similar {
  std::uint32_t vertex;
  double score;
};

// Top-k by cosine similarity of integrated vectors, excluding the query.
std::vector<Similar> nearest(const PairEmbeddings& emb, const FamilyState& state,
                             std::uint32_t vertex, std::size_t k);
std::vector<Similar> nearest(const Eigen::MatrixXd& integrated, std::uint32_t vertex,
                             std::size_t k);

void save_embeddings(const PairEmbeddings& emb, const std::filesystem::path& path);
PairEmbeddings load_embeddings(const std::filesystem::path& path);

// word2vec-style text export of the integrated vectors: a "count dim" line,
// then "char v1 ... vn" per character.
void export_text(const Eigen::MatrixXd& integrated, const VariationGraph& g, std::ostream& out);

// ---------------------------------------------------------------------------

struct VfgeConfig {
  WalkConfig walks;
  FamilyConfig families;
  SkipGramConfig skipgram;
  std::size_t rounds = 1;  // alternating assign -> embed rounds
};

struct VfgeModel {
  WalkCorpus corpus;
  FamilyState state;
  PairEmbeddings embeddings;
  SkipGramReport report;  // epoch losses over all rounds
};

VfgeModel train_vfge(const VariationGraph& g, const VfgeConfig& config);
// Same, from an existing walk corpus over `vocabulary` vertices.
VfgeModel train_vfge(WalkCorpus corpus, std::size_t vocabulary, const VfgeConfig& config);

}  // namespace ripple::vfge
