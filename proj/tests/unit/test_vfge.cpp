#include "helpers.hpp"

#include "ripple/errors.hpp"
#include "ripple/vfge.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace ripple;
using namespace ripple::vfge;

namespace {

// Two disjoint cliques of `size` vertices each, unit weights, one type.
VariationGraph two_cliques(std::size_t size) {
  std::vector<char32_t> chars(2 * size);
  for (std::size_t i = 0; i < chars.size(); ++i) chars[i] = static_cast<char32_t>(0x4E00 + i);
  VariationGraph g(chars);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = i + 1; j < size; ++j)
        g.add_edge(static_cast<std::uint32_t>(c * size + i), static_cast<std::uint32_t>(c * size + j),
                   EdgeType::Stroke, 1.0);
  return g;
}

// Fraction of same-clique token pairs that share a family. Invariant under
// relabeling, so the optimal relabeling is implicit.
double co_assignment_purity(const FamilyState& s, const WalkCorpus& corpus, std::size_t clique_size) {
  std::map<std::pair<int, std::uint32_t>, double> counts;  // (clique, family) -> tokens
  std::map<int, double> totals;
  for (std::size_t d = 0; d < corpus.walks.size(); ++d)
    for (std::size_t i = 0; i < corpus.walks[d].size(); ++i) {
      const int clique = corpus.walks[d][i] < clique_size ? 0 : 1;
      counts[{clique, s.assignment[d][i]}] += 1;
      totals[clique] += 1;
    }
  double same = 0, pairs = 0;
  for (const auto& [key, n] : counts) same += n * (n - 1) / 2;
  for (const auto& [c, n] : totals) pairs += n * (n - 1) / 2;
  return same / pairs;
}

// Token purity under the better of the two family-to-clique labelings.
double relabeled_purity(const FamilyState& s, const WalkCorpus& corpus, std::size_t clique_size) {
  std::size_t agree = 0, total = 0;
  for (std::size_t d = 0; d < corpus.walks.size(); ++d)
    for (std::size_t i = 0; i < corpus.walks[d].size(); ++i) {
      const std::uint32_t clique = corpus.walks[d][i] < clique_size ? 0 : 1;
      agree += s.assignment[d][i] == clique;
      ++total;
    }
  const double p = static_cast<double>(agree) / static_cast<double>(total);
  return std::max(p, 1.0 - p);
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

// Naive posterior straight from the stated formula.
std::vector<double> posterior_oracle(const FamilyState& s, std::uint32_t v) {
  std::vector<double> p(s.families);
  double prior_total = 0;
  for (std::size_t k = 0; k < s.families; ++k) prior_total += s.family_total[k] + s.alpha;
  double z = 0;
  for (std::size_t k = 0; k < s.families; ++k) {
    p[k] = (s.n_kw(k, v) + s.eta) / (s.family_total[k] + s.vocabulary * s.eta) *
           ((s.family_total[k] + s.alpha) / prior_total);
    z += p[k];
  }
  for (double& x : p) x /= z;
  return p;
}

FamilyState hand_state(std::size_t families, std::size_t vocab, const std::vector<std::uint32_t>& fv) {
  FamilyState s;
  s.families = families;
  s.vocabulary = vocab;
  s.alpha = 1.0;
  s.eta = 1.0;
  s.family_vertex = fv;
  s.family_total.assign(families, 0);
  for (std::size_t k = 0; k < families; ++k)
    for (std::size_t v = 0; v < vocab; ++v) s.family_total[k] += fv[k * vocab + v];
  return s;
}

}  // namespace

TEST_SUITE("vfge") {

TEST_CASE("path graph walks alternate") {
  VariationGraph g({U'A', U'B'});
  g.add_edge(0, 1, EdgeType::Pinyin, 0.9);
  const auto c = generate_walks(g, {4, 3, 1});
  REQUIRE(c.walks.size() == 8);
  for (const auto& w : c.walks) {
    REQUIRE(w.size() == 3);
    CHECK(w[0] != w[1]);
    CHECK(w[0] == w[2]);
  }
}

TEST_CASE("walks skip isolated vertices and follow edges") {
  VariationGraph none({U'A', U'B', U'C'});
  CHECK(generate_walks(none, {10, 80, 1}).walks.empty());

  const auto g = two_cliques(5);
  VariationGraph with_isolated(std::vector<char32_t>{U'x', U'y', U'z'});
  with_isolated.add_edge(0, 1, EdgeType::Zhengma, 0.6);
  CHECK(generate_walks(with_isolated, {3, 5, 1}).walks.size() == 6);

  const auto c = generate_walks(g, {10, 20, 4});
  CHECK(c.walks.size() == 100);
  CHECK(c.token_count() == 2000);
  for (const auto& w : c.walks)
    for (std::size_t i = 1; i < w.size(); ++i) REQUIRE(g.weight(w[i - 1], w[i], EdgeType::Stroke).has_value());
}

TEST_CASE("hierarchical step picks the type by incident weight") {
  // center 0: pinyin edge 0.9, stroke edge 0.1
  VariationGraph g({U'c', U'p', U's'});
  g.add_edge(0, 1, EdgeType::Pinyin, 0.9);
  g.add_edge(0, 2, EdgeType::Stroke, 0.1);
  Rng rng(42);
  int pinyin = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Step s = hierarchical_step(g, 0, rng);
    pinyin += s.type == EdgeType::Pinyin;
    REQUIRE(s.vertex == (s.type == EdgeType::Pinyin ? 1u : 2u));
  }
  CHECK(std::abs(pinyin / static_cast<double>(n) - 0.9) < 0.02);
}

TEST_CASE("within a type the neighbor follows edge weight") {
  VariationGraph g({U'c', U'a', U'b'});
  g.add_edge(0, 1, EdgeType::Stroke, 0.75);
  g.add_edge(0, 2, EdgeType::Stroke, 0.25);
  Rng rng(1);
  int a = 0;
  for (int i = 0; i < 40000; ++i) a += hierarchical_step(g, 0, rng).vertex == 1;
  CHECK(std::abs(a / 40000.0 - 0.75) < 0.01);
}

TEST_CASE("walks are bit-identical for a seed and persist exactly") {
  const auto g = two_cliques(6);
  const auto a = generate_walks(g, {5, 30, 9});
  const auto b = generate_walks(g, {5, 30, 9});
  CHECK(a == b);
  CHECK_FALSE(a == generate_walks(g, {5, 30, 10}));
  testutil::TempDir dir("walks");
  save_walks(a, dir.path() / "w.bin");
  CHECK(load_walks(dir.path() / "w.bin") == a);
}

TEST_CASE("collapsed conditional hand case") {
  const std::vector<double> ndk{2, 0}, nkw{1, 0}, nk{3, 0};
  std::vector<double> w(2);
  family_weights(ndk, nkw, nk, 4, 1.0, 1.0, w);
  CHECK(w[0] == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w[0] / (w[0] + w[1]) == doctest::Approx(0.774).epsilon(1e-3));
}

TEST_CASE("single family assigns everything to zero") {
  const auto g = two_cliques(4);
  const auto c = generate_walks(g, {3, 10, 2});
  FamilyConfig fc;
  fc.families = 1;
  fc.sweeps = 5;
  const auto s = gibbs_assign(c, g.vertex_count(), fc);
  for (const auto& z : s.assignment)
    for (auto k : z) REQUIRE(k == 0);
  CHECK(counts_consistent(s, c));
  const auto p = family_posterior(s, 0);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == 1.0);
}

TEST_CASE("gibbs recovers planted cliques") {
  const auto g = two_cliques(8);
  const auto c = generate_walks(g, {10, 40, 5});
  FamilyConfig fc;
  fc.families = 2;
  fc.sweeps = 200;
  fc.seed = 3;
  const auto s = gibbs_assign(c, g.vertex_count(), fc);
  CHECK(counts_consistent(s, c));
  CHECK(co_assignment_purity(s, c, 8) >= 0.9);
  CHECK(relabeled_purity(s, c, 8) >= 0.9);
}

TEST_CASE("counts stay consistent after every sweep") {
  const auto g = two_cliques(5);
  const auto c = generate_walks(g, {4, 15, 8});
  FamilyConfig fc;
  fc.families = 3;
  Rng rng(4);
  auto s = initialize_families(c, g.vertex_count(), fc, rng);
  CHECK(counts_consistent(s, c));
  for (int i = 0; i < 10; ++i) {
    gibbs_sweep(s, c, rng);
    REQUIRE(counts_consistent(s, c));
  }
}

TEST_CASE("gibbs is reproducible") {
  const auto g = two_cliques(5);
  const auto c = generate_walks(g, {4, 15, 8});
  FamilyConfig fc;
  fc.families = 4;
  fc.sweeps = 20;
  CHECK(gibbs_assign(c, g.vertex_count(), fc) == gibbs_assign(c, g.vertex_count(), fc));
}

TEST_CASE("family config validation") {
  FamilyConfig fc;
  fc.families = 0;
  CHECK_THROWS_AS(fc.validate(), ValidationError);
  fc.families = 2;
  fc.eta = 0.0;
  CHECK_THROWS_AS(fc.validate(), ValidationError);
  fc.eta = 0.01;
  fc.alpha = -1.0;
  CHECK_THROWS_AS(fc.validate(), ValidationError);
  fc.alpha = 0.0;
  CHECK(fc.resolved_alpha() == 25.0);
}

TEST_CASE("family posterior matches the formula and normalizes") {
  // K = 2, |C| = 4, character 1 counted as in the conditional hand case
  const auto s = hand_state(2, 4, {1, 1, 0, 1, 0, 0, 0, 0});
  for (std::uint32_t v = 0; v < 4; ++v) {
    const auto p = family_posterior(s, v);
    const auto o = posterior_oracle(s, v);
    double sum = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(p[k] == doctest::Approx(o[k]).epsilon(1e-12));
      CHECK(p[k] >= 0.0);
      sum += p[k];
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  // character 1: (2/7)(4/5) vs (1/4)(1/5)
  const double a = (2.0 / 7.0) * (4.0 / 5.0), b = (1.0 / 4.0) * (1.0 / 5.0);
  CHECK(family_posterior(s, 1)[0] == doctest::Approx(a / (a + b)).epsilon(1e-12));
}

TEST_CASE("posterior concentrates as eta shrinks") {
  auto s = hand_state(3, 2, {5, 0, 0, 3, 0, 4});
  s.eta = 1e-9;
  s.alpha = 1e-9;
  CHECK(family_posterior(s, 0)[0] > 1.0 - 1e-6);
  CHECK(dominant_family(s, 0) == 0);
}

TEST_CASE("integration hand case") {
  PairEmbeddings e;
  e.dim = 2;
  e.char_in = Eigen::MatrixXd(2, 1);
  e.char_in << 1, 0;
  e.char_out = Eigen::MatrixXd::Zero(2, 1);
  e.fam_in = Eigen::MatrixXd(2, 2);
  e.fam_in << 0, 2, 1, 3;
  e.fam_out = Eigen::MatrixXd::Zero(2, 2);
  const auto s = hand_state(2, 1, {3, 3});
  const Eigen::VectorXd gv = integrate(e, s, 0);
  REQUIRE(gv.size() == 4);
  CHECK(gv(0) == doctest::Approx(1.0));
  CHECK(gv(1) == doctest::Approx(0.0));
  CHECK(gv(2) == doctest::Approx(1.0));
  CHECK(gv(3) == doctest::Approx(2.0));

  auto point = hand_state(2, 1, {3, 3});
  point.family_vertex = {6, 0};
  point.family_total = {6, 0};
  point.eta = 1e-12;
  point.alpha = 1e-12;
  const Eigen::VectorXd pv = integrate(e, point, 0);
  CHECK(pv(2) == doctest::Approx(0.0));
  CHECK(pv(3) == doctest::Approx(1.0));
}

TEST_CASE("pair softmax normalizes by full enumeration") {
  for (std::size_t vocab : {3, 17, 50}) {
    for (std::size_t families : {1, 3, 5}) {
      Rng rng(vocab * 10 + families);
      PairEmbeddings e = init_pair_embeddings(vocab, families, 4, vocab + families);
      e.char_out = testutil::random_matrix(4, static_cast<Eigen::Index>(vocab), rng);
      e.fam_out = testutil::random_matrix(4, static_cast<Eigen::Index>(families), rng);
      FamilyState s;
      s.families = families;
      s.vocabulary = vocab;
      s.alpha = 0.5;
      s.eta = 0.01;
      s.family_vertex.resize(families * vocab);
      s.family_total.assign(families, 0);
      for (std::size_t k = 0; k < families; ++k)
        for (std::size_t v = 0; v < vocab; ++v) {
          s.family_vertex[k * vocab + v] = static_cast<std::uint32_t>(rng.below(5));
          s.family_total[k] += s.family_vertex[k * vocab + v];
        }
      for (std::uint32_t c = 0; c < vocab; ++c)
        for (std::uint32_t f = 0; f < families; ++f) {
          const auto p = pair_softmax(e, s, {c, f});
          REQUIRE(p.size() == vocab);
          double sum = 0;
          for (double x : p) sum += x;
          REQUIRE(std::abs(sum - 1.0) < 1e-6);
        }
    }
  }
}

TEST_CASE("pair loss gradient matches finite differences") {
  Rng rng(77);
  for (int point = 0; point < 100; ++point) {
    const std::size_t d = 1 + rng.below(8), vocab = 2 + rng.below(6), fam = 1 + rng.below(4);
    PairEmbeddings e;
    e.dim = d;
    const auto D = static_cast<Eigen::Index>(d);
    e.char_in = testutil::random_matrix(D, static_cast<Eigen::Index>(vocab), rng);
    e.char_out = testutil::random_matrix(D, static_cast<Eigen::Index>(vocab), rng);
    e.fam_in = testutil::random_matrix(D, static_cast<Eigen::Index>(fam), rng);
    e.fam_out = testutil::random_matrix(D, static_cast<Eigen::Index>(fam), rng);
    auto pick = [&] { return CharFamily{static_cast<std::uint32_t>(rng.below(vocab)), static_cast<std::uint32_t>(rng.below(fam))}; };
    PairSample sample{pick(), pick(), {}};
    for (std::size_t n = 0, m = 1 + rng.below(5); n < m; ++n) sample.negatives.push_back(pick());

    PairGradient grad;
    const double loss = pair_loss_and_gradient(e, sample, grad);
    CHECK(loss == doctest::Approx(pair_loss(e, sample)).epsilon(1e-12));

    const auto f = [&] { return pair_loss(e, sample); };
    // analytic gradients scattered onto the four tables
    Eigen::MatrixXd g_ci = Eigen::MatrixXd::Zero(e.char_in.rows(), e.char_in.cols());
    Eigen::MatrixXd g_fi = Eigen::MatrixXd::Zero(e.fam_in.rows(), e.fam_in.cols());
    Eigen::MatrixXd g_co = Eigen::MatrixXd::Zero(e.char_out.rows(), e.char_out.cols());
    Eigen::MatrixXd g_fo = Eigen::MatrixXd::Zero(e.fam_out.rows(), e.fam_out.cols());
    g_ci.col(sample.center.character) += grad.center.head(D);
    g_fi.col(sample.center.family) += grad.center.tail(D);
    for (const auto& [cf, v] : grad.outputs) {
      g_co.col(cf.character) += v.head(D);
      g_fo.col(cf.family) += v.tail(D);
    }
    REQUIRE(testutil::relative_error(g_ci, testutil::numeric_gradient(e.char_in, f)) < 1e-4);
    REQUIRE(testutil::relative_error(g_fi, testutil::numeric_gradient(e.fam_in, f)) < 1e-4);
    REQUIRE(testutil::relative_error(g_co, testutil::numeric_gradient(e.char_out, f)) < 1e-4);
    REQUIRE(testutil::relative_error(g_fo, testutil::numeric_gradient(e.fam_out, f)) < 1e-4);
  }
}

TEST_CASE("zero epochs leave the seeded initialization") {
  const auto g = two_cliques(4);
  const auto c = generate_walks(g, {2, 10, 1});
  FamilyConfig fc;
  fc.families = 2;
  fc.sweeps = 2;
  const auto s = gibbs_assign(c, g.vertex_count(), fc);
  SkipGramConfig sc;
  sc.dim = 6;
  sc.epochs = 0;
  sc.seed = 12;
  CHECK(train_pair_skipgram(c, s, sc) == init_pair_embeddings(g.vertex_count(), 2, 6, 12));
  CHECK(init_pair_embeddings(g.vertex_count(), 2, 6, 12).char_out.isZero());
}

namespace {

std::pair<double, double> clique_cosines(const Eigen::MatrixXd& m, std::uint32_t size) {
  double within = 0, across = 0;
  int nw = 0, na = 0;
  for (std::uint32_t u = 0; u < 2 * size; ++u)
    for (std::uint32_t v = u + 1; v < 2 * size; ++v) {
      const double c = cosine(m.col(u), m.col(v));
      if ((u < size) == (v < size)) within += c, ++nw;
      else across += c, ++na;
    }
  return {within / nw, across / na};
}

VfgeModel clique_model(std::size_t families) {
  VfgeConfig cfg;
  cfg.walks = {10, 40, 2};
  cfg.families.families = families;
  cfg.families.sweeps = 50;
  cfg.skipgram.dim = 16;
  cfg.skipgram.epochs = 3;
  return train_vfge(two_cliques(8), cfg);
}

}  // namespace

TEST_CASE("character vectors separate planted cliques") {
  // one family: the character channel has to carry the clique structure
  const auto m = clique_model(1);
  const auto [within, across] = clique_cosines(m.embeddings.char_in, 8);
  CHECK(within - across >= 0.2);
}

TEST_CASE("integrated vectors separate planted cliques") {
  // two families line up with the cliques and absorb most of the signal
  const auto m = clique_model(2);
  const auto [within, across] = clique_cosines(integrate_all(m.embeddings, m.state), 8);
  CHECK(within - across >= 0.2);
  for (std::uint32_t u = 0; u < 16; ++u) {
    const auto top = nearest(m.embeddings, m.state, u, 3);
    REQUIRE(top.size() == 3);
    for (const auto& s : top) {
      CHECK(s.vertex != u);
      CHECK((s.vertex < 8) == (u < 8));
    }
  }
}

TEST_CASE("nearest excludes the query, clamps k and breaks ties by index") {
  Eigen::MatrixXd m(2, 4);
  m << 1, 1, 1, 0,
       0, 0, 0, 1;
  const auto r = nearest(m, 1, 10);
  REQUIRE(r.size() == 3);
  CHECK(r[0].vertex == 0);
  CHECK(r[1].vertex == 2);
  CHECK(r[2].vertex == 3);
  CHECK_THROWS(nearest(m, 9, 1));
  CHECK_THROWS_AS(nearest(m, 0, 0), ValidationError);
}

TEST_CASE("embedding persistence and text export") {
  const auto g = two_cliques(3);
  VfgeConfig cfg;
  cfg.walks = {2, 10, 1};
  cfg.families.families = 2;
  cfg.families.sweeps = 3;
  cfg.skipgram.dim = 4;
  const auto m = train_vfge(g, cfg);
  testutil::TempDir dir("vfge_io");
  save_embeddings(m.embeddings, dir.path() / "e.bin");
  CHECK(load_embeddings(dir.path() / "e.bin") == m.embeddings);
  save_families(m.state, dir.path() / "f.bin");
  CHECK(load_families(dir.path() / "f.bin") == m.state);

  std::ostringstream out;
  export_text(integrate_all(m.embeddings, m.state), g, out);
  std::istringstream in(out.str());
  std::size_t count = 0, dim = 0;
  in >> count >> dim;
  CHECK(count == 6);
  CHECK(dim == 8);
}

}
