#include "helpers.hpp"

#include "ripple/classifier.hpp"
#include "ripple/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace ripple;
using namespace ripple::classifier;

namespace {

ConvConfig tiny(std::vector<std::size_t> widths, std::size_t filters, double dropout = 0.0) {
  ConvConfig c;
  c.widths = std::move(widths);
  c.filters = filters;
  c.dropout = dropout;
  c.init_scale = 0.5;
  return c;
}

void zero_all(ConvClassifier& m) {
  for (Param* p : m.parameters()) p->value.setZero();
}

// Marker task: token 0 only in spam, tokens 1..5 anywhere.
std::vector<Example> marker_set(std::size_t n, Rng& rng) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    e.label = i % 2 ? kSpam : kNormal;
    const std::size_t len = 3 + rng.below(6);
    for (std::size_t k = 0; k < len; ++k) e.tokens.push_back(1 + static_cast<std::uint32_t>(rng.below(5)));
    if (e.label == kSpam) e.tokens[rng.below(len)] = 0;
    out.push_back(std::move(e));
  }
  return out;
}

Confusion confusion_oracle(const std::vector<int>& truth, const std::vector<int>& pred) {
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] && pred[i]) ++c.tp;
    if (!truth[i] && pred[i]) ++c.fp;
    if (truth[i] && !pred[i]) ++c.fn;
    if (!truth[i] && !pred[i]) ++c.tn;
  }
  return c;
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("shapes") {
  const ConvClassifier m(6, ConvConfig{});
  CHECK(m.feature_dim() == 3 * 128);
  CHECK(m.max_width() == 5);
  Rng rng(1);
  CHECK(m.logits(testutil::random_matrix(6, 9, rng)).size() == 2);
  CHECK_THROWS_AS(m.logits(Matrix::Zero(5, 9)), ValidationError);
  CHECK_THROWS_AS(m.logits(Matrix::Zero(6, 0)), ValidationError);
  ConvConfig bad;
  bad.widths.clear();
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("zero parameters give one half") {
  ConvClassifier m(4, tiny({3, 4, 5}, 8));
  zero_all(m);
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto p = classify(m, testutil::random_matrix(4, 1 + rng.below(12), rng));
    CHECK(p.spam_probability == 0.5);
    CHECK(p.label == kNormal);  // tie
  }
}

TEST_CASE("short sequences are padded") {
  const ConvClassifier m(3, tiny({3, 4, 5}, 4));
  Rng rng(3);
  const Matrix x = testutil::random_matrix(3, 2, rng);
  Matrix padded = Matrix::Zero(3, 5);
  padded.leftCols(2) = x;
  CHECK(m.logits(x) == m.logits(padded));
}

TEST_CASE("hand convolution on a one-dimensional toy") {
  ConvClassifier m(1, tiny({2}, 1));
  zero_all(m);
  m.conv_weight[0].value << 1.0, -2.0;  // y_p = x_p - 2 x_{p+1}
  m.conv_bias[0].value << 0.5;
  m.dense_weight.value << 0.0, 1.0;
  Matrix x(1, 4);
  x << 3.0, 1.0, 0.0, 2.0;
  // windows: 3-2+0.5 = 1.5, 1-0+0.5 = 1.5, 0-4+0.5 = -3.5
  const Vector z = m.logits(x);
  CHECK(z(0) == 0.0);
  CHECK(z(1) == doctest::Approx(1.5));
  x << 5.0, 1.0, 0.0, 2.0;
  CHECK(m.logits(x)(1) == doctest::Approx(3.5));
}

TEST_CASE("softmax properties") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    Vector z = testutil::random_matrix(2, 1, rng, 30.0);
    const Vector p = softmax(z);
    CHECK(std::abs(p.sum() - 1.0) < 1e-9);
    CHECK(p.minCoeff() > 0.0);
    CHECK(p.maxCoeff() < 1.0 + 1e-15);
  }
  Vector big(2);
  big << 1000.0, 999.0;
  CHECK(softmax(big)(0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("metrics from the confusion matrix") {
  const EvalReport r = report_from_confusion({4, 1, 3, 2});
  CHECK(r.precision == doctest::Approx(0.8));
  CHECK(r.recall == doctest::Approx(4.0 / 7.0));
  CHECK(r.f1 == doctest::Approx(2 * 0.8 * (4.0 / 7.0) / (0.8 + 4.0 / 7.0)));
  CHECK(r.f1 == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(r.accuracy == doctest::Approx(0.6));

  const EvalReport perfect = report_from_confusion({5, 0, 0, 5});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.f1 == 1.0);
  const EvalReport none = report_from_confusion({0, 0, 0, 7});
  CHECK(none.f1 == 0.0);
  CHECK(none.accuracy == 1.0);

  const std::string kv = format_report_kv(r, "x.");
  CHECK(kv.find("x.accuracy=") != std::string::npos);
  CHECK(kv.find("x.tp=4") != std::string::npos);
  CHECK_FALSE(format_report(r).empty());
}

TEST_CASE("evaluate agrees with an independent confusion oracle") {
  Rng rng(5);
  const ConvClassifier m(3, tiny({2, 3}, 4));
  Matrix table = testutil::random_matrix(3, 6, rng);
  TableEncoder enc(table);
  const auto data = marker_set(60, rng);
  std::vector<int> truth, pred;
  Rng unused(0);
  for (const auto& e : data) {
    truth.push_back(e.label == kSpam);
    pred.push_back(classify(m, enc.encode(e.tokens, false, unused)).label == kSpam);
  }
  const EvalReport r = evaluate(m, enc, data);
  CHECK(r.confusion == confusion_oracle(truth, pred));
  CHECK(r.confusion.total() == 60);
  CHECK_THROWS_AS(evaluate(m, enc, std::span<const Example>{}), ValidationError);
}

TEST_CASE("classifier gradients match finite differences") {
  Rng rng(6);
  for (int point = 0; point < 100; ++point) {
    const std::size_t D = 1 + rng.below(4);
    ConvConfig c = tiny({1 + rng.below(3), 2 + rng.below(2)}, 1 + rng.below(3));
    c.seed = rng.next();
    ConvClassifier m(D, c);
    // random biases keep padded windows off the ReLU corner
    for (Param* p : m.parameters()) p->value = testutil::random_matrix(p->value.rows(), p->value.cols(), rng, 0.5);
    Matrix x = testutil::random_matrix(static_cast<Eigen::Index>(D), 1 + rng.below(6), rng);
    const Vector r = testutil::random_matrix(2, 1, rng);
    const auto loss = [&] { return m.logits(x).dot(r); };
    ConvTape tape;
    m.logits(x, false, nullptr, &tape);
    for (Param* p : m.parameters()) p->zero_grad();
    const Matrix dx = m.backward(tape, r, static_cast<std::size_t>(x.cols()));
    REQUIRE(dx.cols() == x.cols());
    for (Param* p : m.parameters()) {
      INFO(p->name);
      REQUIRE(testutil::relative_error(p->grad, testutil::numeric_gradient(p->value, loss)) < 1e-4);
    }
    REQUIRE(testutil::relative_error(dx, testutil::numeric_gradient(x, loss)) < 1e-4);
  }
}

TEST_CASE("marker task is learned") {
  Rng rng(7);
  const auto data = marker_set(80, rng);
  ConvClassifier m(4, tiny({1, 2}, 6));
  TableEncoder enc(testutil::random_matrix(4, 6, rng));
  TrainConfig tc;
  tc.batch = 80;
  tc.epochs = 60;
  tc.learning_rate = 0.02;
  const auto result = train_classifier(m, enc, data, tc);
  REQUIRE(result.epoch_loss.size() == 60);
  for (std::size_t e = 1; e < result.epoch_loss.size(); ++e) CHECK(result.epoch_loss[e] <= result.epoch_loss[e - 1] + 1e-12);
  const EvalReport r = evaluate(m, enc, data);
  CHECK(r.accuracy == 1.0);
}

TEST_CASE("zero epochs and determinism") {
  Rng rng(8);
  const auto data = marker_set(30, rng);
  const Matrix table = testutil::random_matrix(3, 6, rng);
  ConvClassifier a(3, tiny({2, 3}, 4, 0.1));
  const ConvClassifier init = a;
  TableEncoder enc(table);
  TrainConfig tc;
  tc.epochs = 0;
  CHECK(train_classifier(a, enc, data, tc).epoch_loss.empty());
  for (std::size_t i = 0; i < a.conv_weight.size(); ++i) CHECK(a.conv_weight[i].value == init.conv_weight[i].value);
  CHECK(a.dense_weight.value == init.dense_weight.value);

  tc.epochs = 4;
  tc.batch = 8;
  ConvClassifier b = init, c = init;
  const auto rb = train_classifier(b, enc, data, tc);
  const auto rc = train_classifier(c, enc, data, tc);
  CHECK(rb.epoch_loss == rc.epoch_loss);
  CHECK(b.dense_weight.value == c.dense_weight.value);
  CHECK_THROWS_AS(train_classifier(b, enc, std::span<const Example>{}, tc), ValidationError);
}

TEST_CASE("serialization round trip") {
  ConvClassifier m(3, tiny({2, 4}, 5));
  BinaryWriter w;
  m.write(w);
  BinaryReader r(w.bytes());
  const ConvClassifier back = ConvClassifier::read(r);
  CHECK(back.widths() == m.widths());
  CHECK(back.dense_weight.value == m.dense_weight.value);
  Rng rng(9);
  const Matrix x = testutil::random_matrix(3, 7, rng);
  CHECK(back.logits(x) == m.logits(x));
}

}
