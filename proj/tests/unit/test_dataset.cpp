#include "helpers.hpp"

#include "ripple/dataset.hpp"
#include "ripple/errors.hpp"
#include "ripple/graph.hpp"
#include "ripple/mutation.hpp"
#include "ripple/skipgram.hpp"
#include "ripple/synthetic.hpp"
#include "ripple/text.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace ripple;
using classifier::kNormal;
using classifier::kSpam;

namespace {

LabeledText spam(std::u32string t) { return {kSpam, std::move(t)}; }
LabeledText normal(std::u32string t) { return {kNormal, std::move(t)}; }

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("dataset parsing and round trip") {
  std::istringstream in("spam\t加微信\r\n\nnormal\t今天 天气好\n");
  const auto data = parse_dataset(in);
  REQUIRE(data.size() == 2);
  CHECK(data[0] == spam(U"加微信"));
  CHECK(data[1] == normal(U"今天 天气好"));
  std::ostringstream out;
  write_dataset(out, data);
  std::istringstream again(out.str());
  CHECK(parse_dataset(again) == data);

  testutil::TempDir dir("dataset");
  save_dataset(dir.path() / "d.tsv", data);
  CHECK(load_dataset(dir.path() / "d.tsv") == data);
  CHECK_THROWS_AS(load_dataset(dir.path() / "missing.tsv"), IoError);
}

TEST_CASE("dataset errors carry line numbers") {
  const auto fails = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      parse_dataset(in);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      return;
    }
    FAIL("no parse error for: " << text);
  };
  fails("spam\tok\nham\tbad\n", 2);
  fails("spam no tab\n", 1);
  fails("normal\tfine\nspam\t\n", 2);
  fails("spam\t\xff\xfe\n", 1);
  CHECK(parse_label("spam") == kSpam);
  CHECK_FALSE(parse_label("SPAM").has_value());
  CHECK(label_name(kNormal) == "normal");
}

TEST_CASE("vocabulary ids and out-of-vocabulary") {
  const Vocabulary v({U'甲', U'乙', U'丙'});
  CHECK(v.size() == 3);
  CHECK(v.table_size() == 4);
  CHECK(v.id(U'乙') == 1);
  CHECK(v.id(U'丁') == v.oov());
  CHECK(v.encode(U"丙丁甲") == std::vector<std::uint32_t>{2, 3, 0});
  CHECK_THROWS_AS(Vocabulary({U'a', U'a'}), ValidationError);
  const auto ex = to_examples(v, std::vector{spam(U"甲乙")});
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].label == kSpam);
  CHECK(ex[0].tokens == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("target selection by document frequency difference") {
  const std::vector<LabeledText> data{spam(U"abca"), spam(U"ab"), spam(U"bd"), normal(U"bc"), normal(U"e")};
  // a: 2, b: 3 - 1 = 2, c: 1 - 1 = 0, d: 1, e: -1
  CHECK(select_targets(data, 10) == std::vector<char32_t>{U'a', U'b', U'd'});
  CHECK(select_targets(data, 1) == std::vector<char32_t>{U'a'});
  CHECK(select_targets(data, 0).empty());
}

TEST_CASE("mutation rate zero is the identity") {
  VariationGraph g({U'a', U'b'});
  g.add_edge(0, 1, EdgeType::Pinyin, 0.9);
  const std::vector<LabeledText> data{spam(U"aaa"), normal(U"bb")};
  MutationSpec spec;
  spec.rate = 0.0;
  const auto r = mutate_corpus(data, g, spec);
  CHECK(r.texts == data);
  CHECK(r.replaced == 0);
  CHECK(r.eligible == 3);
}

TEST_CASE("rate one with a single neighbor is forced") {
  VariationGraph g({U'a', U'b', U'c'});
  g.add_edge(0, 1, EdgeType::Stroke, 0.7);
  const std::vector<LabeledText> data{spam(U"aca"), normal(U"aaa")};
  MutationSpec spec;
  spec.rate = 1.0;
  const std::vector<char32_t> targets{U'a'};
  const auto r = mutate_corpus(data, g, spec, targets, {});
  CHECK(r.texts[0].text == U"bcb");
  CHECK(r.texts[1] == data[1]);
  CHECK(introduced_characters(data, r.texts) == std::unordered_set<char32_t>{U'b'});
}

TEST_CASE("mutation frequency matches the rate") {
  VariationGraph g({U'a', U'b', U'c'});
  g.add_edge(0, 1, EdgeType::Pinyin, 0.9);
  g.add_edge(0, 2, EdgeType::Zhengma, 0.3);
  std::vector<LabeledText> data;
  for (int i = 0; i < 100; ++i) data.push_back(spam(std::u32string(100, U'a')));
  MutationSpec spec;
  spec.rate = 0.5;
  spec.seed = 17;
  const std::vector<char32_t> targets{U'a'};
  const auto r = mutate_corpus(data, g, spec, targets, {});
  CHECK(r.eligible == 10000);
  CHECK(std::abs(r.replaced / 10000.0 - 0.5) < 0.02);
  std::size_t b = 0;
  for (const auto& t : r.texts) b += static_cast<std::size_t>(std::count(t.text.begin(), t.text.end(), U'b'));
  CHECK(std::abs(b / static_cast<double>(r.replaced) - 0.75) < 0.03);  // 0.9 / 1.2
  CHECK(mutate_corpus(data, g, spec, targets, {}).texts == r.texts);
}

TEST_CASE("mutation respects types, exclusions and labels") {
  VariationGraph g({U'a', U'b', U'c'});
  g.add_edge(0, 1, EdgeType::Pinyin, 0.9);
  g.add_edge(0, 2, EdgeType::Zhengma, 0.3);
  const std::vector<LabeledText> data{spam(U"aaaa"), normal(U"aaaa")};
  const std::vector<char32_t> targets{U'a'};
  MutationSpec spec;
  spec.rate = 1.0;
  spec.allowed = {false, false, true};
  CHECK(mutate_corpus(data, g, spec, targets, {}).texts[0].text == U"cccc");
  spec.allowed = {true, true, true};
  CHECK(mutate_corpus(data, g, spec, targets, {U'b'}).texts[0].text == U"cccc");
  const auto none = mutate_corpus(data, g, spec, targets, {U'b', U'c'});
  CHECK(none.texts == data);
  CHECK(none.eligible == 0);
  for (const auto& r : {mutate_corpus(data, g, spec, targets, {})}) {
    CHECK(r.texts[1] == data[1]);
    CHECK(r.texts[0].label == kSpam);
  }
  spec.allowed = {false, false, false};
  CHECK_THROWS_AS(mutate_corpus(data, g, spec, targets, {}), ValidationError);
  spec.allowed = {true, true, true};
  spec.rate = 1.5;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("synthetic corpus shape and protocol") {
  SyntheticConfig c;
  c.clusters = 70;
  c.train_size = 300;
  c.test_size = 200;
  const auto corpus = generate_synthetic(c);
  CHECK(corpus.table.size() == 70 * 3);
  CHECK(corpus.base.size() == 70);
  CHECK(corpus.train.size() == 300);
  CHECK(corpus.test.size() == 200);
  CHECK(corpus.spam_keywords.size() == c.spam_keywords);

  const auto used = character_set(corpus.train);
  const std::unordered_set<char32_t> base(corpus.base.begin(), corpus.base.end());
  for (char32_t ch : used) CHECK(base.contains(ch));
  std::size_t spam_count = 0;
  for (const auto& t : corpus.train) {
    spam_count += t.label == kSpam;
    CHECK(t.text.size() >= c.min_length);
  }
  CHECK(std::abs(spam_count / 300.0 - 0.5) < 0.1);

  const auto again = generate_synthetic(c);
  CHECK(again.train == corpus.train);
  CHECK(again.test == corpus.test);

  // every base character has variation neighbors in the graph
  const auto g = build_graph(corpus.table);
  for (char32_t ch : corpus.spam_keywords) {
    const auto v = g.find(ch);
    REQUIRE(v.has_value());
    CHECK(g.degree(*v) > 0);
  }

  // test-only mutation: introduced characters never occur in training text
  MutationSpec spec;
  const auto mutated = mutate_corpus(corpus.test, g, spec, used);
  CHECK(mutated.replaced > 0);
  for (char32_t ch : introduced_characters(corpus.test, mutated.texts)) CHECK_FALSE(used.contains(ch));
}

TEST_CASE("text skip-gram leaves unseen ids at zero") {
  std::vector<std::vector<std::uint32_t>> seqs;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::uint32_t> s;
    for (int k = 0; k < 10; ++k) s.push_back(static_cast<std::uint32_t>(rng.below(4)));
    seqs.push_back(s);
  }
  TextSkipGramConfig c;
  c.dim = 6;
  c.epochs = 2;
  const auto e = train_text_skipgram(seqs, 6, c);
  CHECK(e.vectors.rows() == 6);
  CHECK(e.vectors.cols() == 6);
  for (std::uint32_t v = 0; v < 4; ++v) CHECK(e.seen[v]);
  CHECK_FALSE(e.seen[4]);
  CHECK(e.vectors.col(4).isZero(0.0));
  CHECK(e.vectors.col(5).isZero(0.0));
  CHECK(train_text_skipgram(seqs, 6, c).vectors == e.vectors);
}

TEST_CASE("negative sampler follows the smoothed unigram") {
  const std::vector<std::uint64_t> counts{16, 0, 1};
  const NegativeSampler s(counts);
  Rng rng(5);
  int zero = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto id = s(rng);
    REQUIRE(id != 1);
    zero += id == 0;
  }
  CHECK(std::abs(zero / 20000.0 - 8.0 / 9.0) < 0.01);  // 16^0.75 = 8
}

}
