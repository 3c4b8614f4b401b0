#include "helpers.hpp"

#include "ripple/config.hpp"
#include "ripple/errors.hpp"
#include "ripple/pipeline.hpp"
#include "ripple/text.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace ripple;
namespace fs = std::filesystem;

namespace {

const fs::path kData = RIPPLE_DATA_DIR;

PipelineConfig toy(const fs::path& artifacts) {
  PipelineConfig c = load_config(kData / "toy.conf");
  c.artifacts_dir = artifacts.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void run_all(const PipelineConfig& c) {
  for (Stage s : {Stage::BuildGraph, Stage::Walk, Stage::TrainVfge, Stage::PretrainLm, Stage::Train, Stage::Eval})
    run_stage(s, c);
}

PipelineConfig tiny_benchmark() {
  PipelineConfig c;
  c.synth_clusters = 30;
  c.synth_spam_keywords = 6;
  c.synth_train = 80;
  c.synth_test = 60;
  c.walks_per_vertex = 3;
  c.walk_length = 15;
  c.families = 5;
  c.sweeps = 5;
  c.dim = 4;
  c.layers = 1;
  c.filters = 4;
  c.epochs = 2;
  c.batch = 16;
  c.lm_samples = 8;
  return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config text round trip") {
  PipelineConfig c;
  c.set("dim", "16");
  c.set("dropout", "0.25");
  c.set("widths", "2,3");
  c.set("freeze_encoder", "yes");
  c.set("optimizer", "momentum");
  CHECK(c.dim == 16);
  CHECK(c.dropout == 0.25);
  CHECK(c.widths == std::vector<std::size_t>{2, 3});
  CHECK(c.freeze_encoder);
  CHECK(c.method() == nn::Method::Momentum);
  CHECK(c.get("widths") == "2,3");

  std::istringstream in(c.to_text());
  const PipelineConfig back = parse_config(in);
  CHECK(back.to_text() == c.to_text());
  CHECK(back.hash() == c.hash());

  const auto& keys = PipelineConfig::keys();
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  for (const auto& k : keys) CHECK_NOTHROW(c.get(k));
}

TEST_CASE("config errors") {
  PipelineConfig c;
  CHECK_THROWS_AS(c.set("nope", "1"), ValidationError);
  CHECK_THROWS_AS(c.set("dim", "-3"), ValidationError);
  CHECK_THROWS_AS(c.set("dim", "12x"), ValidationError);
  CHECK_THROWS_AS(c.set("dropout", "high"), ValidationError);
  CHECK_THROWS_AS(c.set("freeze_encoder", "maybe"), ValidationError);
  CHECK_THROWS_AS(c.get("nope"), ValidationError);

  std::istringstream bad("dim = 4\nfamilies 3\n");
  try {
    parse_config(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/ripple.conf"), IoError);

  for (const auto& [key, value] : std::vector<std::pair<std::string, std::string>>{
           {"families", "0"}, {"dim", "0"}, {"mutation_rate", "1.5"}, {"optimizer", "rmsprop"},
           {"mutation_types", "pinyin,glyph"}, {"dropout", "1"}, {"benchmark_repeats", "0"}}) {
    PipelineConfig v;
    v.set(key, value);
    CHECK_THROWS_AS(v.validate(), ValidationError);
  }
  CHECK_NOTHROW(PipelineConfig{}.validate());
}

TEST_CASE("config hash depends only on the chosen keys") {
  PipelineConfig a, b;
  b.set("epochs", "9");
  CHECK(a.hash() != b.hash());
  CHECK(a.hash({"dim", "families"}) == b.hash({"dim", "families"}));
  CHECK(a.hash({"epochs"}) != b.hash({"epochs"}));
}

TEST_CASE("config file paths resolve against the file") {
  const PipelineConfig c = load_config(kData / "toy.conf");
  CHECK(fs::exists(c.encoding_table));
  CHECK(fs::exists(c.train_data));
  CHECK(fs::path(c.train_data).is_absolute() == kData.is_absolute());
}

TEST_CASE("stage names") {
  for (Stage s : kStages) CHECK(parse_stage(to_string(s)) == s);
  CHECK(to_string(Stage::PretrainLm) == "pretrain-lm");
  CHECK_FALSE(parse_stage("deploy").has_value());
}

TEST_CASE("stages refuse to run before their inputs exist") {
  testutil::TempDir dir("early");
  const PipelineConfig c = toy(dir.path());
  try {
    run_stage(Stage::Eval, c);
    FAIL("eval ran without a model");
  } catch (const MissingArtifact& e) {
    CHECK(e.stage() == "train");
    CHECK(std::string(e.what()).find("train") != std::string::npos);
  }
  CHECK_THROWS_AS(run_stage(Stage::Walk, c), MissingArtifact);
  PipelineConfig no_data = c;
  no_data.encoding_table.clear();
  CHECK_THROWS_AS(run_stage(Stage::BuildGraph, no_data), ValidationError);
  CHECK_FALSE(fs::exists(dir.path() / ".lock"));
}

TEST_CASE("toy pipeline runs, records a manifest and skips up-to-date stages") {
  testutil::TempDir dir("toy");
  const PipelineConfig c = toy(dir.path());
  run_all(c);
  const auto manifest = read_manifest(dir.path());
  REQUIRE(manifest.size() == 6);
  CHECK(manifest[0].stage == "build-graph");
  CHECK(manifest[0].seed == c.seed);
  for (const auto& e : manifest) {
    CHECK_FALSE(e.outputs.empty());
    for (const auto& [name, hash] : e.outputs) CHECK(file_hash(dir.path() / name) == hash);
  }

  CHECK(run_stage(Stage::Train, c).skipped);
  StageOptions force;
  force.force = true;
  const StageResult forced = run_stage(Stage::Eval, c, force);
  CHECK_FALSE(forced.skipped);
  CHECK(forced.report_kv.find("accuracy=") != std::string::npos);
  CHECK(slurp(dir.path() / "eval.report") == forced.report_kv);

  PipelineConfig reseeded = c;
  reseeded.seed = c.seed + 1;
  CHECK_FALSE(run_stage(Stage::Walk, reseeded).skipped);
  CHECK(read_manifest(dir.path())[1].seed == c.seed + 1);
}

TEST_CASE("a held lock blocks a second pipeline") {
  testutil::TempDir dir("lock");
  const PipelineConfig c = toy(dir.path());
  { std::ofstream(dir.path() / ".lock") << "held\n"; }
  CHECK_THROWS_AS(run_stage(Stage::BuildGraph, c), Error);
  fs::remove(dir.path() / ".lock");
  CHECK_NOTHROW(run_stage(Stage::BuildGraph, c));
  CHECK_FALSE(fs::exists(dir.path() / ".lock"));
}

TEST_CASE("two runs give identical manifests") {
  testutil::TempDir a("det_a"), b("det_b");
  run_all(toy(a.path()));
  run_all(toy(b.path()));
  CHECK(slurp(a.path() / "manifest.txt") == slurp(b.path() / "manifest.txt"));
  CHECK(slurp(a.path() / "walks.bin") == slurp(b.path() / "walks.bin"));
  CHECK(slurp(a.path() / "model.bin") == slurp(b.path() / "model.bin"));
}

TEST_CASE("nearest on the toy graph") {
  testutil::TempDir dir("nearest");
  const PipelineConfig c = toy(dir.path());
  for (Stage s : {Stage::BuildGraph, Stage::Walk, Stage::TrainVfge}) run_stage(s, c);
  StageOptions q;
  q.query = "惊";
  q.k = 3;
  const StageResult r = run_stage(Stage::Nearest, c, q);
  CHECK(r.report.find("惊") != std::string::npos);
  std::size_t ranked = 0;
  std::istringstream lines(r.report_kv);
  for (std::string line; std::getline(lines, line);) ranked += line.rfind("rank_", 0) == 0;
  CHECK(ranked == 3);

  q.query = "龘";
  CHECK_THROWS_AS(run_stage(Stage::Nearest, c, q), UnknownCharacter);
  q.query = "惊京";
  CHECK_THROWS_AS(run_stage(Stage::Nearest, c, q), ValidationError);
}

TEST_CASE("mutate stage keeps variations out of training text") {
  testutil::TempDir dir("mutate");
  PipelineConfig c = toy(dir.path());
  c.mutation_rate = 1.0;
  run_stage(Stage::BuildGraph, c);
  run_stage(Stage::Mutate, c);
  const auto original = load_dataset(c.test_data);
  const auto mutated = load_dataset(dir.path() / "mutated.tsv");
  REQUIRE(mutated.size() == original.size());
  const auto train_chars = character_set(load_dataset(c.train_data));
  const auto introduced = introduced_characters(original, mutated);
  CHECK_FALSE(introduced.empty());
  for (char32_t ch : introduced) CHECK_FALSE(train_chars.contains(ch));
  for (std::size_t i = 0; i < original.size(); ++i) {
    CHECK(mutated[i].label == original[i].label);
    if (original[i].label == classifier::kNormal) CHECK(mutated[i] == original[i]);
  }
}

TEST_CASE("vocabulary and graph table layout") {
  VariationGraph g({U'b', U'a'});
  const std::vector<LabeledText> texts{{classifier::kSpam, U"zab"}, {classifier::kNormal, U"ya"}};
  const Vocabulary v = make_vocabulary(g, texts);
  CHECK(v.characters() == std::vector<char32_t>{U'b', U'a', U'y', U'z'});
  nn::Matrix integrated(2, 2);
  integrated << 1, 2, 3, 4;
  const nn::Matrix t = graph_table(integrated, v);
  CHECK(t.cols() == 5);
  CHECK(t.leftCols(2) == integrated);
  CHECK(t.rightCols(3).isZero(0.0));
}

TEST_CASE("benchmark shape, protocol and determinism") {
  const PipelineConfig c = tiny_benchmark();
  const BenchmarkReport r = run_benchmark(c);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].name == "SS_Original");
  CHECK(r.rows[1].name == "SS_Graph");
  CHECK(r.rows[2].name == "SS_Naive");
  CHECK(r.rows[3].name == "Skipgram");
  CHECK(r.train_mutated_characters == 0);
  CHECK(r.train_unchanged);
  CHECK(r.mutated_positions > 0);
  for (const auto& row : r.rows) CHECK(row.report.confusion.total() == 60);
  CHECK(format_benchmark_kv(run_benchmark(c)) == format_benchmark_kv(r));
  CHECK(format_benchmark(r).find("Skipgram") != std::string::npos);
}

TEST_CASE("benchmark repeats average the runs") {
  PipelineConfig c = tiny_benchmark();
  c.benchmark_repeats = 2;
  const BenchmarkReport r = run_benchmark(c);
  REQUIRE(r.runs.size() == 2);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r.rows[i].report.f1 == doctest::Approx((r.runs[0][i].report.f1 + r.runs[1][i].report.f1) / 2));
    CHECK(r.rows[i].report.confusion.total() == 120);
  }
  PipelineConfig first = tiny_benchmark();
  CHECK(format_benchmark_kv(run_benchmark(first)).find("SS_Graph.f1=") != std::string::npos);
  CHECK(run_benchmark(first).rows[1].report.f1 == r.runs[0][1].report.f1);
}

}
