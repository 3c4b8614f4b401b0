// ripple: command-line driver for the detection pipeline.
#include "ripple/config.hpp"
#include "ripple/errors.hpp"
#include "ripple/pipeline.hpp"
#include "ripple/synthetic.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kMissing = 2;

struct Common {
  std::string config_path;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::size_t k = 0;
  std::string report_path;
  std::string out_dir;
  std::vector<std::string> args;  // key=value overrides, plus the query for nearest
};

ripple::PipelineConfig make_config(const Common& c, std::string* query) {
  ripple::PipelineConfig config;
  if (!c.config_path.empty()) config = ripple::load_config(c.config_path);
  for (const auto& a : c.args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      if (!query || !query->empty()) throw ripple::ValidationError("unexpected argument '" + a + "'");
      *query = a;
      continue;
    }
    config.set(a.substr(0, eq), a.substr(eq + 1));
  }
  if (c.seed) config.seed = *c.seed;
  config.validate();
  return config;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ripple::IoError("cannot write " + path.string());
  out << text;
}

int run_pipeline_stage(ripple::Stage stage, const Common& c) {
  std::string query;
  const auto config = make_config(c, stage == ripple::Stage::Nearest ? &query : nullptr);
  ripple::StageOptions options;
  options.force = c.force;
  options.query = query;
  options.k = c.k;
  if (stage == ripple::Stage::Nearest && query.empty()) throw ripple::ValidationError("nearest needs a query character");
  const auto result = ripple::run_stage(stage, config, options, &std::cerr);
  std::cout << result.report;
  return kOk;
}

int run_benchmark(const Common& c) {
  const auto config = make_config(c, nullptr);
  const auto report = ripple::run_benchmark(config, &std::cerr);
  std::cout << ripple::format_benchmark(report);
  std::cout << "elapsed " << report.seconds << " s\n";
  const std::string path = c.report_path.empty()
                               ? (std::filesystem::path(config.artifacts_dir) / "benchmark.report").string()
                               : c.report_path;
  write_text(path, ripple::format_benchmark_kv(report));
  return kOk;
}

int run_synth(const Common& c) {
  const auto config = make_config(c, nullptr);
  const auto corpus = ripple::generate_synthetic(config.synthetic_config());
  const std::filesystem::path dir = c.out_dir.empty() ? "synthetic" : c.out_dir;
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "encoding.tsv");
    ripple::write_encoding_table(out, corpus.table);
  }
  ripple::save_dataset(dir / "train.tsv", corpus.train);
  ripple::save_dataset(dir / "test.tsv", corpus.test);
  std::cout << "characters  " << corpus.table.size() << '\n'
            << "train       " << corpus.train.size() << '\n'
            << "test        " << corpus.test.size() << '\n'
            << "written to  " << dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ripple: variation-aware Chinese spam detection"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config_path, "config file (key = value lines)");
    if (config_required) opt->required();
    sub->add_flag("--force", common.force, "re-run even when outputs are up to date");
    sub->add_option("--seed", common.seed, "override the config seed");
    sub->add_option("args", common.args, "key=value overrides");
  };

  std::vector<std::pair<CLI::App*, ripple::Stage>> stages;
  for (ripple::Stage s : ripple::kStages) {
    auto* sub = app.add_subcommand(std::string(ripple::to_string(s)));
    add_common(sub, true);
    if (s == ripple::Stage::Nearest) sub->add_option("--k", common.k, "number of neighbors");
    stages.emplace_back(sub, s);
  }
  auto* bench = app.add_subcommand("benchmark", "train and evaluate all four variants");
  add_common(bench, false);
  bench->add_option("--report", common.report_path, "key=value report file");
  auto* synth = app.add_subcommand("synth", "write the synthetic encoding table and splits");
  add_common(synth, false);
  synth->add_option("--out", common.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    for (auto& [sub, stage] : stages) {
      if (sub->parsed()) return run_pipeline_stage(stage, common);
    }
    if (bench->parsed()) return run_benchmark(common);
    if (synth->parsed()) return run_synth(common);
  } catch (const ripple::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMissing;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
