#pragma once

#include "ripple/config.hpp"
#include "ripple/dataset.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ripple {

enum class Stage { BuildGraph, Walk, TrainVfge, PretrainLm, Train, Eval, Nearest, Mutate };

inline constexpr std::array<Stage, 8> kStages = {
    Stage::BuildGraph, Stage::Walk, Stage::TrainVfge, Stage::PretrainLm,
    Stage::Train,      Stage::Eval, Stage::Nearest,   Stage::Mutate};

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

struct StageOptions {
  bool force = false;
  std::string query;  // nearest: the query character (UTF-8)
  std::size_t k = 0;  // nearest: 0 = config.nearest_k
};

struct StageResult {
  Stage stage;
  bool skipped = false;  // up to date, nothing ran
  std::vector<std::filesystem::path> outputs;
  std::string report;     // human-readable
  std::string report_kv;  // key=value lines
};

// Runs one stage against config.artifacts_dir. Throws MissingArtifact when
// an upstream output is absent and ValidationError on bad configuration.
StageResult run_stage(Stage stage, const PipelineConfig& config, const StageOptions& options = {},
                      std::ostream* log = nullptr);

struct ManifestEntry {
  std::string stage;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string inputs_hash;
  std::vector<std::pair<std::string, std::string>> outputs;  // file name, hash
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& artifacts_dir);
std::string file_hash(const std::filesystem::path& path);

// Feeds SS embeddings of a (trainable) SSModel to the classifier.
class SSEncoder final : public classifier::FeatureEncoder {
 public:
  explicit SSEncoder(sslm::SSModel& model) : model_(model) {}

  std::size_t dim() const override { return model_.output_dim(); }
  nn::Matrix encode(std::span<const std::uint32_t> tokens, bool training, Rng& rng) override;
  void backward(const nn::Matrix& grad) override;
  nn::ParamList parameters() override { return model_.parameters(); }

 private:
  sslm::SSModel& model_;
  sslm::SSModel::Tape tape_;
};

// Graph characters keep their vertex index; characters of `texts` missing
// from the graph follow in code point order.
Vocabulary make_vocabulary(const VariationGraph& g, std::span<const LabeledText> texts);

// Integrated graph embeddings widened to the vocabulary (zero columns for
// non-graph characters and the out-of-vocabulary id).
nn::Matrix graph_table(const nn::Matrix& integrated, const Vocabulary& vocab);

// ---------------------------------------------------------------------------

struct BenchmarkRow {
  std::string name;
  classifier::EvalReport report;
};

struct BenchmarkReport {
  // SS_Original, SS_Graph, SS_Naive, Skipgram. Rates are means over runs,
  // confusion counts are summed.
  std::vector<BenchmarkRow> rows;
  std::vector<std::vector<BenchmarkRow>> runs;  // per repeat, same order
  GraphStats graph;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t mutated_positions = 0;
  std::size_t eligible_positions = 0;
  std::size_t train_mutated_characters = 0;  // protocol check, must be 0
  bool train_unchanged = false;
  double seconds = 0.0;

  const BenchmarkRow& row(std::string_view name) const;
};

// Trains and evaluates the four variants on identical splits; test spam is
// mutated with replacement characters that never occur in training text.
// Uses the configured data paths when set, otherwise the synthetic corpus.
// Repeat r shifts every seed by 1000 * r; with synthetic data that also
// regenerates the corpus. Counts in the report are summed over repeats.
BenchmarkReport run_benchmark(const PipelineConfig& config, std::ostream* log = nullptr);

std::string format_benchmark(const BenchmarkReport& r);
std::string format_benchmark_kv(const BenchmarkReport& r);

}  // namespace ripple
