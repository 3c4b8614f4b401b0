#pragma once

#include "ripple/classifier.hpp"
#include "ripple/graph.hpp"
#include "ripple/mutation.hpp"
#include "ripple/skipgram.hpp"
#include "ripple/sslm.hpp"
#include "ripple/synthetic.hpp"
#include "ripple/vfge.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ripple {

// Every tunable of every stage. Text form is flat "key = value" lines;
// keys match the field names below.
struct PipelineConfig {
  std::string encoding_table;
  std::string train_data;
  std::string test_data;
  std::string artifacts_dir = "artifacts";
  std::string mutation_input;
  std::string mutation_output;

  std::uint64_t seed = 1;

  // graph
  double pinyin_threshold = 0.8;
  double stroke_threshold = 0.6;
  double zhengma_threshold = 0.5;
  double pinyin_weight_initial = 0.4;
  double pinyin_weight_final = 0.4;
  double pinyin_weight_tone = 0.2;

  // vfge
  std::size_t walks_per_vertex = 10;
  std::size_t walk_length = 80;
  std::size_t families = 500;
  double alpha = 0.0;  // 0 = 50 / families
  double eta = 0.01;
  std::size_t sweeps = 200;
  std::size_t rounds = 1;
  std::size_t dim = 128;
  std::size_t window = 5;
  std::size_t negatives = 5;
  double vfge_learning_rate = 0.025;
  std::size_t vfge_epochs = 1;
  std::size_t threads = 1;

  // textual skip-gram
  std::size_t text_window = 5;
  std::size_t text_epochs = 5;
  double text_learning_rate = 0.025;

  // language model
  std::size_t layers = 2;
  double dropout = 0.1;
  double init_scale = 0.08;
  std::size_t lm_epochs = 1;
  double lm_learning_rate = 0.001;
  std::size_t lm_batch = 16;
  std::size_t lm_samples = 32;

  // classifier
  std::size_t filters = 128;
  std::vector<std::size_t> widths{3, 4, 5};
  std::size_t batch = 64;
  std::size_t epochs = 5;
  std::string optimizer = "adam";  // adam | momentum
  double learning_rate = 0.001;
  double momentum = 0.9;
  double clip_norm = 5.0;
  bool freeze_encoder = false;

  // mutation
  double mutation_rate = 0.5;
  std::size_t mutation_top_n = 20;
  std::string mutation_types = "pinyin,stroke,zhengma";

  // synthetic data (benchmark without data paths)
  std::size_t synth_clusters = 80;
  std::size_t synth_variants = 2;
  std::size_t synth_spam_keywords = 12;
  std::size_t synth_normal_keywords = 0;
  std::size_t synth_train = 2000;
  std::size_t synth_test = 2000;
  std::size_t synth_min_length = 12;
  std::size_t synth_max_length = 24;
  std::size_t synth_phrases = 1;
  std::size_t synth_phrase_length = 2;
  double synth_keyword_noise = 0.05;

  std::size_t nearest_k = 3;
  std::size_t benchmark_repeats = 1;  // independent data/model seeds, metrics averaged

  // Throws ValidationError on unknown key or unparsable value.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static const std::vector<std::string>& keys();

  // Checks every field against its module's preconditions.
  void validate() const;

  std::string to_text() const;  // canonical, sorted by key
  // Hash over the listed keys (all keys when empty).
  std::uint64_t hash(const std::vector<std::string>& subset = {}) const;

  nn::Method method() const;
  BuildOptions build_options() const;
  vfge::VfgeConfig vfge_config() const;
  TextSkipGramConfig text_config() const;
  sslm::SSConfig ss_config() const;
  sslm::PretrainConfig pretrain_config() const;
  classifier::ConvConfig conv_config() const;
  classifier::TrainConfig train_config() const;
  MutationSpec mutation_spec() const;
  SyntheticConfig synthetic_config() const;
};

PipelineConfig parse_config(std::istream& in);
// Relative data and artifact paths in the file are taken relative to the
// file's directory.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace ripple
