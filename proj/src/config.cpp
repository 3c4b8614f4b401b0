#include "ripple/config.hpp"

#include "ripple/errors.hpp"
#include "ripple/text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

namespace ripple {

namespace {

struct Field {
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

std::string format(const std::string& v) { return v; }
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(std::size_t v) { return std::to_string(v); }
std::string format(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string format(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

void parse(std::string_view s, std::string& out) { out = std::string(s); }

void parse(std::string_view s, std::size_t& out) {
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ValidationError("expected an unsigned integer");
  out = static_cast<std::size_t>(v);
}

void parse(std::string_view s, double& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ValidationError("expected a number");
}

void parse(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") out = true;
  else if (s == "false" || s == "0" || s == "no") out = false;
  else throw ValidationError("expected true or false");
}

void parse(std::string_view s, std::vector<std::size_t>& out) {
  out.clear();
  for (std::string_view part : split(s, ',')) {
    std::size_t v = 0;
    parse(trim(part), v);
    out.push_back(v);
  }
}

template <typename T>
Field field(T PipelineConfig::*member) {
  return {[member](PipelineConfig& c, std::string_view v) { parse(v, c.*member); },
          [member](const PipelineConfig& c) { return format(c.*member); }};
}

const std::map<std::string, Field, std::less<>>& registry() {
  static const std::map<std::string, Field, std::less<>> fields = {
      {"encoding_table", field(&PipelineConfig::encoding_table)},
      {"train_data", field(&PipelineConfig::train_data)},
      {"test_data", field(&PipelineConfig::test_data)},
      {"artifacts_dir", field(&PipelineConfig::artifacts_dir)},
      {"mutation_input", field(&PipelineConfig::mutation_input)},
      {"mutation_output", field(&PipelineConfig::mutation_output)},
      {"seed", field(&PipelineConfig::seed)},
      {"pinyin_threshold", field(&PipelineConfig::pinyin_threshold)},
      {"stroke_threshold", field(&PipelineConfig::stroke_threshold)},
      {"zhengma_threshold", field(&PipelineConfig::zhengma_threshold)},
      {"pinyin_weight_initial", field(&PipelineConfig::pinyin_weight_initial)},
      {"pinyin_weight_final", field(&PipelineConfig::pinyin_weight_final)},
      {"pinyin_weight_tone", field(&PipelineConfig::pinyin_weight_tone)},
      {"walks_per_vertex", field(&PipelineConfig::walks_per_vertex)},
      {"walk_length", field(&PipelineConfig::walk_length)},
      {"families", field(&PipelineConfig::families)},
      {"alpha", field(&PipelineConfig::alpha)},
      {"eta", field(&PipelineConfig::eta)},
      {"sweeps", field(&PipelineConfig::sweeps)},
      {"rounds", field(&PipelineConfig::rounds)},
      {"dim", field(&PipelineConfig::dim)},
      {"window", field(&PipelineConfig::window)},
      {"negatives", field(&PipelineConfig::negatives)},
      {"vfge_learning_rate", field(&PipelineConfig::vfge_learning_rate)},
      {"vfge_epochs", field(&PipelineConfig::vfge_epochs)},
      {"threads", field(&PipelineConfig::threads)},
      {"text_window", field(&PipelineConfig::text_window)},
      {"text_epochs", field(&PipelineConfig::text_epochs)},
      {"text_learning_rate", field(&PipelineConfig::text_learning_rate)},
      {"layers", field(&PipelineConfig::layers)},
      {"dropout", field(&PipelineConfig::dropout)},
      {"init_scale", field(&PipelineConfig::init_scale)},
      {"lm_epochs", field(&PipelineConfig::lm_epochs)},
      {"lm_learning_rate", field(&PipelineConfig::lm_learning_rate)},
      {"lm_batch", field(&PipelineConfig::lm_batch)},
      {"lm_samples", field(&PipelineConfig::lm_samples)},
      {"filters", field(&PipelineConfig::filters)},
      {"widths", field(&PipelineConfig::widths)},
      {"batch", field(&PipelineConfig::batch)},
      {"epochs", field(&PipelineConfig::epochs)},
      {"learning_rate", field(&PipelineConfig::learning_rate)},
      {"optimizer", field(&PipelineConfig::optimizer)},
      {"momentum", field(&PipelineConfig::momentum)},
      {"clip_norm", field(&PipelineConfig::clip_norm)},
      {"freeze_encoder", field(&PipelineConfig::freeze_encoder)},
      {"mutation_rate", field(&PipelineConfig::mutation_rate)},
      {"mutation_top_n", field(&PipelineConfig::mutation_top_n)},
      {"mutation_types", field(&PipelineConfig::mutation_types)},
      {"synth_clusters", field(&PipelineConfig::synth_clusters)},
      {"synth_variants", field(&PipelineConfig::synth_variants)},
      {"synth_spam_keywords", field(&PipelineConfig::synth_spam_keywords)},
      {"synth_normal_keywords", field(&PipelineConfig::synth_normal_keywords)},
      {"synth_train", field(&PipelineConfig::synth_train)},
      {"synth_test", field(&PipelineConfig::synth_test)},
      {"synth_min_length", field(&PipelineConfig::synth_min_length)},
      {"synth_max_length", field(&PipelineConfig::synth_max_length)},
      {"synth_phrase_length", field(&PipelineConfig::synth_phrase_length)},
      {"synth_phrases", field(&PipelineConfig::synth_phrases)},
      {"synth_keyword_noise", field(&PipelineConfig::synth_keyword_noise)},
      {"nearest_k", field(&PipelineConfig::nearest_k)},
      {"benchmark_repeats", field(&PipelineConfig::benchmark_repeats)},
  };
  return fields;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
  const auto& fields = registry();
  auto it = fields.find(key);
  if (it == fields.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  try {
    it->second.set(*this, trim(value));
  } catch (const ValidationError& e) {
    throw ValidationError("config key '" + std::string(key) + "': " + e.what());
  }
}

std::string PipelineConfig::get(std::string_view key) const {
  const auto& fields = registry();
  auto it = fields.find(key);
  if (it == fields.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  return it->second.get(*this);
}

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : registry()) out.push_back(k);
    return out;
  }();
  return names;
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const auto& k : keys()) out += k + " = " + get(k) + "\n";
  return out;
}

std::uint64_t PipelineConfig::hash(const std::vector<std::string>& subset) const {
  std::vector<std::string> names = subset.empty() ? keys() : subset;
  std::sort(names.begin(), names.end());
  std::string text;
  for (const auto& k : names) text += k + "=" + get(k) + "\n";
  return fnv1a64(text);
}

nn::Method PipelineConfig::method() const {
  const auto m = nn::parse_method(optimizer);
  if (!m) throw ValidationError("optimizer must be 'adam' or 'momentum'");
  return *m;
}

BuildOptions PipelineConfig::build_options() const {
  BuildOptions o;
  o.thresholds = {pinyin_threshold, stroke_threshold, zhengma_threshold};
  o.pinyin_weights = {pinyin_weight_initial, pinyin_weight_final, pinyin_weight_tone};
  return o;
}

vfge::VfgeConfig PipelineConfig::vfge_config() const {
  vfge::VfgeConfig c;
  c.walks = {walks_per_vertex, walk_length, seed};
  c.families.families = families;
  c.families.alpha = alpha;
  c.families.eta = eta;
  c.families.sweeps = sweeps;
  c.families.seed = seed + 1;
  c.skipgram.dim = dim;
  c.skipgram.window = window;
  c.skipgram.negatives = negatives;
  c.skipgram.learning_rate = vfge_learning_rate;
  c.skipgram.epochs = vfge_epochs;
  c.skipgram.seed = seed + 2;
  c.skipgram.threads = threads;
  c.rounds = rounds;
  return c;
}

TextSkipGramConfig PipelineConfig::text_config() const {
  TextSkipGramConfig c;
  c.dim = dim;
  c.window = text_window;
  c.negatives = negatives;
  c.learning_rate = text_learning_rate;
  c.epochs = text_epochs;
  c.seed = seed + 3;
  return c;
}

sslm::SSConfig PipelineConfig::ss_config() const {
  sslm::SSConfig c;
  c.dim = dim;
  c.layers = layers;
  c.dropout = dropout;
  c.init_scale = init_scale;
  c.seed = seed + 4;
  return c;
}

sslm::PretrainConfig PipelineConfig::pretrain_config() const {
  sslm::PretrainConfig c;
  c.epochs = lm_epochs;
  c.method = method();
  c.learning_rate = lm_learning_rate;
  c.momentum = momentum;
  c.clip_norm = clip_norm;
  c.batch = lm_batch;
  c.samples = lm_samples;
  c.seed = seed + 5;
  return c;
}

classifier::ConvConfig PipelineConfig::conv_config() const {
  classifier::ConvConfig c;
  c.widths = widths;
  c.filters = filters;
  c.dropout = dropout;
  c.init_scale = init_scale;
  c.seed = seed + 6;
  return c;
}

classifier::TrainConfig PipelineConfig::train_config() const {
  classifier::TrainConfig c;
  c.batch = batch;
  c.epochs = epochs;
  c.method = method();
  c.learning_rate = learning_rate;
  c.momentum = momentum;
  c.clip_norm = clip_norm;
  c.freeze_encoder = freeze_encoder;
  c.seed = seed + 7;
  return c;
}

MutationSpec PipelineConfig::mutation_spec() const {
  MutationSpec m;
  m.rate = mutation_rate;
  m.top_n = mutation_top_n;
  m.allowed = {false, false, false};
  for (std::string_view name : split(mutation_types, ',')) {
    const auto t = parse_edge_type(trim(name));
    if (!t) throw ValidationError("unknown edge type '" + std::string(trim(name)) + "' in mutation_types");
    m.allowed[index(*t)] = true;
  }
  m.seed = seed + 8;
  return m;
}

SyntheticConfig PipelineConfig::synthetic_config() const {
  SyntheticConfig s;
  s.clusters = synth_clusters;
  s.variants_per_cluster = synth_variants;
  s.spam_keywords = synth_spam_keywords;
  s.normal_keywords = synth_normal_keywords;
  s.train_size = synth_train;
  s.test_size = synth_test;
  s.min_length = synth_min_length;
  s.max_length = synth_max_length;
  s.phrases = synth_phrases;
  s.phrase_length = synth_phrase_length;
  s.keyword_noise = synth_keyword_noise;
  s.seed = seed + 9;
  return s;
}

void PipelineConfig::validate() const {
  build_options().thresholds.validate();
  build_options().pinyin_weights.validate();
  const auto v = vfge_config();
  v.walks.validate();
  v.families.validate();
  v.skipgram.validate();
  if (rounds < 1) throw ValidationError("rounds must be at least 1");
  text_config().validate();
  ss_config().validate();
  pretrain_config().validate();
  conv_config().validate();
  train_config().validate();
  mutation_spec().validate();
  synthetic_config().validate();
  if (benchmark_repeats < 1) throw ValidationError("benchmark_repeats must be at least 1");
  if (nearest_k < 1) throw ValidationError("nearest_k must be at least 1");
  if (artifacts_dir.empty()) throw ValidationError("artifacts_dir must be set");
}

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const std::size_t eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    try {
      c.set(trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  PipelineConfig c = parse_config(in);
  const std::filesystem::path base = path.parent_path();
  for (std::string* p : {&c.encoding_table, &c.train_data, &c.test_data, &c.artifacts_dir,
                         &c.mutation_input, &c.mutation_output}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return c;
}

}  // namespace ripple
