#include "ripple/pipeline.hpp"

#include "ripple/errors.hpp"
#include "ripple/text.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace ripple {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 8> kStageNames = {
    "build-graph", "walk", "train-vfge", "pretrain-lm", "train", "eval", "nearest", "mutate"};

constexpr std::string_view kDetectorMagic = "RIPPLE-DETECTOR";
constexpr std::uint32_t kDetectorVersion = 1;
constexpr std::string_view kVocabMagic = "RIPPLE-VOCAB";
constexpr std::uint32_t kVocabVersion = 1;

constexpr std::string_view kGraphFile = "graph.bin";
constexpr std::string_view kWalksFile = "walks.bin";
constexpr std::string_view kFamiliesFile = "families.bin";
constexpr std::string_view kEmbeddingsFile = "vfge.bin";
constexpr std::string_view kEmbeddingTextFile = "graph_embedding.txt";
constexpr std::string_view kVocabFile = "vocab.bin";
constexpr std::string_view kLmFile = "lm.bin";
constexpr std::string_view kModelFile = "model.bin";
constexpr std::string_view kManifestFile = "manifest.txt";
constexpr std::string_view kLockFile = ".lock";

std::string report_name(Stage s) { return std::string(to_string(s)) + ".report"; }

void note(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << '\n' << std::flush;
}

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / kLockFile) {
    std::FILE* f = std::fopen(path_.string().c_str(), "wx");
    if (!f) {
      throw Error("artifacts directory " + dir.string() +
                  " is in use by another pipeline (remove " + path_.string() + " if stale)");
    }
    std::fputs("locked\n", f);
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void save_vocabulary(const Vocabulary& vocab, const fs::path& path) {
  BinaryWriter w;
  w.u64(vocab.size());
  for (char32_t c : vocab.characters()) w.u32(static_cast<std::uint32_t>(c));
  write_artifact(path, kVocabMagic, kVocabVersion, "size=" + std::to_string(vocab.size()), w);
}

Vocabulary read_vocabulary(BinaryReader& r) {
  const std::uint64_t n = r.u64();
  std::vector<char32_t> chars;
  chars.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) chars.push_back(static_cast<char32_t>(r.u32()));
  return Vocabulary(std::move(chars));
}

Vocabulary load_vocabulary(const fs::path& path) {
  const Artifact a = read_artifact(path, kVocabMagic, kVocabVersion);
  BinaryReader r(a.payload);
  Vocabulary v = read_vocabulary(r);
  r.expect_done();
  return v;
}

struct Detector {
  Vocabulary vocab;
  sslm::SSModel model;
  classifier::ConvClassifier clf;
};

void save_detector(const Detector& d, const fs::path& path) {
  BinaryWriter w;
  w.u64(d.vocab.size());
  for (char32_t c : d.vocab.characters()) w.u32(static_cast<std::uint32_t>(c));
  sslm::write_model(d.model, w);
  d.clf.write(w);
  write_artifact(path, kDetectorMagic, kDetectorVersion,
                 "vocab=" + std::to_string(d.vocab.size()) + " dim=" + std::to_string(d.model.dim()), w);
}

Detector load_detector(const fs::path& path) {
  const Artifact a = read_artifact(path, kDetectorMagic, kDetectorVersion);
  BinaryReader r(a.payload);
  Detector d;
  d.vocab = read_vocabulary(r);
  d.model = sslm::read_model(r);
  d.clf = classifier::ConvClassifier::read(r);
  r.expect_done();
  return d;
}

std::vector<std::vector<std::uint32_t>> encode_all(const Vocabulary& vocab,
                                                   std::span<const LabeledText> data) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(data.size());
  for (const auto& t : data) out.push_back(vocab.encode(t.text));
  return out;
}

std::string aligned(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [k, _] : rows) width = std::max(width, k.size());
  std::ostringstream out;
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width + 2)) << k << v << '\n';
  return out.str();
}

std::string kv(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out;
  for (const auto& [k, v] : rows) out += k + "=" + v + "\n";
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed << v;
  return s.str();
}

// ---------------------------------------------------------------------------

struct Plan {
  std::vector<std::string> keys;          // config keys the stage depends on
  std::vector<fs::path> inputs;           // files whose content it depends on
  std::vector<fs::path> outputs;          // files it writes, report last
  std::string extra;                      // non-config parameters (nearest query)
};

class Runner {
 public:
  Runner(const PipelineConfig& config, const StageOptions& options, std::ostream* log)
      : config_(config), options_(options), log_(log), dir_(config.artifacts_dir) {}

  Plan plan(Stage stage) const;
  void execute(Stage stage, const Plan& plan, StageResult& result);

 private:
  fs::path artifact(std::string_view name) const { return dir_ / name; }

  fs::path upstream(std::string_view name, Stage producer) const {
    fs::path p = artifact(name);
    if (!fs::exists(p)) {
      throw MissingArtifact(std::string(to_string(producer)),
                            "missing " + p.string() + ": run stage '" + std::string(to_string(producer)) +
                                "' first");
    }
    return p;
  }

  fs::path data_file(const std::string& path, std::string_view key) const {
    if (path.empty()) throw ValidationError(std::string(key) + " must be set for this stage");
    if (!fs::exists(path)) throw ValidationError(std::string(key) + " not found: " + path);
    return path;
  }

  fs::path mutation_input() const {
    return data_file(config_.mutation_input.empty() ? config_.test_data : config_.mutation_input,
                     config_.mutation_input.empty() ? "test_data" : "mutation_input");
  }

  fs::path mutation_output() const {
    return config_.mutation_output.empty() ? artifact("mutated.tsv") : fs::path(config_.mutation_output);
  }

  void build_graph_stage(StageResult& r);
  void walk_stage(StageResult& r);
  void vfge_stage(StageResult& r);
  void pretrain_stage(StageResult& r);
  void train_stage(StageResult& r);
  void eval_stage(StageResult& r);
  void nearest_stage(StageResult& r);
  void mutate_stage(StageResult& r);

  const PipelineConfig& config_;
  const StageOptions& options_;
  std::ostream* log_;
  fs::path dir_;
};

Plan Runner::plan(Stage stage) const {
  Plan p;
  switch (stage) {
    case Stage::BuildGraph:
      p.keys = {"encoding_table", "pinyin_threshold", "stroke_threshold", "zhengma_threshold",
                "pinyin_weight_initial", "pinyin_weight_final", "pinyin_weight_tone"};
      p.inputs = {data_file(config_.encoding_table, "encoding_table")};
      p.outputs = {artifact(kGraphFile)};
      break;
    case Stage::Walk:
      p.keys = {"walks_per_vertex", "walk_length", "seed"};
      p.inputs = {upstream(kGraphFile, Stage::BuildGraph)};
      p.outputs = {artifact(kWalksFile)};
      break;
    case Stage::TrainVfge:
      p.keys = {"families", "alpha", "eta", "sweeps", "rounds", "dim", "window", "negatives",
                "vfge_learning_rate", "vfge_epochs", "threads", "seed"};
      p.inputs = {upstream(kGraphFile, Stage::BuildGraph), upstream(kWalksFile, Stage::Walk)};
      p.outputs = {artifact(kFamiliesFile), artifact(kEmbeddingsFile), artifact(kEmbeddingTextFile)};
      break;
    case Stage::PretrainLm:
      p.keys = {"train_data", "dim", "text_window", "text_epochs", "text_learning_rate", "negatives",
                "layers", "dropout", "init_scale", "lm_epochs", "lm_learning_rate", "lm_batch",
                "lm_samples", "optimizer", "momentum", "clip_norm", "seed"};
      p.inputs = {upstream(kGraphFile, Stage::BuildGraph), upstream(kFamiliesFile, Stage::TrainVfge),
                  upstream(kEmbeddingsFile, Stage::TrainVfge), data_file(config_.train_data, "train_data")};
      p.outputs = {artifact(kVocabFile), artifact(kLmFile)};
      break;
    case Stage::Train:
      p.keys = {"train_data", "filters", "widths", "batch", "epochs", "optimizer", "learning_rate", "momentum",
                "clip_norm", "freeze_encoder", "dropout", "init_scale", "seed"};
      p.inputs = {upstream(kVocabFile, Stage::PretrainLm), upstream(kLmFile, Stage::PretrainLm),
                  data_file(config_.train_data, "train_data")};
      p.outputs = {artifact(kModelFile)};
      break;
    case Stage::Eval:
      p.keys = {"test_data"};
      p.inputs = {upstream(kModelFile, Stage::Train), data_file(config_.test_data, "test_data")};
      break;
    case Stage::Nearest: {
      p.keys = {"nearest_k"};
      p.inputs = {upstream(kGraphFile, Stage::BuildGraph), upstream(kFamiliesFile, Stage::TrainVfge),
                  upstream(kEmbeddingsFile, Stage::TrainVfge)};
      p.extra = "query=" + options_.query + " k=" + std::to_string(options_.k);
      break;
    }
    case Stage::Mutate:
      p.keys = {"mutation_input", "mutation_output", "test_data", "train_data", "mutation_rate",
                "mutation_top_n", "mutation_types", "seed"};
      p.inputs = {upstream(kGraphFile, Stage::BuildGraph), mutation_input()};
      if (!config_.train_data.empty()) p.inputs.push_back(data_file(config_.train_data, "train_data"));
      p.outputs = {fs::absolute(mutation_output())};
      break;
  }
  p.outputs.push_back(artifact(report_name(stage)));
  return p;
}

void Runner::execute(Stage stage, const Plan&, StageResult& result) {
  switch (stage) {
    case Stage::BuildGraph: return build_graph_stage(result);
    case Stage::Walk: return walk_stage(result);
    case Stage::TrainVfge: return vfge_stage(result);
    case Stage::PretrainLm: return pretrain_stage(result);
    case Stage::Train: return train_stage(result);
    case Stage::Eval: return eval_stage(result);
    case Stage::Nearest: return nearest_stage(result);
    case Stage::Mutate: return mutate_stage(result);
  }
}

void Runner::build_graph_stage(StageResult& r) {
  note(log_, "loading encoding table " + config_.encoding_table);
  const auto records = load_encoding_table(config_.encoding_table);
  note(log_, "building graph over " + std::to_string(records.size()) + " characters");
  const VariationGraph g = build_graph(records, config_.build_options());
  save_graph(g, artifact(kGraphFile));
  const GraphStats s = graph_stats(g);
  r.report = format_stats(s);
  r.report_kv = format_stats_kv(s);
}

void Runner::walk_stage(StageResult& r) {
  const VariationGraph g = load_graph(artifact(kGraphFile));
  const vfge::WalkCorpus corpus = vfge::generate_walks(g, config_.vfge_config().walks);
  if (corpus.walks.empty()) throw ValidationError("graph has no edges; nothing to walk");
  vfge::save_walks(corpus, artifact(kWalksFile));
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"walks", std::to_string(corpus.walks.size())},
      {"walk_length", std::to_string(corpus.walk_length)},
      {"tokens", std::to_string(corpus.token_count())},
      {"seed", std::to_string(corpus.seed)}};
  r.report = aligned(rows);
  r.report_kv = kv(rows);
}

void Runner::vfge_stage(StageResult& r) {
  const VariationGraph g = load_graph(artifact(kGraphFile));
  vfge::WalkCorpus corpus = vfge::load_walks(artifact(kWalksFile));
  note(log_, "assigning families and training pair skip-gram over " +
                 std::to_string(corpus.token_count()) + " walk tokens");
  const vfge::VfgeModel m = vfge::train_vfge(std::move(corpus), g.vertex_count(), config_.vfge_config());
  vfge::save_families(m.state, artifact(kFamiliesFile));
  vfge::save_embeddings(m.embeddings, artifact(kEmbeddingsFile));
  std::ostringstream text;
  vfge::export_text(vfge::integrate_all(m.embeddings, m.state), g, text);
  write_file(artifact(kEmbeddingTextFile), text.str());

  std::size_t used = 0;
  for (auto n : m.state.family_total) used += n > 0;
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"characters", std::to_string(g.vertex_count())},
      {"families", std::to_string(m.state.families)},
      {"families_used", std::to_string(used)},
      {"dim", std::to_string(m.embeddings.dim)},
      {"final_loss", num(m.report.epoch_loss.empty() ? 0.0 : m.report.epoch_loss.back())}};
  r.report = aligned(rows);
  r.report_kv = kv(rows);
}

void Runner::pretrain_stage(StageResult& r) {
  const VariationGraph g = load_graph(artifact(kGraphFile));
  const vfge::FamilyState state = vfge::load_families(artifact(kFamiliesFile));
  const vfge::PairEmbeddings emb = vfge::load_embeddings(artifact(kEmbeddingsFile));
  const auto train = load_dataset(config_.train_data);
  const Vocabulary vocab = make_vocabulary(g, train);
  const auto sequences = encode_all(vocab, train);

  note(log_, "training textual skip-gram");
  const TextEmbeddings text = train_text_skipgram(sequences, vocab.table_size(), config_.text_config());
  sslm::SSModel model(graph_table(vfge::integrate_all(emb, state), vocab), text.vectors,
                      config_.ss_config());
  note(log_, "pretraining bidirectional language model");
  const sslm::PretrainReport rep = sslm::pretrain_bilm(model, sequences, config_.pretrain_config());

  save_vocabulary(vocab, artifact(kVocabFile));
  sslm::save_model(model, artifact(kLmFile));
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"vocabulary", std::to_string(vocab.size())},
      {"graph_characters", std::to_string(g.vertex_count())},
      {"texts", std::to_string(train.size())},
      {"holdout_loss_initial", num(rep.initial_holdout_loss)},
      {"holdout_loss_final", num(rep.final_holdout_loss)},
      {"holdout_accuracy", num(rep.holdout_accuracy)}};
  r.report = aligned(rows);
  r.report_kv = kv(rows);
}

void Runner::train_stage(StageResult& r) {
  Detector d;
  d.vocab = load_vocabulary(artifact(kVocabFile));
  d.model = sslm::load_model(artifact(kLmFile));
  const auto train = load_dataset(config_.train_data);
  const auto examples = to_examples(d.vocab, train);
  d.clf = classifier::ConvClassifier(d.model.output_dim(), config_.conv_config());
  SSEncoder encoder(d.model);
  note(log_, "training classifier on " + std::to_string(examples.size()) + " texts");
  const auto result = classifier::train_classifier(d.clf, encoder, examples, config_.train_config());
  save_detector(d, artifact(kModelFile));
  const auto rep = classifier::evaluate(d.clf, encoder, examples);

  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    rows.emplace_back("epoch_" + std::to_string(e + 1) + "_loss", num(result.epoch_loss[e]));
  }
  rows.emplace_back("train_accuracy", num(rep.accuracy));
  rows.emplace_back("train_f1", num(rep.f1));
  r.report = aligned(rows);
  r.report_kv = kv(rows);
}

void Runner::eval_stage(StageResult& r) {
  Detector d = load_detector(artifact(kModelFile));
  const auto test = load_dataset(config_.test_data);
  const auto examples = to_examples(d.vocab, test);
  SSEncoder encoder(d.model);
  const auto rep = classifier::evaluate(d.clf, encoder, examples);
  r.report = classifier::format_report(rep);
  r.report_kv = classifier::format_report_kv(rep);
}

void Runner::nearest_stage(StageResult& r) {
  const std::u32string q = utf8_decode(options_.query);
  if (q.size() != 1) throw ValidationError("nearest expects exactly one query character");
  const std::size_t k = options_.k ? options_.k : config_.nearest_k;
  const VariationGraph g = load_graph(artifact(kGraphFile));
  const vfge::FamilyState state = vfge::load_families(artifact(kFamiliesFile));
  const vfge::PairEmbeddings emb = vfge::load_embeddings(artifact(kEmbeddingsFile));
  const std::uint32_t v = g.index_of(q[0]);
  const auto hits = vfge::nearest(vfge::integrate_all(emb, state), v, k);

  std::ostringstream text;
  text << "query " << options_.query << '\n';
  r.report_kv = "query=" + options_.query + "\n";
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const std::string c = utf8_encode(g.character(hits[i].vertex));
    text << std::setw(3) << i + 1 << "  " << c << "  " << num(hits[i].score) << '\n';
    r.report_kv += "rank_" + std::to_string(i + 1) + "=" + c + " " + num(hits[i].score) + "\n";
  }
  r.report = text.str();
}

void Runner::mutate_stage(StageResult& r) {
  const VariationGraph g = load_graph(artifact(kGraphFile));
  const auto data = load_dataset(mutation_input());
  std::unordered_set<char32_t> exclude;
  if (!config_.train_data.empty()) exclude = character_set(load_dataset(config_.train_data));
  const MutationResult m = mutate_corpus(data, g, config_.mutation_spec(), exclude);
  const fs::path out = mutation_output();
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_dataset(out, m.texts);

  std::string targets;
  for (char32_t c : m.targets) targets += utf8_encode(c);
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"texts", std::to_string(m.texts.size())},
      {"targets", targets},
      {"eligible", std::to_string(m.eligible)},
      {"replaced", std::to_string(m.replaced)},
      {"output", out.parent_path() == dir_ ? out.filename().string() : out.string()}};
  r.report = aligned(rows);
  r.report_kv = kv(rows);
}

// ---------------------------------------------------------------------------

std::string join_outputs(const ManifestEntry& e) {
  std::string s;
  for (const auto& [name, hash] : e.outputs) s += "\t" + name + "=" + hash;
  return s;
}

void write_manifest(const fs::path& dir, std::vector<ManifestEntry> entries) {
  auto rank = [](const ManifestEntry& e) {
    const auto s = parse_stage(e.stage);
    return s ? static_cast<int>(*s) : 99;
  };
  std::stable_sort(entries.begin(), entries.end(),
                   [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  std::string text;
  for (const auto& e : entries) {
    text += e.stage + "\tconfig=" + e.config_hash + "\tseed=" + std::to_string(e.seed) +
            "\tinputs=" + e.inputs_hash + join_outputs(e) + "\n";
  }
  write_file(dir / kManifestFile, text);
}

std::string output_name(const fs::path& dir, const fs::path& p) {
  return p.parent_path() == dir ? p.filename().string() : p.string();
}

}  // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view name) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    if (kStageNames[i] == name) return kStages[i];
  }
  return std::nullopt;
}

std::string file_hash(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

std::vector<ManifestEntry> read_manifest(const fs::path& artifacts_dir) {
  std::vector<ManifestEntry> entries;
  const fs::path path = artifacts_dir / kManifestFile;
  if (!fs::exists(path)) return entries;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 4) throw ParseError(line_no, "malformed manifest line");
    ManifestEntry e;
    e.stage = std::string(cols[0]);
    for (std::size_t i = 1; i < cols.size(); ++i) {
      const auto eq = cols[i].rfind('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, "malformed manifest field");
      const std::string key(cols[i].substr(0, eq));
      const std::string value(cols[i].substr(eq + 1));
      if (i == 1 && key == "config") e.config_hash = value;
      else if (i == 2 && key == "seed") e.seed = std::stoull(value);
      else if (i == 3 && key == "inputs") e.inputs_hash = value;
      else if (i >= 4) e.outputs.emplace_back(key, value);
      else throw ParseError(line_no, "unexpected manifest field '" + key + "'");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

StageResult run_stage(Stage stage, const PipelineConfig& config, const StageOptions& options,
                      std::ostream* log) {
  config.validate();
  const fs::path dir = config.artifacts_dir;
  fs::create_directories(dir);
  DirLock lock(dir);

  Runner runner(config, options, log);
  const Plan plan = runner.plan(stage);

  ManifestEntry entry;
  entry.stage = std::string(to_string(stage));
  entry.config_hash = hex64(fnv1a64(plan.extra, config.hash(plan.keys)));
  entry.seed = config.seed;
  std::string inputs;
  // artifacts by name, so runs in different directories hash alike
  for (const auto& p : plan.inputs) inputs += output_name(config.artifacts_dir, p) + ":" + file_hash(p) + "\n";
  entry.inputs_hash = hex64(fnv1a64(inputs));

  StageResult result;
  result.stage = stage;
  result.outputs = plan.outputs;

  auto entries = read_manifest(dir);
  auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.stage == entry.stage; });
  if (!options.force && it != entries.end() && it->config_hash == entry.config_hash &&
      it->inputs_hash == entry.inputs_hash && it->outputs.size() == plan.outputs.size()) {
    bool fresh = true;
    for (std::size_t i = 0; i < plan.outputs.size() && fresh; ++i) {
      const fs::path& p = plan.outputs[i];
      fresh = it->outputs[i].first == output_name(dir, p) && fs::exists(p) && it->outputs[i].second == file_hash(p);
    }
    if (fresh) {
      result.skipped = true;
      result.report_kv = read_file(plan.outputs.back());
      result.report = std::string(to_string(stage)) + ": up to date (use --force to re-run)\n";
      return result;
    }
  }

  note(log, "running " + entry.stage);
  runner.execute(stage, plan, result);
  write_file(plan.outputs.back(), result.report_kv);

  for (const auto& p : plan.outputs) entry.outputs.emplace_back(output_name(dir, p), file_hash(p));
  if (it != entries.end()) *it = entry;
  else entries.push_back(entry);
  write_manifest(dir, entries);
  return result;
}

// ---------------------------------------------------------------------------

nn::Matrix SSEncoder::encode(std::span<const std::uint32_t> tokens, bool training, Rng& rng) {
  if (!training) return model_.forward(tokens, false, nullptr, nullptr);
  tape_ = {};
  return model_.forward(tokens, true, &rng, &tape_);
}

void SSEncoder::backward(const nn::Matrix& grad) { model_.backward(tape_, grad); }

Vocabulary make_vocabulary(const VariationGraph& g, std::span<const LabeledText> texts) {
  std::vector<char32_t> chars = g.characters();
  std::set<char32_t> extra;
  for (const auto& t : texts) {
    for (char32_t c : t.text) {
      if (!g.find(c)) extra.insert(c);
    }
  }
  chars.insert(chars.end(), extra.begin(), extra.end());
  return Vocabulary(std::move(chars));
}

nn::Matrix graph_table(const nn::Matrix& integrated, const Vocabulary& vocab) {
  if (static_cast<std::size_t>(integrated.cols()) > vocab.size()) {
    throw ValidationError("vocabulary is smaller than the graph");
  }
  nn::Matrix table = nn::Matrix::Zero(integrated.rows(), static_cast<Eigen::Index>(vocab.table_size()));
  table.leftCols(integrated.cols()) = integrated;
  return table;
}

// ---------------------------------------------------------------------------

const BenchmarkRow& BenchmarkReport::row(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ValidationError("no benchmark row named '" + std::string(name) + "'");
}

namespace {

BenchmarkReport benchmark_once(const PipelineConfig& config, std::ostream* log) {
  std::vector<CharacterRecord> table;
  std::vector<LabeledText> train, test;
  const bool external = !config.encoding_table.empty() || !config.train_data.empty() || !config.test_data.empty();
  if (external) {
    if (config.encoding_table.empty() || config.train_data.empty() || config.test_data.empty()) {
      throw ValidationError("benchmark needs encoding_table, train_data and test_data together");
    }
    table = load_encoding_table(config.encoding_table);
    train = load_dataset(config.train_data);
    test = load_dataset(config.test_data);
  } else {
    note(log, "generating synthetic corpus");
    SyntheticCorpus s = generate_synthetic(config.synthetic_config());
    table = std::move(s.table);
    train = std::move(s.train);
    test = std::move(s.test);
  }
  if (train.empty() || test.empty()) throw ValidationError("benchmark splits must be non-empty");

  BenchmarkReport report;
  report.train_size = train.size();
  report.test_size = test.size();

  note(log, "building graph over " + std::to_string(table.size()) + " characters");
  const VariationGraph g = build_graph(table, config.build_options());
  report.graph = graph_stats(g);

  // Variations only in the test split: replacements never occur in training.
  const std::vector<LabeledText> train_snapshot = train;
  const auto train_chars = character_set(train);
  const MutationResult mutated = mutate_corpus(test, g, config.mutation_spec(), train_chars);
  report.mutated_positions = mutated.replaced;
  report.eligible_positions = mutated.eligible;
  const auto introduced = introduced_characters(test, mutated.texts);
  for (const auto& t : train) {
    for (char32_t c : t.text) report.train_mutated_characters += introduced.count(c);
  }
  report.train_unchanged = train == train_snapshot;

  note(log, "training graph embeddings");
  const vfge::VfgeModel vm = vfge::train_vfge(g, config.vfge_config());
  const Vocabulary vocab = make_vocabulary(g, train);
  const auto sequences = encode_all(vocab, train);
  const nn::Matrix graph = graph_table(vfge::integrate_all(vm.embeddings, vm.state), vocab);

  note(log, "training textual skip-gram");
  const TextEmbeddings text = train_text_skipgram(sequences, vocab.table_size(), config.text_config());

  const auto train_examples = to_examples(vocab, train);
  const auto test_examples = to_examples(vocab, mutated.texts);
  const auto conv = config.conv_config();
  const auto tc = config.train_config();

  auto run_table = [&](const std::string& name, nn::Matrix t) {
    note(log, "training " + name);
    classifier::TableEncoder enc(std::move(t));
    classifier::ConvClassifier clf(enc.dim(), conv);
    classifier::train_classifier(clf, enc, train_examples, tc);
    report.rows.push_back({name, classifier::evaluate(clf, enc, test_examples)});
  };

  {
    note(log, "pretraining SS_Original language model");
    sslm::SSModel model(graph, text.vectors, config.ss_config());
    sslm::pretrain_bilm(model, sequences, config.pretrain_config());
    note(log, "training SS_Original");
    SSEncoder enc(model);
    classifier::ConvClassifier clf(enc.dim(), conv);
    classifier::train_classifier(clf, enc, train_examples, tc);
    report.rows.push_back({"SS_Original", classifier::evaluate(clf, enc, test_examples)});
  }
  run_table("SS_Graph", graph);
  nn::Matrix naive(graph.rows() + text.vectors.rows(), graph.cols());
  naive << graph, text.vectors;
  run_table("SS_Naive", std::move(naive));
  run_table("Skipgram", text.vectors);
  return report;
}

}  // namespace

BenchmarkReport run_benchmark(const PipelineConfig& config, std::ostream* log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  BenchmarkReport total;
  for (std::size_t r = 0; r < config.benchmark_repeats; ++r) {
    PipelineConfig c = config;
    c.seed = config.seed + 1000 * r;
    if (config.benchmark_repeats > 1) note(log, "run " + std::to_string(r + 1) + " of " + std::to_string(config.benchmark_repeats));
    BenchmarkReport one = benchmark_once(c, log);
    if (r == 0) {
      total = one;
      total.rows.clear();
    } else {
      total.mutated_positions += one.mutated_positions;
      total.eligible_positions += one.eligible_positions;
      total.train_mutated_characters += one.train_mutated_characters;
      total.train_unchanged = total.train_unchanged && one.train_unchanged;
    }
    total.runs.push_back(std::move(one.rows));
  }
  const double n = static_cast<double>(total.runs.size());
  for (std::size_t i = 0; i < total.runs.front().size(); ++i) {
    BenchmarkRow mean{total.runs.front()[i].name, {}};
    for (const auto& run : total.runs) {
      const auto& e = run[i].report;
      mean.report.accuracy += e.accuracy / n;
      mean.report.precision += e.precision / n;
      mean.report.recall += e.recall / n;
      mean.report.f1 += e.f1 / n;
      mean.report.confusion.tp += e.confusion.tp;
      mean.report.confusion.fp += e.confusion.fp;
      mean.report.confusion.fn += e.confusion.fn;
      mean.report.confusion.tn += e.confusion.tn;
    }
    total.rows.push_back(std::move(mean));
  }
  total.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return total;
}

std::string format_benchmark(const BenchmarkReport& r) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "model" << std::right << std::setw(10) << "accuracy" << std::setw(10)
      << "f1" << std::setw(11) << "precision" << std::setw(10) << "recall" << '\n';
  for (const auto& row : r.rows) {
    out << std::left << std::setw(14) << row.name << std::right << std::fixed << std::setprecision(4)
        << std::setw(10) << row.report.accuracy << std::setw(10) << row.report.f1 << std::setw(11)
        << row.report.precision << std::setw(10) << row.report.recall << '\n';
  }
  if (r.runs.size() > 1) {
    out << "\nspam F1 per run\n";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      out << std::left << std::setw(14) << r.rows[i].name << std::right;
      for (const auto& run : r.runs) out << std::setw(10) << run[i].report.f1;
      out << '\n';
    }
  }
  out << '\n'
      << "train " << r.train_size << ", test " << r.test_size << ", graph " << r.graph.vertices
      << " characters / " << r.graph.edges << " edges\n"
      << "mutated " << r.mutated_positions << " of " << r.eligible_positions << " eligible positions\n"
      << "mutated characters in training split: " << r.train_mutated_characters << '\n';
  return out.str();
}

std::string format_benchmark_kv(const BenchmarkReport& r) {
  std::string out;
  for (const auto& row : r.rows) out += classifier::format_report_kv(row.report, row.name + ".");
  out += "runs=" + std::to_string(r.runs.size()) + "\n";
  if (r.runs.size() > 1) {
    for (std::size_t k = 0; k < r.runs.size(); ++k)
      for (const auto& row : r.runs[k])
        out += classifier::format_report_kv(row.report, "run" + std::to_string(k + 1) + "." + row.name + ".");
  }
  out += "train_size=" + std::to_string(r.train_size) + "\n";
  out += "test_size=" + std::to_string(r.test_size) + "\n";
  out += "graph_vertices=" + std::to_string(r.graph.vertices) + "\n";
  out += "graph_edges=" + std::to_string(r.graph.edges) + "\n";
  out += "mutated_positions=" + std::to_string(r.mutated_positions) + "\n";
  out += "eligible_positions=" + std::to_string(r.eligible_positions) + "\n";
  out += "train_mutated_characters=" + std::to_string(r.train_mutated_characters) + "\n";
  return out;
}

}  // namespace ripple
