#include "ripple/config.hpp"
#include "ripple/encoding.hpp"
#include "ripple/errors.hpp"
#include "ripple/graph.hpp"
#include "ripple/pipeline.hpp"
#include "ripple/synthetic.hpp"
#include "ripple/text.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace ripple;

namespace {

char32_t single_char(const std::string& s) {
  const auto u = utf8_decode(s);
  if (u.size() != 1) throw ValidationError("expected exactly one character, got '" + s + "'");
  return u[0];
}

py::dict config_dict(const PipelineConfig& c) {
  py::dict d;
  for (const auto& k : PipelineConfig::keys()) d[py::str(k)] = c.get(k);
  return d;
}

PipelineConfig with_overrides(PipelineConfig c, const std::map<std::string, std::string>& overrides) {
  for (const auto& [k, v] : overrides) c.set(k, v);
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_ripple, m) {
  m.doc() = "variation-aware Chinese spam detection";

  auto base = py::register_exception<Error>(m, "RippleError");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<UnknownCharacter>(m, "UnknownCharacter", base.ptr());
  py::register_exception<MissingArtifact>(m, "MissingArtifact", base.ptr());

  py::class_<Syllable>(m, "Syllable")
      .def_readonly("initial", &Syllable::initial)
      .def_readonly("final", &Syllable::final_)
      .def_readonly("tone", &Syllable::tone)
      .def("__repr__", [](const Syllable& s) { return "Syllable('" + to_string(s) + "')"; })
      .def("__str__", [](const Syllable& s) { return to_string(s); });
  m.def("parse_syllable", &parse_syllable, py::arg("text"));
  m.def("pinyin_similarity",
        [](const std::string& a, const std::string& b) { return pinyin_similarity(parse_syllable(a), parse_syllable(b)); },
        py::arg("a"), py::arg("b"));
  m.def("stroke_similarity", [](const std::string& a, const std::string& b) { return stroke_similarity(a, b); },
        py::arg("a"), py::arg("b"));
  m.def("zhengma_similarity", [](const std::string& a, const std::string& b) { return zhengma_similarity(a, b); },
        py::arg("a"), py::arg("b"));

  py::class_<VariationGraph>(m, "Graph")
      .def_static("from_table",
                  [](const std::filesystem::path& p) { return build_graph(load_encoding_table(p)); }, py::arg("path"))
      .def_static("load", &load_graph, py::arg("path"))
      .def("save", [](const VariationGraph& g, const std::filesystem::path& p) { save_graph(g, p); }, py::arg("path"))
      .def("__len__", &VariationGraph::vertex_count)
      .def_property_readonly("edge_count", [](const VariationGraph& g) { return g.edge_count(); })
      .def_property_readonly("characters",
                             [](const VariationGraph& g) {
                               std::vector<std::string> out;
                               for (char32_t c : g.characters()) out.push_back(utf8_encode(c));
                               return out;
                             })
      .def(
          "neighbors",
          [](const VariationGraph& g, const std::string& c) {
            std::vector<std::tuple<std::string, std::string, double>> out;
            for (const auto& n : neighbors(g, single_char(c)))
              out.emplace_back(utf8_encode(n.character), std::string(to_string(n.type)), n.weight);
            return out;
          },
          py::arg("character"), "(character, type, weight) by descending weight")
      .def("stats", [](const VariationGraph& g) { return format_stats_kv(graph_stats(g)); })
      .def("__eq__", [](const VariationGraph& a, const VariationGraph& b) { return a == b; });

  py::class_<PipelineConfig>(m, "Config")
      .def(py::init<>())
      .def_static("load", &load_config, py::arg("path"))
      .def_static("parse",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return parse_config(in);
                  },
                  py::arg("text"))
      .def("set", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.set(k, v); })
      .def("get", [](const PipelineConfig& c, const std::string& k) { return c.get(k); })
      .def("validate", &PipelineConfig::validate)
      .def("to_text", &PipelineConfig::to_text)
      .def("to_dict", &config_dict)
      .def_static("keys", &PipelineConfig::keys);

  m.def("stages", [] {
    std::vector<std::string> out;
    for (Stage s : kStages) out.emplace_back(to_string(s));
    return out;
  });
  m.def(
      "run_stage",
      [](const std::string& name, const PipelineConfig& config, bool force, const std::string& query, std::size_t k,
         const std::map<std::string, std::string>& overrides) {
        const auto stage = parse_stage(name);
        if (!stage) throw ValidationError("unknown stage '" + name + "'");
        StageOptions o;
        o.force = force;
        o.query = query;
        o.k = k;
        const StageResult r = [&] {
          py::gil_scoped_release release;
          return run_stage(*stage, with_overrides(config, overrides), o);
        }();
        py::dict d;
        d["stage"] = std::string(to_string(r.stage));
        d["skipped"] = r.skipped;
        std::vector<std::string> outs;
        for (const auto& p : r.outputs) outs.push_back(p.string());
        d["outputs"] = outs;
        d["report"] = r.report;
        d["report_kv"] = r.report_kv;
        return d;
      },
      py::arg("stage"), py::arg("config"), py::arg("force") = false, py::arg("query") = "", py::arg("k") = 0,
      py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("read_manifest", [](const std::filesystem::path& dir) {
    py::list out;
    for (const auto& e : read_manifest(dir)) {
      py::dict d;
      d["stage"] = e.stage;
      d["config_hash"] = e.config_hash;
      d["seed"] = e.seed;
      d["inputs_hash"] = e.inputs_hash;
      d["outputs"] = e.outputs;
      out.append(d);
    }
    return out;
  });
  m.def(
      "run_benchmark",
      [](const PipelineConfig& config, const std::map<std::string, std::string>& overrides) {
        const BenchmarkReport r = [&] {
          py::gil_scoped_release release;
          return run_benchmark(with_overrides(config, overrides));
        }();
        py::dict rows;
        for (const auto& row : r.rows) {
          py::dict d;
          d["accuracy"] = row.report.accuracy;
          d["f1"] = row.report.f1;
          d["precision"] = row.report.precision;
          d["recall"] = row.report.recall;
          rows[py::str(row.name)] = d;
        }
        py::dict d;
        d["rows"] = rows;
        d["runs"] = r.runs.size();
        d["train_size"] = r.train_size;
        d["test_size"] = r.test_size;
        d["mutated_positions"] = r.mutated_positions;
        d["train_mutated_characters"] = r.train_mutated_characters;
        d["seconds"] = r.seconds;
        d["text"] = format_benchmark(r);
        d["kv"] = format_benchmark_kv(r);
        return d;
      },
      py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{});
}
