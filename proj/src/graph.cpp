#include "ripple/graph.hpp"

#include "ripple/binary_io.hpp"
#include "ripple/errors.hpp"
#include "ripple/text.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <unordered_set>

namespace ripple {

std::string_view to_string(EdgeType t) {
  switch (t) {
    case EdgeType::Pinyin: return "pinyin";
    case EdgeType::Stroke: return "stroke";
    case EdgeType::Zhengma: return "zhengma";
  }
  return "?";
}

std::optional<EdgeType> parse_edge_type(std::string_view name) {
  for (EdgeType t : kEdgeTypes)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

double Thresholds::operator[](EdgeType t) const {
  switch (t) {
    case EdgeType::Pinyin: return pinyin;
    case EdgeType::Stroke: return stroke;
    case EdgeType::Zhengma: return zhengma;
  }
  return 1.0;
}

void Thresholds::validate() const {
  for (EdgeType t : kEdgeTypes) {
    const double v = (*this)[t];
    if (!(v > 0.0 && v <= 1.0)) {
      throw ValidationError(std::string(to_string(t)) + " threshold must be in (0, 1]");
    }
  }
}

VariationGraph::VariationGraph(std::vector<char32_t> characters)
    : characters_(std::move(characters)) {
  for (std::size_t i = 0; i < characters_.size(); ++i) {
    if (!index_.emplace(characters_[i], static_cast<std::uint32_t>(i)).second) {
      throw ValidationError("duplicate character '" + utf8_encode(characters_[i]) + "'");
    }
  }
  for (std::size_t t = 0; t < kEdgeTypeCount; ++t) {
    adjacency_[t].assign(characters_.size(), {});
    strength_[t].assign(characters_.size(), 0.0);
  }
}

void VariationGraph::add_edge(std::uint32_t u, std::uint32_t v, EdgeType t, double weight) {
  if (u >= vertex_count() || v >= vertex_count()) throw ValidationError("edge endpoint out of range");
  if (u == v) throw ValidationError("self-loops are not allowed");
  if (!(weight > 0.0 && weight <= 1.0)) throw ValidationError("edge weight must be in (0, 1]");
  auto insert = [&](std::uint32_t from, std::uint32_t to) {
    auto& list = adjacency_[index(t)][from];
    auto it = std::lower_bound(list.begin(), list.end(), to,
                               [](const Adjacent& a, std::uint32_t x) { return a.vertex < x; });
    if (it != list.end() && it->vertex == to) throw ValidationError("duplicate edge");
    list.insert(it, Adjacent{to, weight});
    strength_[index(t)][from] += weight;
  };
  insert(u, v);
  insert(v, u);
  ++edge_count_[index(t)];
}

std::optional<std::uint32_t> VariationGraph::find(char32_t c) const {
  auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t VariationGraph::index_of(char32_t c) const {
  auto v = find(c);
  if (!v) throw UnknownCharacter(c);
  return *v;
}

std::size_t VariationGraph::degree(std::uint32_t v) const {
  std::size_t d = 0;
  for (std::size_t t = 0; t < kEdgeTypeCount; ++t) d += adjacency_[t].at(v).size();
  return d;
}

std::size_t VariationGraph::edge_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t c : edge_count_) n += c;
  return n;
}

std::optional<double> VariationGraph::weight(std::uint32_t u, std::uint32_t v, EdgeType t) const {
  const auto list = adjacency(u, t);
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Adjacent& a, std::uint32_t x) { return a.vertex < x; });
  if (it == list.end() || it->vertex != v) return std::nullopt;
  return it->weight;
}

bool VariationGraph::operator==(const VariationGraph& other) const {
  return characters_ == other.characters_ && adjacency_ == other.adjacency_ &&
         edge_count_ == other.edge_count_;
}

VariationGraph build_graph(std::span<const CharacterRecord> records, const BuildOptions& options) {
  options.thresholds.validate();
  options.pinyin_weights.validate();
  std::vector<char32_t> chars;
  chars.reserve(records.size());
  for (const auto& r : records) chars.push_back(r.character);
  VariationGraph g(std::move(chars));

  const auto n = static_cast<std::uint32_t>(records.size());
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v = u + 1; v < n; ++v) {
      const auto& a = records[u];
      const auto& b = records[v];
      const double scores[kEdgeTypeCount] = {
          pinyin_similarity(a.pinyins, b.pinyins, options.pinyin_weights),
          stroke_similarity(a.stroke, b.stroke),
          zhengma_similarity(a.zhengma, b.zhengma),
      };
      for (EdgeType t : kEdgeTypes) {
        const double s = scores[index(t)];
        if (s >= options.thresholds[t] && s > 0.0) g.add_edge(u, v, t, std::min(s, 1.0));
      }
    }
  }
  return g;
}

std::vector<NeighborEntry> neighbors(const VariationGraph& g, char32_t c,
                                     std::optional<EdgeType> type) {
  const std::uint32_t v = g.index_of(c);
  std::vector<NeighborEntry> out;
  for (EdgeType t : kEdgeTypes) {
    if (type && *type != t) continue;
    for (const Adjacent& a : g.adjacency(v, t)) {
      out.push_back({g.character(a.vertex), a.vertex, t, a.weight});
    }
  }
  std::sort(out.begin(), out.end(), [](const NeighborEntry& x, const NeighborEntry& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.vertex != y.vertex) return x.vertex < y.vertex;
    return index(x.type) < index(y.type);
  });
  return out;
}

GraphStats graph_stats(const VariationGraph& g) {
  GraphStats s;
  s.vertices = g.vertex_count();
  for (EdgeType t : kEdgeTypes) s.edges_by_type[index(t)] = g.edge_count(t);
  s.edges = g.edge_count();
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) s.max_degree = std::max(s.max_degree, g.degree(v));
  s.mean_degree = s.vertices ? 2.0 * static_cast<double>(s.edges) / static_cast<double>(s.vertices) : 0.0;
  return s;
}

std::string format_stats(const GraphStats& s) {
  std::ostringstream out;
  out << std::left;
  out << std::setw(16) << "vertices" << s.vertices << '\n';
  for (EdgeType t : kEdgeTypes) {
    out << std::setw(16) << (std::string(to_string(t)) + " edges") << s.edges_by_type[index(t)] << '\n';
  }
  out << std::setw(16) << "total edges" << s.edges << '\n';
  out << std::setw(16) << "mean degree" << std::fixed << std::setprecision(4) << s.mean_degree << '\n';
  out << std::setw(16) << "max degree" << s.max_degree << '\n';
  return out.str();
}

std::string format_stats_kv(const GraphStats& s) {
  std::ostringstream out;
  out << "vertices=" << s.vertices << '\n';
  for (EdgeType t : kEdgeTypes) out << "edges_" << to_string(t) << '=' << s.edges_by_type[index(t)] << '\n';
  out << "edges=" << s.edges << '\n';
  out << "mean_degree=" << std::setprecision(17) << s.mean_degree << '\n';
  out << "max_degree=" << s.max_degree << '\n';
  return out.str();
}

namespace {
constexpr std::string_view kGraphMagic = "RIPPLE-GRAPH";
constexpr std::uint32_t kGraphVersion = 1;
}  // namespace

void save_graph(const VariationGraph& g, const std::filesystem::path& path) {
  BinaryWriter w;
  w.u64(g.vertex_count());
  for (char32_t c : g.characters()) w.u32(static_cast<std::uint32_t>(c));
  w.u64(g.edge_count());
  for (EdgeType t : kEdgeTypes) {
    for (std::uint32_t u = 0; u < g.vertex_count(); ++u) {
      for (const Adjacent& a : g.adjacency(u, t)) {
        if (a.vertex <= u) continue;
        w.u32(u);
        w.u32(a.vertex);
        w.u8(static_cast<std::uint8_t>(t));
        w.f64(a.weight);
      }
    }
  }
  std::ostringstream header;
  header << "vertices=" << g.vertex_count() << " edges=" << g.edge_count();
  write_artifact(path, kGraphMagic, kGraphVersion, header.str(), w);
}

VariationGraph load_graph(const std::filesystem::path& path) {
  const Artifact a = read_artifact(path, kGraphMagic, kGraphVersion);
  BinaryReader r(a.payload);
  const std::uint64_t n = r.u64();
  std::vector<char32_t> chars;
  chars.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) chars.push_back(static_cast<char32_t>(r.u32()));
  VariationGraph g(std::move(chars));
  const std::uint64_t m = r.u64();
  for (std::uint64_t i = 0; i < m; ++i) {
    const std::uint32_t u = r.u32();
    const std::uint32_t v = r.u32();
    const std::uint8_t t = r.u8();
    const double w = r.f64();
    if (t >= kEdgeTypeCount) throw FormatError("corrupted graph: bad edge type");
    try {
      g.add_edge(u, v, static_cast<EdgeType>(t), w);
    } catch (const ValidationError& e) {
      throw FormatError(std::string("corrupted graph: ") + e.what());
    }
  }
  r.expect_done();
  return g;
}

}  // namespace ripple
