#pragma once

#include "ripple/encoding.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ripple {

enum class EdgeType : std::uint8_t { Pinyin = 0, Stroke = 1, Zhengma = 2 };

inline constexpr std::size_t kEdgeTypeCount = 3;
inline constexpr std::array<EdgeType, kEdgeTypeCount> kEdgeTypes = {
    EdgeType::Pinyin, EdgeType::Stroke, EdgeType::Zhengma};

std::string_view to_string(EdgeType t);
std::optional<EdgeType> parse_edge_type(std::string_view name);

inline std::size_t index(EdgeType t) { return static_cast<std::size_t>(t); }

// Minimum similarity for an edge of each type; all in (0, 1].
struct Thresholds {
  double pinyin = 0.8;
  double stroke = 0.6;
  double zhengma = 0.5;

  double operator[](EdgeType t) const;
  void validate() const;
};

struct Adjacent {
  std::uint32_t vertex;
  double weight;

  bool operator==(const Adjacent&) const = default;
};

// Undirected graph over characters with one weighted adjacency list per
// relation type. Immutable once built; safe for concurrent readers.
class VariationGraph {
 public:
  VariationGraph() = default;
  explicit VariationGraph(std::vector<char32_t> characters);

  // Inserts (u, v) and (v, u). Rejects self-loops, duplicates and weights
  // outside (0, 1].
  void add_edge(std::uint32_t u, std::uint32_t v, EdgeType t, double weight);

  std::size_t vertex_count() const noexcept { return characters_.size(); }
  char32_t character(std::uint32_t v) const { return characters_.at(v); }
  const std::vector<char32_t>& characters() const noexcept { return characters_; }

  std::optional<std::uint32_t> find(char32_t c) const;
  std::uint32_t index_of(char32_t c) const;  // throws UnknownCharacter

  // Sorted by neighbor index.
  std::span<const Adjacent> adjacency(std::uint32_t v, EdgeType t) const {
    return adjacency_[index(t)].at(v);
  }

  // Sum of incident weights of one type.
  double strength(std::uint32_t v, EdgeType t) const { return strength_[index(t)].at(v); }
  std::size_t degree(std::uint32_t v) const;
  std::size_t edge_count(EdgeType t) const noexcept { return edge_count_[index(t)]; }
  std::size_t edge_count() const noexcept;

  std::optional<double> weight(std::uint32_t u, std::uint32_t v, EdgeType t) const;

  bool operator==(const VariationGraph& other) const;

 private:
  std::vector<char32_t> characters_;
  std::unordered_map<char32_t, std::uint32_t> index_;
  std::array<std::vector<std::vector<Adjacent>>, kEdgeTypeCount> adjacency_;
  std::array<std::vector<double>, kEdgeTypeCount> strength_;
  std::array<std::size_t, kEdgeTypeCount> edge_count_{};
};

struct BuildOptions {
  Thresholds thresholds;
  PinyinWeights pinyin_weights;
};

// All-pairs construction, O(|C|^2) per type. Vertex order follows `records`.
VariationGraph build_graph(std::span<const CharacterRecord> records,
                           const BuildOptions& options = {});

struct NeighborEntry {
  char32_t character;
  std::uint32_t vertex;
  EdgeType type;
  double weight;
};

// Incident edges, optionally of one type, by descending weight; ties by
// vertex index then type.
std::vector<NeighborEntry> neighbors(const VariationGraph& g, char32_t c,
                                     std::optional<EdgeType> type = std::nullopt);

struct GraphStats {
  std::size_t vertices = 0;
  std::array<std::size_t, kEdgeTypeCount> edges_by_type{};
  std::size_t edges = 0;
  double mean_degree = 0.0;
  std::size_t max_degree = 0;

  bool operator==(const GraphStats&) const = default;
};

GraphStats graph_stats(const VariationGraph& g);
std::string format_stats(const GraphStats& s);     // aligned text
std::string format_stats_kv(const GraphStats& s);  // key=value lines

void save_graph(const VariationGraph& g, const std::filesystem::path& path);
VariationGraph load_graph(const std::filesystem::path& path);

}  // namespace ripple
