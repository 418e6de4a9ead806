#pragma once

#include "fractalnet/attractor.hpp"

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace fractalnet {

// (xi, k): the rational point xi placed at level k of the network.
struct Vertex {
  PointId point = 0;
  std::size_t level = 0;

  auto operator<=>(const Vertex&) const = default;
};

enum class EdgeKind : std::uint8_t { kHorizontal, kVertical };

const char* to_string(EdgeKind kind);

// An edge described by its endpoints; `lower` precedes `upper` in (level, coords) order.
struct EdgeSpec {
  Vertex lower;
  Vertex upper;
  Rational conductance;
  EdgeKind kind = EdgeKind::kHorizontal;
  std::size_t level = 0;
};

// E_k: copies of the V_0 graph inside every k-cell, conductance c_{q_i q_j} / r_w.
// Parallel copies collapse to one edge.
std::vector<EdgeSpec> build_level_graph(const Attractor& attractor, std::size_t k);

// F_k: [(sigma_w(q_i), k-1), (sigma_{wj}(q_i), k)] for |w| = k-1, as a set.
std::vector<EdgeSpec> build_vertical_edges(const Attractor& attractor, std::size_t k);

using VertexIndex = std::uint32_t;

struct Edge {
  VertexIndex u = 0;
  VertexIndex v = 0;
  Rational conductance;
  double weight = 0.0;
  EdgeKind kind = EdgeKind::kHorizontal;
  std::size_t level = 0;
};

struct Neighbor {
  VertexIndex vertex = 0;
  double conductance = 0.0;
  std::uint32_t edge = 0;
};

// The truncated network on levels 0..M. Vertices are indexed in (level, coords)
// order, so indices of levels below min(M, M') agree between two truncations of
// the same attractor. Level-M vertices form the frontier.
class Network {
 public:
  static Network build(std::shared_ptr<const Attractor> attractor, std::size_t truncation,
                       std::optional<Vertex> root = std::nullopt);

  const Attractor& attractor() const noexcept { return *attractor_; }
  const std::shared_ptr<const Attractor>& attractor_ptr() const noexcept { return attractor_; }
  std::size_t truncation() const noexcept { return truncation_; }

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const Vertex& vertex(VertexIndex v) const { return vertices_.at(v); }
  std::span<const Vertex> vertices() const noexcept { return vertices_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(VertexIndex v) const;

  const Rational& total_conductance(VertexIndex v) const { return total_conductance_.at(v); }
  double total_conductance_d(VertexIndex v) const { return total_conductance_d_.at(v); }

  VertexIndex root() const noexcept { return root_; }
  bool is_frontier(VertexIndex v) const { return vertices_.at(v).level == truncation_; }
  // Non-frontier vertices occupy [0, interior_count()).
  std::size_t interior_count() const noexcept { return level_begin(truncation_); }
  std::size_t level_begin(std::size_t level) const { return level_offsets_.at(level); }
  std::size_t level_end(std::size_t level) const { return level_offsets_.at(level + 1); }

  std::optional<VertexIndex> find(const Vertex& v) const;
  VertexIndex index_of(const Vertex& v) const;
  VertexIndex index_of(PointId point, std::size_t level) const { return index_of(Vertex{point, level}); }
  const Edge* edge_between(VertexIndex a, VertexIndex b) const;

  const Point& coords(VertexIndex v) const { return attractor_->coords(vertices_.at(v).point); }

 private:
  Network() = default;

  std::shared_ptr<const Attractor> attractor_;
  std::size_t truncation_ = 0;
  std::vector<Vertex> vertices_;
  std::vector<std::size_t> level_offsets_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<Rational> total_conductance_;
  std::vector<double> total_conductance_d_;
  std::unordered_map<std::uint64_t, VertexIndex> lookup_;
  VertexIndex root_ = 0;
};

// Builds an attractor of matching depth and the truncated network on it.
Network build_network(const IfsSpec& spec, std::size_t truncation);

// (xi, k+1); throws TruncationBoundary at the frontier.
VertexIndex directly_above(const Network& net, VertexIndex v);

// (xi, k-1) when xi already exists at level k-1.
std::optional<VertexIndex> directly_below(const Network& net, VertexIndex v);

Rational total_conductance(const Network& net, VertexIndex v);

bool is_connected(const Network& net);

struct LevelCounts {
  std::size_t level = 0;
  std::size_t vertices = 0;
  std::size_t horizontal_edges = 0;
  std::size_t vertical_edges = 0;
};

std::vector<LevelCounts> level_counts(const Network& net);

}  // namespace fractalnet
