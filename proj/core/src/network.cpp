#include "fractalnet/network.hpp"

#include "fractalnet/error.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace fractalnet {

const char* to_string(EdgeKind kind) { return kind == EdgeKind::kHorizontal ? "horizontal" : "vertical"; }

namespace {

std::uint64_t vertex_key(const Vertex& v) { return (static_cast<std::uint64_t>(v.level) << 32) | v.point; }

bool vertex_less(const Attractor& a, const Vertex& x, const Vertex& y) {
  if (x.level != y.level) return x.level < y.level;
  return a.coords(x.point) < a.coords(y.point);
}

// Collapses generated edges to a set keyed by the unordered endpoint pair; the
// first generated copy wins.
class EdgeSet {
 public:
  explicit EdgeSet(const Attractor& a) : attractor_(a) {}

  void add(Vertex a, Vertex b, const Rational& c, EdgeKind kind, std::size_t level) {
    if (vertex_less(attractor_, b, a)) std::swap(a, b);
    auto key = std::make_pair(vertex_key(a), vertex_key(b));
    if (seen_.emplace(key, edges_.size()).second) edges_.push_back(EdgeSpec{a, b, c, kind, level});
  }

  std::vector<EdgeSpec> take() {
    std::sort(edges_.begin(), edges_.end(), [this](const EdgeSpec& x, const EdgeSpec& y) {
      if (x.lower != y.lower) return vertex_less(attractor_, x.lower, y.lower);
      return vertex_less(attractor_, x.upper, y.upper);
    });
    return std::move(edges_);
  }

 private:
  const Attractor& attractor_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> seen_;
  std::vector<EdgeSpec> edges_;
};

}  // namespace

std::vector<EdgeSpec> build_level_graph(const Attractor& attractor, std::size_t k) {
  const auto& spec = attractor.spec();
  const std::size_t n = spec.symbol_count();
  EdgeSet set(attractor);
  // Products r_w, built level by level in word-index order.
  std::vector<Rational> ratio{Rational(1)};
  for (std::size_t level = 1; level <= k; ++level) {
    std::vector<Rational> next;
    next.reserve(ratio.size() * n);
    for (const auto& r : ratio) {
      for (std::size_t s = 0; s < n; ++s) next.push_back(r * spec.maps[s].ratio);
    }
    ratio = std::move(next);
  }
  for (std::size_t idx = 0; idx < attractor.cell_count(k); ++idx) {
    auto corners = attractor.cell_corners(k, idx);
    for (const auto& [key, c] : spec.conductances_v0) {
      set.add(Vertex{corners[key.first], k}, Vertex{corners[key.second], k}, c / ratio[idx], EdgeKind::kHorizontal, k);
    }
  }
  return set.take();
}

std::vector<EdgeSpec> build_vertical_edges(const Attractor& attractor, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kSpecError, "vertical edges start at level 1");
  const auto& spec = attractor.spec();
  const std::size_t n = spec.symbol_count();
  EdgeSet set(attractor);
  for (std::size_t idx = 0; idx < attractor.cell_count(k - 1); ++idx) {
    auto parent = attractor.cell_corners(k - 1, idx);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto child = attractor.cell_corners(k, idx * n + j);
        Rational c = spec.vertical_normalization ? Rational(1) : spec.vertical_weight(j);
        set.add(Vertex{parent[i], k - 1}, Vertex{child[i], k}, c, EdgeKind::kVertical, k);
      }
    }
  }
  return set.take();
}

Network Network::build(std::shared_ptr<const Attractor> attractor, std::size_t truncation, std::optional<Vertex> root) {
  if (!attractor) throw Error(ErrorCode::kSpecError, "null attractor");
  if (truncation == 0) throw Error(ErrorCode::kSpecError, "truncation level must be at least 1");
  if (truncation > attractor->depth()) {
    throw Error(ErrorCode::kDepthExceedsTruncation, "attractor depth is smaller than the truncation level");
  }
  Network net;
  net.attractor_ = std::move(attractor);
  net.truncation_ = truncation;
  const Attractor& a = *net.attractor_;

  net.level_offsets_.push_back(0);
  for (std::size_t k = 0; k <= truncation; ++k) {
    for (PointId p : a.level_points(k)) {
      net.lookup_.emplace(vertex_key(Vertex{p, k}), static_cast<VertexIndex>(net.vertices_.size()));
      net.vertices_.push_back(Vertex{p, k});
    }
    net.level_offsets_.push_back(net.vertices_.size());
  }

  auto append = [&](const std::vector<EdgeSpec>& specs) {
    for (const auto& e : specs) {
      net.edges_.push_back(Edge{net.index_of(e.lower), net.index_of(e.upper), e.conductance, to_double(e.conductance),
                                e.kind, e.level});
    }
  };
  for (std::size_t k = 0; k <= truncation; ++k) append(build_level_graph(a, k));
  for (std::size_t k = 1; k <= truncation; ++k) append(build_vertical_edges(a, k));

  const std::size_t nv = net.vertices_.size();
  std::vector<std::size_t> degree(nv, 0);
  for (const auto& e : net.edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  net.adjacency_offsets_.assign(nv + 1, 0);
  for (std::size_t v = 0; v < nv; ++v) net.adjacency_offsets_[v + 1] = net.adjacency_offsets_[v] + degree[v];
  net.adjacency_.resize(net.adjacency_offsets_[nv]);
  std::vector<std::size_t> fill(net.adjacency_offsets_.begin(), net.adjacency_offsets_.end() - 1);
  for (std::size_t e = 0; e < net.edges_.size(); ++e) {
    const auto& edge = net.edges_[e];
    net.adjacency_[fill[edge.u]++] = Neighbor{edge.v, edge.weight, static_cast<std::uint32_t>(e)};
    net.adjacency_[fill[edge.v]++] = Neighbor{edge.u, edge.weight, static_cast<std::uint32_t>(e)};
  }
  net.total_conductance_.assign(nv, Rational(0));
  net.total_conductance_d_.assign(nv, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    auto begin = net.adjacency_.begin() + static_cast<std::ptrdiff_t>(net.adjacency_offsets_[v]);
    auto end = net.adjacency_.begin() + static_cast<std::ptrdiff_t>(net.adjacency_offsets_[v + 1]);
    std::sort(begin, end, [](const Neighbor& x, const Neighbor& y) { return x.vertex < y.vertex; });
    for (auto it = begin; it != end; ++it) net.total_conductance_[v] += net.edges_[it->edge].conductance;
    net.total_conductance_d_[v] = to_double(net.total_conductance_[v]);
  }

  Vertex r = root.value_or(Vertex{a.rational_point(Word{}, 0), 0});
  if (r.level >= truncation) throw Error(ErrorCode::kFrontierCenter, "root must lie below the frontier");
  net.root_ = net.index_of(r);
  return net;
}

std::span<const Neighbor> Network::neighbors(VertexIndex v) const {
  return std::span<const Neighbor>(adjacency_).subspan(adjacency_offsets_.at(v),
                                                       adjacency_offsets_.at(v + 1) - adjacency_offsets_[v]);
}

std::optional<VertexIndex> Network::find(const Vertex& v) const {
  auto it = lookup_.find(vertex_key(v));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

VertexIndex Network::index_of(const Vertex& v) const {
  auto idx = find(v);
  if (!idx) {
    throw Error(ErrorCode::kSpecError,
                "vertex (point " + std::to_string(v.point) + ", level " + std::to_string(v.level) + ") not in network");
  }
  return *idx;
}

const Edge* Network::edge_between(VertexIndex a, VertexIndex b) const {
  auto nbrs = neighbors(a);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b, [](const Neighbor& n, VertexIndex x) { return n.vertex < x; });
  if (it == nbrs.end() || it->vertex != b) return nullptr;
  return &edges_[it->edge];
}

Network build_network(const IfsSpec& spec, std::size_t truncation) {
  return Network::build(std::make_shared<const Attractor>(spec, truncation), truncation);
}

VertexIndex directly_above(const Network& net, VertexIndex v) {
  const Vertex& x = net.vertex(v);
  if (x.level >= net.truncation()) throw Error(ErrorCode::kTruncationBoundary, "vertex lies on the frontier");
  VertexIndex up = net.index_of(Vertex{x.point, x.level + 1});
  const Edge* e = net.edge_between(v, up);
  if (e == nullptr || e->kind != EdgeKind::kVertical) {
    throw Error(ErrorCode::kSpecError, "vertex above is not joined by a vertical edge");
  }
  return up;
}

std::optional<VertexIndex> directly_below(const Network& net, VertexIndex v) {
  const Vertex& x = net.vertex(v);
  if (x.level == 0 || net.attractor().generation(x.point) + 1 > x.level) return std::nullopt;
  return net.find(Vertex{x.point, x.level - 1});
}

Rational total_conductance(const Network& net, VertexIndex v) {
  Rational sum = 0;
  for (const auto& n : net.neighbors(v)) sum += net.edge(n.edge).conductance;
  return sum;
}

bool is_connected(const Network& net) {
  if (net.vertex_count() == 0) return true;
  std::vector<char> seen(net.vertex_count(), 0);
  std::deque<VertexIndex> queue{net.root()};
  seen[net.root()] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    VertexIndex v = queue.front();
    queue.pop_front();
    for (const auto& n : net.neighbors(v)) {
      if (!seen[n.vertex]) {
        seen[n.vertex] = 1;
        ++reached;
        queue.push_back(n.vertex);
      }
    }
  }
  return reached == net.vertex_count();
}

std::vector<LevelCounts> level_counts(const Network& net) {
  std::vector<LevelCounts> out(net.truncation() + 1);
  for (std::size_t k = 0; k <= net.truncation(); ++k) {
    out[k].level = k;
    out[k].vertices = net.level_end(k) - net.level_begin(k);
  }
  for (const auto& e : net.edges()) {
    if (e.kind == EdgeKind::kHorizontal) {
      ++out[e.level].horizontal_edges;
    } else {
      ++out[e.level].vertical_edges;
    }
  }
  return out;
}

}  // namespace fractalnet
