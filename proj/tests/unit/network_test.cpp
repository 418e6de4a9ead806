#include "fixtures.hpp"

#include <fractalnet/error.hpp>

#include <gtest/gtest.h>

#include <set>
#include <tuple>

namespace fractalnet {
namespace {

using testing::cantor_attractor;
using testing::cantor_network;
using testing::sg_attractor;
using testing::sg_network;

using PairKey = std::tuple<Point, std::size_t, Point, std::size_t>;

// Brute-force F_k straight from the definition, keyed by unordered coordinate pairs.
std::set<PairKey> vertical_oracle(const IfsSpec& spec, std::size_t k) {
  std::set<PairKey> out;
  const std::size_t n = spec.symbol_count();
  std::vector<Word> words{Word{}};
  for (std::size_t l = 0; l + 1 < k; ++l) {
    std::vector<Word> next;
    for (const auto& w : words) {
      for (std::size_t s = 0; s < n; ++s) next.push_back(w.extended(static_cast<Symbol>(s)));
    }
    words = std::move(next);
  }
  for (const auto& w : words) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Point lo = compose_map(spec, w, spec.maps[i].fixed_point);
        Point hi = compose_map(spec, w.extended(static_cast<Symbol>(j)), spec.maps[i].fixed_point);
        out.emplace(lo, k - 1, hi, k);
      }
    }
  }
  return out;
}

TEST(LevelGraph, SierpinskiCounts) {
  const auto a = sg_attractor(3);
  auto e0 = build_level_graph(*a, 0);
  ASSERT_EQ(e0.size(), 3u);
  for (const auto& e : e0) EXPECT_EQ(e.conductance, 1);
  auto e1 = build_level_graph(*a, 1);
  ASSERT_EQ(e1.size(), 9u);
  for (const auto& e : e1) EXPECT_EQ(e.conductance, Rational(5, 3));
  auto e3 = build_level_graph(*a, 3);
  EXPECT_EQ(e3.size(), 81u);
  for (const auto& e : e3) EXPECT_EQ(e.conductance, Rational(125, 27));
}

TEST(LevelGraph, CantorComponents) {
  const auto a = cantor_attractor(2);
  auto e2 = build_level_graph(*a, 2);
  ASSERT_EQ(e2.size(), 4u);
  for (const auto& e : e2) EXPECT_EQ(e.conductance, 9);
}

TEST(VerticalEdges, SierpinskiMatchesFormulaAndOracle) {
  const auto a = sg_attractor(4);
  std::size_t pow3 = 1;
  for (std::size_t k = 1; k <= 4; ++k) {
    pow3 *= 3;
    const auto edges = build_vertical_edges(*a, k);
    EXPECT_EQ(edges.size(), (3 + 5 * pow3) / 2) << "k=" << k;
    const auto oracle = vertical_oracle(a->spec(), k);
    EXPECT_EQ(edges.size(), oracle.size());
    for (const auto& e : edges) {
      EXPECT_TRUE(oracle.count({a->coords(e.lower.point), e.lower.level, a->coords(e.upper.point), e.upper.level}));
      EXPECT_EQ(e.conductance, 1);
    }
  }
}

TEST(VerticalEdges, CantorLevelOne) {
  EXPECT_EQ(build_vertical_edges(*cantor_attractor(2), 1).size(), 4u);
}

TEST(VerticalEdges, WeightsWithoutNormalization) {
  IfsSpec spec = cantor_spec();
  spec.vertical_normalization = false;
  spec.vertical_weights = {Rational(1, 4), Rational(3, 4)};
  Attractor a(spec, 2);
  for (const auto& e : build_vertical_edges(a, 1)) {
    // Upper point sigma_j(q_i): j is recoverable from which half it lies in.
    const Rational x = a.coords(e.upper.point)[0];
    EXPECT_EQ(e.conductance, x <= Rational(1, 3) ? Rational(1, 4) : Rational(3, 4));
  }
}

TEST(BuildNetwork, SierpinskiLevelOne) {
  const Network& net = sg_network(1);
  EXPECT_EQ(net.vertex_count(), 9u);
  EXPECT_EQ(net.edge_count(), 21u);
  const auto counts = level_counts(net);
  EXPECT_EQ(counts[0].horizontal_edges, 3u);
  EXPECT_EQ(counts[1].horizontal_edges, 9u);
  EXPECT_EQ(counts[1].vertical_edges, 9u);
}

TEST(BuildNetwork, VertexCountsMatchEnumeration) {
  for (std::size_t m = 1; m <= 5; ++m) {
    const Network& net = sg_network(m);
    std::size_t expected = 0, pow3 = 1;
    for (std::size_t k = 0; k <= m; ++k, pow3 *= 3) expected += (3 * pow3 + 3) / 2;
    EXPECT_EQ(net.vertex_count(), expected) << "M=" << m;
    EXPECT_TRUE(is_connected(net));
  }
  EXPECT_EQ(cantor_network(2).vertex_count(), 14u);
  EXPECT_TRUE(is_connected(cantor_network(4)));
}

TEST(BuildNetwork, RejectsZeroTruncation) {
  EXPECT_THROW(Network::build(sg_attractor(1), 0), Error);
}

TEST(BuildNetwork, EdgeInvariants) {
  const Network& net = sg_network(4);
  std::set<std::pair<VertexIndex, VertexIndex>> seen;
  for (const Edge& e : net.edges()) {
    EXPECT_GT(e.conductance, 0);
    const auto& lu = net.vertex(e.u).level;
    const auto& lv = net.vertex(e.v).level;
    if (e.kind == EdgeKind::kHorizontal) {
      EXPECT_EQ(lu, lv);
    } else {
      EXPECT_EQ(std::max(lu, lv) - std::min(lu, lv), 1u);
    }
    EXPECT_TRUE(seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) << "parallel edge";
  }
  for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
    Rational sum = 0;
    for (const auto& nb : net.neighbors(v)) {
      sum += net.edge(nb.edge).conductance;
      // Symmetric adjacency.
      bool back = false;
      for (const auto& nb2 : net.neighbors(nb.vertex)) back |= nb2.vertex == v;
      EXPECT_TRUE(back);
    }
    EXPECT_EQ(sum, net.total_conductance(v));
    EXPECT_GT(sum, 0);
  }
}

TEST(BuildNetwork, HorizontalConductanceScaling) {
  const Network& net = sg_network(3);
  for (const Edge& e : net.edges()) {
    if (e.kind != EdgeKind::kHorizontal) continue;
    Rational expected = 1;
    for (std::size_t t = 0; t < e.level; ++t) expected /= Rational(3, 5);
    EXPECT_EQ(e.conductance, expected);
  }
}

TEST(BuildNetwork, LowerLevelsIndexedConsistently) {
  const Network& small = sg_network(3);
  const Network& large = sg_network(5);
  for (VertexIndex v = 0; v < small.level_end(3); ++v) {
    EXPECT_EQ(small.coords(v), large.coords(v));
    EXPECT_EQ(small.vertex(v).level, large.vertex(v).level);
  }
}

TEST(TotalConductance, Root) {
  EXPECT_EQ(total_conductance(sg_network(2), sg_network(2).root()), 5);
  EXPECT_EQ(total_conductance(cantor_network(2), cantor_network(2).root()), 3);
}

TEST(DirectlyAbove, AdjacentEverywhereBelowFrontier) {
  const Network& net = sg_network(4);
  for (VertexIndex v = 0; v < net.interior_count(); ++v) {
    const VertexIndex up = directly_above(net, v);
    EXPECT_EQ(net.vertex(up).point, net.vertex(v).point);
    EXPECT_EQ(net.vertex(up).level, net.vertex(v).level + 1);
    const Edge* e = net.edge_between(v, up);
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->kind, EdgeKind::kVertical);
  }
  try {
    directly_above(net, static_cast<VertexIndex>(net.vertex_count() - 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncationBoundary);
  }
}

TEST(DirectlyBelow, KnownValues) {
  const Network& net = sg_network(3);
  const auto& a = net.attractor();
  const PointId q0 = a.rational_point(Word{}, 0);
  const PointId mid = a.rational_point(Word{0}, 1);
  auto below = directly_below(net, net.index_of(q0, 3));
  ASSERT_TRUE(below);
  EXPECT_EQ(*below, net.index_of(q0, 2));
  EXPECT_FALSE(directly_below(net, net.index_of(mid, 1)));
  below = directly_below(net, net.index_of(mid, 2));
  ASSERT_TRUE(below);
  EXPECT_EQ(*below, net.index_of(mid, 1));
}

TEST(DirectlyAbove, JunctionHasSingleVerticalEdge) {
  const Network& net = sg_network(2);
  const PointId mid = net.attractor().rational_point(Word{0}, 1);
  const VertexIndex v = net.index_of(mid, 1);
  std::size_t up = 0;
  for (const auto& nb : net.neighbors(v)) up += nb.vertex == net.index_of(mid, 2);
  EXPECT_EQ(up, 1u);
}

TEST(BuildNetwork, CustomRoot) {
  const auto a = sg_attractor(2);
  const PointId q1 = a->rational_point(Word{}, 1);
  const Network net = Network::build(a, 2, Vertex{q1, 0});
  EXPECT_EQ(net.vertex(net.root()).point, q1);
  EXPECT_THROW(Network::build(a, 2, Vertex{q1, 2}), Error);
}

}  // namespace
}  // namespace fractalnet
