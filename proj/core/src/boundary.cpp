#include "fractalnet/boundary.hpp"

#include "fractalnet/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace fractalnet {

BoundaryAddress explicit_address(const Word& w) {
  return BoundaryAddress{w, w.size(), AddressSource::kExplicit};
}

BoundaryAddress address_of_vertex(const Network& net, VertexIndex v, std::size_t depth) {
  if (depth > net.truncation()) {
    throw Error(ErrorCode::kDepthExceedsTruncation,
                fmt::format("address depth {} exceeds truncation {}", depth, net.truncation()));
  }
  const Attractor& att = net.attractor();
  PointId p = net.vertex(v).point;
  std::size_t len = std::max(depth, att.generation(p));
  auto reps = att.representations(p, len);
  if (reps.empty()) {
    throw Error(ErrorCode::kDepthExceedsTruncation, fmt::format("no length-{} representation of vertex {}", len, v));
  }
  // reps are sorted by word, so the first one gives the least prefix at every depth.
  Word w = reps.front().word.prefix(depth);
  for (std::size_t k = 1; k <= depth; ++k) {
    if (!att.in_cell(p, w.prefix(k))) {
      throw Error(ErrorCode::kInvalidPath, fmt::format("address {} is not nested at depth {}", w.to_string(), k));
    }
  }
  return BoundaryAddress{std::move(w), depth, AddressSource::kExtracted};
}

BoundaryAddress address_of_path(const Network& net, const PathSample& path, std::size_t depth) {
  if (!path.absorbed) throw Error(ErrorCode::kInvalidPath, "walk was not absorbed at the frontier");
  return address_of_vertex(net, path.end, depth);
}

SplineValue boundary_limit(const IfsSpec& spec, const ExtensionMatrices& m, const HGFunction& u,
                           const BoundaryAddress& addr) {
  if (addr.depth < u.level) {
    throw Error(ErrorCode::kDepthExceedsTruncation,
                fmt::format("address depth {} is below the function level {}", addr.depth, u.level));
  }
  return spline_value(spec, m, u.cells, u.level, addr.prefix, addr.depth);
}

TestFamily make_test_family(const Network& net, const ExtensionMatrices& m, std::size_t level) {
  TestFamily family{level, {}};
  for (PointId xi : net.attractor().level_points(level)) {
    family.members.push_back(harmonic_generate_localized(net, m, net.index_of(xi, level)));
  }
  return family;
}

bool paths_equivalent(const PathSample& p1, const PathSample& p2, const TestFamily& family, double tol) {
  if (!p1.absorbed || !p2.absorbed) throw Error(ErrorCode::kInvalidPath, "both walks must be absorbed");
  for (const HGFunction& u : family.members) {
    if (std::abs(to_double(u.values[p1.end] - u.values[p2.end])) > tol) return false;
  }
  return true;
}

AddressStability coupled_address_stability(const Network& low, const Network& high, const WalkConfig& config,
                                           std::size_t depth) {
  if (&low.attractor() != &high.attractor() && low.attractor().spec().name != high.attractor().spec().name) {
    throw Error(ErrorCode::kSpecError, "coupled walks need truncations of one attractor");
  }
  struct End {
    bool absorbed = false;
    VertexIndex end = 0;
  };
  auto run = [&](const Network& net) {
    TransitionKernel kernel(net);
    return map_walks(kernel, config, [](std::size_t, Walker& w) {
      while (w.step()) {
      }
      return End{w.absorbed(), w.position()};
    });
  };
  auto a = run(low);
  auto b = run(high);

  AddressStability out;
  out.walks = config.walks;
  std::size_t both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.absorbed_low += a[i].absorbed;
    out.absorbed_high += b[i].absorbed;
    if (!a[i].absorbed || !b[i].absorbed) continue;
    ++both;
    if (address_of_vertex(low, a[i].end, depth).prefix == address_of_vertex(high, b[i].end, depth).prefix) {
      ++out.same_address;
    }
  }
  out.fraction_same = both == 0 ? 0.0 : static_cast<double>(out.same_address) / static_cast<double>(both);
  return out;
}

namespace {

// The point named by the infinite address w s s s ..., s the last symbol of w.
Point limit_point(const IfsSpec& spec, const Word& w) {
  return compose_map(spec, w, spec.maps.at(w[w.size() - 1]).fixed_point);
}

}  // namespace

CorrespondenceReport verify_correspondence(const Attractor& attractor, const ExtensionMatrices& m,
                                           std::span<const Word> addresses, std::size_t depth,
                                           const CorrespondenceOptions& options) {
  const IfsSpec& spec = attractor.spec();
  std::size_t n = options.continuity_depth;
  std::size_t fl = options.family_level;
  if (depth > attractor.depth() || fl > attractor.depth()) {
    throw Error(ErrorCode::kDepthExceedsTruncation,
                fmt::format("attractor depth {} is below {}", attractor.depth(), std::max(depth, fl)));
  }
  if (n < fl) throw Error(ErrorCode::kLocalizationError, "continuity depth is below the family level");
  for (const Word& w : addresses) {
    if (w.size() < std::max<std::size_t>(depth, 1)) {
      throw Error(ErrorCode::kDepthExceedsTruncation, fmt::format("address {} shorter than {}", w.to_string(), depth));
    }
  }

  CorrespondenceReport r;
  r.depth = depth;

  // (i) word -> approximant point -> the depth-cells containing it
  if (depth > 0) {
    for (const Word& w : addresses) {
      ++r.round_trip_tested;
      Word head = w.prefix(depth);
      PointId p = attractor.rational_point(head, head[depth - 1]);
      auto reps = attractor.representations(p, depth);
      bool found = std::any_of(reps.begin(), reps.end(), [&](const Representation& rep) { return rep.word == head; });
      if (!found || !attractor.in_cell(p, head)) ++r.round_trip_failed;
    }
  }

  // (ii) separation
  for (std::size_t i = 0; i < addresses.size(); ++i) {
    for (std::size_t j = i + 1; j < addresses.size(); ++j) {
      if (addresses[i] == addresses[j]) continue;
      ++r.pairs;
      if (limit_point(spec, addresses[i]) == limit_point(spec, addresses[j])) {
        ++r.same_point;
        continue;
      }
      try {
        separate(spec, m, addresses[i], addresses[j], options.spline_depth);
        ++r.separated;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNotSeparable) throw;
      }
    }
  }

  // (iii) continuity on the level-fl family
  r.continuity_depth = n;
  r.continuity_bound = std::pow(to_double(spec.max_ratio()), static_cast<double>(n - fl));
  std::vector<Point> centers;
  for (PointId xi : attractor.level_points(fl)) centers.push_back(attractor.coords(xi));
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> sym(0, static_cast<int>(spec.symbol_count()) - 1);
  for (const Word& alpha : addresses) {
    if (alpha.size() < n) continue;
    std::vector<Symbol> tail;
    for (int k = 0; k < 8; ++k) tail.push_back(static_cast<Symbol>(sym(rng)));
    Word beta = alpha.prefix(n).concat(Word(tail));
    for (const Point& xi : centers) {
      double a = spline_value(spec, m, xi, fl, alpha, options.spline_depth).value.get_d();
      double b = spline_value(spec, m, xi, fl, beta, options.spline_depth).value.get_d();
      r.max_gap = std::max(r.max_gap, std::abs(a - b));
    }
  }
  return r;
}

nlohmann::json to_json(const CorrespondenceReport& r) {
  return {
      {"depth", r.depth},
      {"round_trip", {{"tested", r.round_trip_tested}, {"failed", r.round_trip_failed}}},
      {"separation", {{"pairs", r.pairs}, {"separated", r.separated}, {"same_point", r.same_point}}},
      {"continuity", {{"depth", r.continuity_depth}, {"bound", r.continuity_bound}, {"max_gap", r.max_gap}}},
      {"pass", r.pass()},
  };
}

}  // namespace fractalnet
