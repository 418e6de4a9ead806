#include "fractalnet/harmonic.hpp"

#include "fractalnet/error.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <set>

namespace fractalnet {

namespace {

void check_cells(const CellData& cells, std::size_t level, std::size_t n) {
  for (const auto& [w, b] : cells) {
    if (w.size() != level) {
      throw Error(ErrorCode::kLocalizationError, fmt::format("cell {} is not at level {}", w.to_string(), level));
    }
    if (b.size() != n) throw Error(ErrorCode::kSpecError, "cell data must have one value per corner");
  }
}

RationalVector indicator(std::size_t n, const std::function<bool(std::size_t)>& hit) {
  RationalVector b(n, 0);
  for (std::size_t i = 0; i < n; ++i) b[i] = hit(i) ? 1 : 0;
  return b;
}

}  // namespace

ExtensionMatrices default_sg_matrices() {
  const IfsSpec sg = sierpinski_gasket_spec();
  return ExtensionMatrices{*sg.extension_matrices, sg.name};
}

ExtensionMatrices extension_matrices(const IfsSpec& spec) {
  if (!spec.extension_matrices) {
    throw Error(ErrorCode::kMatricesMissing, fmt::format("spec '{}' has no extension_matrices", spec.name));
  }
  ExtensionMatrices m{*spec.extension_matrices, spec.name};
  check_matrices(m, spec.symbol_count());
  return m;
}

void check_matrices(const ExtensionMatrices& m, std::size_t symbol_count) {
  check_extension_matrices(m.matrices, symbol_count);
}

std::vector<double> second_eigenvalues(const ExtensionMatrices& m) {
  std::vector<double> out;
  for (const auto& a : m.matrices) {
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd dense(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) dense(i, j) = a[i][j].get_d();
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
    std::vector<double> mods;
    for (Eigen::Index i = 0; i < n; ++i) mods.push_back(std::abs(solver.eigenvalues()[i]));
    std::sort(mods.rbegin(), mods.rend());
    out.push_back(mods.size() > 1 ? mods[1] : 0.0);
  }
  return out;
}

HGFunction generate_from_cells(const Network& net, const ExtensionMatrices& m, std::size_t level, CellData cells) {
  const Attractor& attr = net.attractor();
  const std::size_t n = attr.symbol_count();
  const std::size_t top = net.truncation();
  check_matrices(m, n);
  check_cells(cells, level, n);
  if (level > top) {
    throw Error(ErrorCode::kLocalizationError, fmt::format("level {} above truncation {}", level, top));
  }

  HGFunction out{ExactVertexFunction(net), level, std::move(cells), std::nullopt};
  // current[idx] holds A_{w_{m+1}}...A_{w_l} b for the idx-th word of length l.
  std::vector<RationalVector> current(attr.cell_count(level));
  for (const auto& [w, b] : out.cells) current[attr.word_index(w)] = b;

  for (std::size_t l = level;; ++l) {
    for (std::size_t v = net.level_begin(l); v < net.level_end(l); ++v) {
      const PointId p = net.vertex(static_cast<VertexIndex>(v)).point;
      const Rational* assigned = nullptr;
      for (const auto& rep : attr.representations(p, l)) {
        const auto& vec = current[attr.word_index(rep.word)];
        if (vec.empty()) continue;
        const Rational& value = vec[rep.generator];
        if (assigned && *assigned != value) {
          throw Error(ErrorCode::kJunctionInconsistency,
                      fmt::format("vertex {} at level {} receives {} and {}", v, l, format_rational(*assigned),
                                  format_rational(value)));
        }
        assigned = &value;
      }
      if (assigned) out.values[static_cast<VertexIndex>(v)] = *assigned;
    }
    if (l == top) break;
    std::vector<RationalVector> next(attr.cell_count(l + 1));
    for (std::size_t idx = 0; idx < current.size(); ++idx) {
      if (current[idx].empty()) continue;
      for (std::size_t j = 0; j < n; ++j) next[idx * n + j] = mat_vec(m[j], current[idx]);
    }
    current = std::move(next);
  }
  return out;
}

HGFunction harmonic_generate(const Network& net, const ExtensionMatrices& m, const RationalVector& u0) {
  return generate_from_cells(net, m, 0, CellData{{Word{}, u0}});
}

CellData localized_cells(const Attractor& attractor, PointId xi, std::size_t level) {
  if (level < attractor.generation(xi)) {
    throw Error(ErrorCode::kLocalizationError,
                fmt::format("level {} is below the generation {} of the center", level, attractor.generation(xi)));
  }
  if (level > attractor.depth()) {
    throw Error(ErrorCode::kLocalizationError, fmt::format("level {} beyond attractor depth", level));
  }
  CellData cells;
  for (const Cell& c : attractor.cell_neighborhood(xi, level)) {
    cells[c.word] = indicator(c.boundary.size(), [&](std::size_t i) { return c.boundary[i] == xi; });
  }
  return cells;
}

HGFunction harmonic_generate_localized(const Network& net, const ExtensionMatrices& m, VertexIndex x) {
  const Vertex& vx = net.vertex(x);
  HGFunction out = generate_from_cells(net, m, vx.level, localized_cells(net.attractor(), vx.point, vx.level));
  out.center = x;
  return out;
}

CellData bump_cells(const Attractor& attractor, const Word& cell) {
  const std::size_t level = cell.size();
  if (level > attractor.depth()) {
    throw Error(ErrorCode::kLocalizationError, fmt::format("cell {} beyond attractor depth", cell.to_string()));
  }
  const auto corners = attractor.cell_corners(cell);
  const std::set<PointId> inside(corners.begin(), corners.end());
  CellData cells;
  for (PointId xi : inside) {
    for (const Cell& c : attractor.cell_neighborhood(xi, level)) {
      cells[c.word] = indicator(c.boundary.size(), [&](std::size_t i) { return inside.count(c.boundary[i]) > 0; });
    }
  }
  return cells;
}

HGFunction bump(const Network& net, const ExtensionMatrices& m, const Word& cell) {
  return generate_from_cells(net, m, cell.size(), bump_cells(net.attractor(), cell));
}

SplineValue spline_value(const IfsSpec& spec, const ExtensionMatrices& m, const CellData& cells, std::size_t level,
                         const Word& address, std::size_t depth) {
  const std::size_t n = spec.symbol_count();
  check_matrices(m, n);
  check_cells(cells, level, n);
  if (depth < level) throw Error(ErrorCode::kSpecError, "spline depth below the cell level");
  if (address.empty() && depth > 0) throw Error(ErrorCode::kSpecError, "empty address");
  for (Symbol s : address.symbols()) {
    if (s >= n) throw Error(ErrorCode::kSymbolOutOfRange, "address symbol out of range");
  }
  auto symbol = [&](std::size_t i) { return i < address.size() ? address[i] : address[address.size() - 1]; };

  SplineValue out;
  out.level = level;
  out.address = address;
  out.depth = depth;
  Word head;
  for (std::size_t i = 0; i < level; ++i) head = head.extended(symbol(i));
  auto it = cells.find(head);
  if (it == cells.end()) {
    out.value = 0;
    return out;
  }
  // vec after processing symbols level..k-1 is the data on cell a|k.
  RationalVector vec = it->second;
  Rational previous = 0;
  for (std::size_t k = level;; ++k) {
    const Symbol q = k == 0 ? Symbol{0} : symbol(k - 1);
    const Rational value = vec[q];
    if (k == depth) {
      out.value = value;
      out.residual = k == level ? 0.0 : std::abs(Rational(value - previous).get_d());
      break;
    }
    previous = value;
    vec = mat_vec(m[symbol(k)], vec);
  }
  return out;
}

SplineValue spline_value(const IfsSpec& spec, const ExtensionMatrices& m, const Point& xi, std::size_t level,
                         const Word& address, std::size_t depth) {
  const std::size_t n = spec.symbol_count();
  Word head;
  for (std::size_t i = 0; i < level; ++i) {
    head = head.extended(i < address.size() ? address[i] : address[address.size() - 1]);
  }
  CellData cells;
  cells[head] = indicator(n, [&](std::size_t i) { return compose_map(spec, head, spec.maps[i].fixed_point) == xi; });
  SplineValue out = spline_value(spec, m, cells, level, address, depth);
  out.center = xi;
  return out;
}

Separation separate(const IfsSpec& spec, const ExtensionMatrices& m, const Word& alpha, const Word& beta,
                    std::size_t depth, std::size_t max_level, double threshold) {
  if (alpha.empty() || beta.empty()) throw Error(ErrorCode::kSpecError, "addresses must be nonempty");
  const std::size_t n = spec.symbol_count();
  auto pad = [](const Word& w, std::size_t len) {
    std::vector<Symbol> s = w.symbols();
    while (s.size() < len) s.push_back(s.back());
    return Word(std::move(s));
  };
  for (std::size_t level = 1; level <= max_level && level <= depth; ++level) {
    const Word a_head = pad(alpha, level).prefix(level);
    const Word b_head = pad(beta, level).prefix(level);
    std::set<Point> beta_corners;
    for (std::size_t i = 0; i < n; ++i) beta_corners.insert(compose_map(spec, b_head, spec.maps[i].fixed_point));

    std::optional<Separation> best;
    for (std::size_t i = 0; i < n; ++i) {
      const Point xi = compose_map(spec, a_head, spec.maps[i].fixed_point);
      if (beta_corners.count(xi)) continue;
      SplineValue a = spline_value(spec, m, xi, level, alpha, depth);
      if (a.value.get_d() <= threshold) continue;
      if (!best || a.value > best->alpha.value) {
        SplineValue b = spline_value(spec, m, xi, level, beta, depth);
        best = Separation{xi, level, std::move(a), std::move(b)};
      }
    }
    if (best) return *best;
  }
  throw Error(ErrorCode::kNotSeparable,
              fmt::format("addresses {} and {} are not separated up to level {}", alpha.to_string(), beta.to_string(),
                          max_level));
}

}  // namespace fractalnet
