#pragma once

#include "fractalnet/energy.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fractalnet {

struct ExtensionMatrices {
  std::vector<RationalMatrix> matrices;
  std::string spec_name;

  std::size_t size() const noexcept { return matrices.size(); }
  const RationalMatrix& operator[](std::size_t j) const { return matrices.at(j); }
};

// The SG matrices with A_0 rows (1,0,0), (2/5,2/5,1/5), (2/5,1/5,2/5).
ExtensionMatrices default_sg_matrices();

// The spec's matrices, checked; throws MatricesMissing when the spec has none.
ExtensionMatrices extension_matrices(const IfsSpec& spec);

// Square, row-stochastic, and A_j fixes its own corner (row j of A_j is e_j).
void check_matrices(const ExtensionMatrices& m, std::size_t symbol_count);

// Second-largest eigenvalue modulus of each A_j.
std::vector<double> second_eigenvalues(const ExtensionMatrices& m);

// Initial data per starting cell: the function on cell w's corners is b, and it
// is carried to deeper levels by b -> A_j b.
using CellData = std::map<Word, RationalVector>;

struct HGFunction {
  ExactVertexFunction values;
  std::size_t level = 0;  // m: levels below m are zero
  CellData cells;
  std::optional<VertexIndex> center;

  VertexFunction approx() const { return to_double(values); }
};

// Harmonic extension of `cells` (all words of length m) over the network.
// Vertices at level >= m inside a starting cell get A_{w_{m+1}}...A_{w_l} b_{w|m}
// at the corner they occupy; every other vertex gets 0. All representations of
// a vertex must agree exactly, else JunctionInconsistency.
HGFunction generate_from_cells(const Network& net, const ExtensionMatrices& m, std::size_t level, CellData cells);

// Global function with initial values u0 on V_0.
HGFunction harmonic_generate(const Network& net, const ExtensionMatrices& m, const RationalVector& u0);

// Localized u_x for x = (xi, m): indicator of xi on every m-cell containing xi.
// Throws LocalizationError when m is below the generation of xi or above M.
HGFunction harmonic_generate_localized(const Network& net, const ExtensionMatrices& m, VertexIndex x);

// u_{K^(m)} for the m-cell K: the sum of u_x over the corners of K.
HGFunction bump(const Network& net, const ExtensionMatrices& m, const Word& cell);

CellData localized_cells(const Attractor& attractor, PointId xi, std::size_t level);
CellData bump_cells(const Attractor& attractor, const Word& cell);

struct SplineValue {
  Point center;
  std::size_t level = 0;
  Word address;
  Rational value;
  std::size_t depth = 0;
  // |value(depth) - value(depth-1)|; zero when depth = level.
  double residual = 0.0;
};

// Value of the piecewise harmonic spline with the given cell data (cells absent
// from the map carry zero) along the
// approximants sigma_{a|n}(q_{a_n}) of `address`, at n = depth. Addresses shorter
// than depth repeat their last symbol, so eventually constant addresses are exact.
SplineValue spline_value(const IfsSpec& spec, const ExtensionMatrices& m, const CellData& cells, std::size_t level,
                         const Word& address, std::size_t depth);
// lim u_(xi, m) along the address.
SplineValue spline_value(const IfsSpec& spec, const ExtensionMatrices& m, const Point& xi, std::size_t level,
                         const Word& address, std::size_t depth);

struct Separation {
  Point center;
  std::size_t level = 0;
  SplineValue alpha;
  SplineValue beta;
};

// Finds (xi, m) with lim u_(xi,m) > threshold along alpha and exactly 0 along beta.
// Throws NotSeparable if no level up to max_level works.
Separation separate(const IfsSpec& spec, const ExtensionMatrices& m, const Word& alpha, const Word& beta,
                    std::size_t depth = 40, std::size_t max_level = 16, double threshold = 1e-9);

}  // namespace fractalnet
