#pragma once

#include "fractalnet/rational.hpp"

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fractalnet {

using Symbol = std::uint8_t;

// A finite word over {0..J}. Infinite addresses are carried as truncated words.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}
  Word(std::initializer_list<int> symbols);

  static Word repeat(Symbol s, std::size_t n) { return Word(std::vector<Symbol>(n, s)); }
  // Digits "0120"; symbols above 9 need the comma form "0,11,3".
  static Word parse(std::string_view text);

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }

  Word prefix(std::size_t n) const;
  Word suffix(std::size_t from) const;
  Word extended(Symbol s) const;
  Word concat(const Word& tail) const;
  bool has_prefix(const Word& p) const;

  std::string to_string() const;

  auto operator<=>(const Word&) const = default;

 private:
  std::vector<Symbol> symbols_;
};

using Point = std::vector<Rational>;

struct AffineMap {
  RationalMatrix matrix;
  Point offset;
  Rational ratio;
  Point fixed_point;

  Point apply(const Point& x) const;

  // Solves (I - matrix) q = offset exactly for the fixed point.
  static AffineMap make(RationalMatrix matrix, Point offset, Rational ratio);
};

struct IfsSpec {
  std::string name;
  std::size_t dimension = 0;
  std::vector<AffineMap> maps;
  // Keyed by (i, j) with i < j.
  std::map<std::pair<std::size_t, std::size_t>, Rational> conductances_v0;
  // Empty means uniform weights 1/(J+1).
  RationalVector vertical_weights;
  std::optional<std::vector<RationalMatrix>> extension_matrices;
  bool vertical_normalization = true;

  std::size_t symbol_count() const noexcept { return maps.size(); }
  Rational conductance(std::size_t i, std::size_t j) const;
  Rational vertical_weight(std::size_t j) const;
  Rational max_ratio() const;
};

IfsSpec sierpinski_gasket_spec();
IfsSpec cantor_spec();

struct ValidationReport {
  std::size_t probe_depth = 0;
  std::vector<std::size_t> points_per_level;
  std::vector<std::size_t> junctions_per_level;
  // Largest number of same-length representations of one point, per level.
  std::vector<std::size_t> max_representations;
  std::vector<std::string> notes;
};

// Square, nonnegative, row-stochastic, and row j of A_j is e_j; else MatrixError.
void check_extension_matrices(const std::vector<RationalMatrix>& matrices, std::size_t symbol_count);

// Throws RegularityViolation, WeightError, MatrixError or SpecError.
ValidationReport validate_spec(const IfsSpec& spec, std::size_t probe_depth = 3);

Point compose_map(const IfsSpec& spec, const Word& w, const Point& x);

// The approximant sigma_{addr|depth}(q_index).
Point address_point(const IfsSpec& spec, const Word& address, std::size_t q_index, std::size_t depth);

using PointId = std::uint32_t;

struct Representation {
  Word word;
  Symbol generator;
};

struct PointRecord {
  Point coords;
  std::size_t generation = 0;
  // Sorted by (word length, word, generator).
  std::vector<Representation> reps;
};

struct Cell {
  Word word;
  std::vector<PointId> boundary;
};

// Rational points of the attractor up to a fixed word depth, interned by exact
// coordinates, together with the corner table of every cell.
class Attractor {
 public:
  Attractor(IfsSpec spec, std::size_t depth);

  const IfsSpec& spec() const noexcept { return spec_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t symbol_count() const noexcept { return spec_.symbol_count(); }

  std::size_t point_count() const noexcept { return points_.size(); }
  const PointRecord& point(PointId p) const { return points_.at(p); }
  const Point& coords(PointId p) const { return points_.at(p).coords; }
  std::size_t generation(PointId p) const { return points_.at(p).generation; }
  std::span<const Representation> representations(PointId p, std::size_t length) const;

  std::optional<PointId> find(const Point& coords) const;
  PointId rational_point(const Word& w, std::size_t q_index) const;

  // Tilde V_k, sorted by coordinates.
  const std::vector<PointId>& level_points(std::size_t k) const;

  std::size_t cell_count(std::size_t level) const;
  std::span<const PointId> cell_corners(std::size_t level, std::size_t cell_index) const;
  std::span<const PointId> cell_corners(const Word& w) const;
  Cell cell(const Word& w) const;
  std::size_t word_index(const Word& w) const;
  Word word_at(std::size_t level, std::size_t index) const;

  // K(xi, m): every m-cell containing p.
  std::vector<Cell> cell_neighborhood(PointId p, std::size_t m) const;
  bool in_cell(PointId p, const Word& w) const;

 private:
  void check_level(std::size_t k) const;

  IfsSpec spec_;
  std::size_t depth_;
  std::vector<PointRecord> points_;
  std::map<Point, PointId> index_;
  std::vector<std::vector<PointId>> level_points_;
  // corners_[k][idx * (J+1) + i] = sigma_w(q_i) for the idx-th word of length k.
  std::vector<std::vector<PointId>> corners_;
};

}  // namespace fractalnet
