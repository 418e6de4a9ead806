#include "fractalnet/attractor.hpp"

#include "fractalnet/error.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace fractalnet {

Word::Word(std::initializer_list<int> symbols) {
  symbols_.reserve(symbols.size());
  for (int s : symbols) {
    if (s < 0 || s > 255) throw Error(ErrorCode::kSymbolOutOfRange, "symbol " + std::to_string(s));
    symbols_.push_back(static_cast<Symbol>(s));
  }
}

Word Word::parse(std::string_view text) {
  std::vector<Symbol> out;
  if (text.find(',') != std::string_view::npos) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t next = text.find(',', pos);
      if (next == std::string_view::npos) next = text.size();
      std::string token(text.substr(pos, next - pos));
      if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw Error(ErrorCode::kSpecError, "malformed word '" + std::string(text) + "'");
      }
      int value = std::stoi(token);
      if (value > 255) throw Error(ErrorCode::kSymbolOutOfRange, token);
      out.push_back(static_cast<Symbol>(value));
      pos = next + 1;
    }
    return Word(std::move(out));
  }
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw Error(ErrorCode::kSpecError, "malformed word '" + std::string(text) + "'");
    }
    out.push_back(static_cast<Symbol>(c - '0'));
  }
  return Word(std::move(out));
}

Word Word::prefix(std::size_t n) const {
  n = std::min(n, symbols_.size());
  return Word(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(n)));
}

Word Word::suffix(std::size_t from) const {
  from = std::min(from, symbols_.size());
  return Word(std::vector<Symbol>(symbols_.begin() + static_cast<std::ptrdiff_t>(from), symbols_.end()));
}

Word Word::extended(Symbol s) const {
  Word out = *this;
  out.symbols_.push_back(s);
  return out;
}

Word Word::concat(const Word& tail) const {
  Word out = *this;
  out.symbols_.insert(out.symbols_.end(), tail.symbols_.begin(), tail.symbols_.end());
  return out;
}

bool Word::has_prefix(const Word& p) const {
  return p.size() <= size() && std::equal(p.symbols_.begin(), p.symbols_.end(), symbols_.begin());
}

std::string Word::to_string() const {
  bool wide = std::any_of(symbols_.begin(), symbols_.end(), [](Symbol s) { return s > 9; });
  std::string out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (wide && i > 0) out += ',';
    out += std::to_string(static_cast<int>(symbols_[i]));
  }
  return out;
}

Point AffineMap::apply(const Point& x) const {
  Point out = mat_vec(matrix, x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += offset[i];
  return out;
}

AffineMap AffineMap::make(RationalMatrix matrix, Point offset, Rational ratio) {
  const std::size_t d = offset.size();
  if (matrix.size() != d || std::any_of(matrix.begin(), matrix.end(), [d](const RationalVector& row) { return row.size() != d; })) {
    throw Error(ErrorCode::kSpecError, "map matrix must be d x d with d = offset length");
  }
  // Gauss-Jordan on [I - M | b].
  RationalMatrix aug(d, RationalVector(d + 1));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) aug[i][j] = (i == j ? Rational(1) : Rational(0)) - matrix[i][j];
    aug[i][d] = offset[i];
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    while (pivot < d && aug[pivot][col] == 0) ++pivot;
    if (pivot == d) throw Error(ErrorCode::kSpecError, "map has no unique fixed point");
    std::swap(aug[pivot], aug[col]);
    Rational inv = 1 / aug[col][col];
    for (auto& v : aug[col]) v *= inv;
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col || aug[r][col] == 0) continue;
      Rational f = aug[r][col];
      for (std::size_t c = col; c <= d; ++c) aug[r][c] -= f * aug[col][c];
    }
  }
  Point fixed(d);
  for (std::size_t i = 0; i < d; ++i) fixed[i] = aug[i][d];
  return AffineMap{std::move(matrix), std::move(offset), std::move(ratio), std::move(fixed)};
}

Rational IfsSpec::conductance(std::size_t i, std::size_t j) const {
  if (i == j) return 0;
  auto it = conductances_v0.find({std::min(i, j), std::max(i, j)});
  return it == conductances_v0.end() ? Rational(0) : it->second;
}

Rational IfsSpec::vertical_weight(std::size_t j) const {
  if (vertical_weights.empty()) return Rational(1, static_cast<unsigned long>(symbol_count()));
  return vertical_weights.at(j);
}

Rational IfsSpec::max_ratio() const {
  Rational best = 0;
  for (const auto& m : maps) best = std::max(best, m.ratio);
  return best;
}

namespace {

IfsSpec halving_gasket() {
  IfsSpec spec;
  spec.name = "sierpinski-gasket";
  spec.dimension = 2;
  const std::vector<Point> corners = {{0, 0}, {1, 0}, {Rational(1, 2), 1}};
  RationalMatrix half = {{Rational(1, 2), 0}, {0, Rational(1, 2)}};
  for (const auto& q : corners) {
    spec.maps.push_back(AffineMap::make(half, {q[0] / 2, q[1] / 2}, Rational(3, 5)));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) spec.conductances_v0[{i, j}] = 1;
  }
  const Rational a(2, 5), b(1, 5);
  spec.extension_matrices = std::vector<RationalMatrix>{
      {{1, 0, 0}, {a, a, b}, {a, b, a}},
      {{a, a, b}, {0, 1, 0}, {b, a, a}},
      {{a, b, a}, {b, a, a}, {0, 0, 1}},
  };
  return spec;
}

}  // namespace

void check_extension_matrices(const std::vector<RationalMatrix>& ms, std::size_t n) {
  if (ms.size() != n) throw Error(ErrorCode::kMatrixError, "need one extension matrix per map");
  for (std::size_t j = 0; j < n; ++j) {
    const std::string name = "A_" + std::to_string(j);
    if (ms[j].size() != n) throw Error(ErrorCode::kMatrixError, "extension matrix must be (J+1) x (J+1)");
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = ms[j][i];
      if (row.size() != n) throw Error(ErrorCode::kMatrixError, "extension matrix must be (J+1) x (J+1)");
      Rational sum = 0;
      for (const auto& a : row) {
        if (a < 0) throw Error(ErrorCode::kMatrixError, name + " has a negative entry");
        sum += a;
      }
      if (sum != 1) throw Error(ErrorCode::kMatrixError, name + " is not row-stochastic");
    }
    // sigma_j fixes q_j, so the value there must be carried over unchanged.
    for (std::size_t i = 0; i < n; ++i) {
      if (ms[j][j][i] != (i == j ? 1 : 0)) throw Error(ErrorCode::kMatrixError, "row " + std::to_string(j) + " of " + name + " must be e_" + std::to_string(j));
    }
  }
}

namespace {

void check_spec(const IfsSpec& spec) {
  const std::size_t n = spec.symbol_count();
  if (n < 2) throw Error(ErrorCode::kSpecError, "an IFS needs at least two maps");
  if (n > 256) throw Error(ErrorCode::kSpecError, "at most 256 maps are supported");
  for (std::size_t j = 0; j < n; ++j) {
    const auto& map = spec.maps[j];
    if (map.offset.size() != spec.dimension || map.matrix.size() != spec.dimension) {
      throw Error(ErrorCode::kSpecError, "map " + std::to_string(j) + " has wrong dimension");
    }
    if (map.ratio <= 0 || map.ratio >= 1) {
      throw Error(ErrorCode::kRegularityViolation,
                  "renormalization factor r_" + std::to_string(j) + " = " + format_rational(map.ratio) + " is not in (0,1)");
    }
  }
  if (!spec.vertical_weights.empty()) {
    if (spec.vertical_weights.size() != n) throw Error(ErrorCode::kWeightError, "need one vertical weight per map");
    Rational total = 0;
    for (const auto& mu : spec.vertical_weights) {
      if (mu <= 0) throw Error(ErrorCode::kWeightError, "vertical weights must be positive");
      total += mu;
    }
    if (total != 1) throw Error(ErrorCode::kWeightError, "vertical weights sum to " + format_rational(total) + ", not 1");
  }
  if (spec.conductances_v0.empty()) throw Error(ErrorCode::kSpecError, "no conductances on V_0");
  for (const auto& [key, c] : spec.conductances_v0) {
    if (key.first >= key.second || key.second >= n) throw Error(ErrorCode::kSpecError, "conductance key out of range");
    if (c <= 0) throw Error(ErrorCode::kSpecError, "conductances must be positive");
  }
  if (spec.extension_matrices) check_extension_matrices(*spec.extension_matrices, n);
  std::set<Point> fixed;
  for (const auto& map : spec.maps) fixed.insert(map.fixed_point);
  if (fixed.size() != n) throw Error(ErrorCode::kSpecError, "fixed points are not distinct");
}

}  // namespace

IfsSpec sierpinski_gasket_spec() { return halving_gasket(); }

IfsSpec cantor_spec() {
  IfsSpec spec;
  spec.name = "cantor";
  spec.dimension = 1;
  spec.maps.push_back(AffineMap::make({{Rational(1, 3)}}, {0}, Rational(1, 3)));
  spec.maps.push_back(AffineMap::make({{Rational(1, 3)}}, {Rational(2, 3)}, Rational(1, 3)));
  spec.conductances_v0[{0, 1}] = 1;
  return spec;
}

ValidationReport validate_spec(const IfsSpec& spec, std::size_t probe_depth) {
  check_spec(spec);
  Attractor probe(spec, probe_depth);
  ValidationReport report;
  report.probe_depth = probe_depth;
  const std::size_t n = spec.symbol_count();
  for (std::size_t k = 0; k <= probe_depth; ++k) {
    const auto& pts = probe.level_points(k);
    report.points_per_level.push_back(pts.size());
    std::size_t junctions = 0;
    std::size_t max_reps = 0;
    for (PointId p : pts) {
      auto reps = probe.representations(p, k);
      std::set<Word> words;
      for (const auto& r : reps) words.insert(r.word);
      max_reps = std::max(max_reps, words.size());
      if (words.size() > 1) ++junctions;
    }
    report.junctions_per_level.push_back(junctions);
    report.max_representations.push_back(max_reps);
    if (k > 0) {
      const auto& prev = probe.level_points(k - 1);
      if (!std::includes(pts.begin(), pts.end(), prev.begin(), prev.end(),
                         [&](PointId a, PointId b) { return probe.coords(a) < probe.coords(b); })) {
        throw Error(ErrorCode::kSpecError, "point sets are not nested at level " + std::to_string(k));
      }
    }
    for (std::size_t c = 0; c < probe.cell_count(k); ++c) {
      auto corners = probe.cell_corners(k, c);
      std::set<PointId> distinct(corners.begin(), corners.end());
      if (distinct.size() != n) {
        throw Error(ErrorCode::kSpecError, "degenerate cell " + probe.word_at(k, c).to_string() + " at probe depth");
      }
    }
  }
  report.notes.push_back("post-critical finiteness is declared by the spec author and probed only to depth " +
                         std::to_string(probe_depth));
  return report;
}

Point compose_map(const IfsSpec& spec, const Word& w, const Point& x) {
  Point out = x;
  for (std::size_t t = w.size(); t-- > 0;) {
    if (w[t] >= spec.symbol_count()) {
      throw Error(ErrorCode::kSymbolOutOfRange, "symbol " + std::to_string(static_cast<int>(w[t])));
    }
    out = spec.maps[w[t]].apply(out);
  }
  return out;
}

Point address_point(const IfsSpec& spec, const Word& address, std::size_t q_index, std::size_t depth) {
  if (depth > address.size()) throw Error(ErrorCode::kDepthExceedsTruncation, "address shorter than requested depth");
  if (q_index >= spec.symbol_count()) throw Error(ErrorCode::kSymbolOutOfRange, "generator index");
  return compose_map(spec, address.prefix(depth), spec.maps[q_index].fixed_point);
}

Attractor::Attractor(IfsSpec spec, std::size_t depth) : spec_(std::move(spec)), depth_(depth) {
  check_spec(spec_);
  const std::size_t n = spec_.symbol_count();
  const std::size_t d = spec_.dimension;

  auto intern = [&](Point coords, const Word& w, std::size_t level, std::size_t i) {
    auto [it, inserted] = index_.try_emplace(std::move(coords), static_cast<PointId>(points_.size()));
    if (inserted) points_.push_back(PointRecord{it->first, level, {}});
    points_[it->second].reps.push_back(Representation{w, static_cast<Symbol>(i)});
    return it->second;
  };

  struct Composite {
    RationalMatrix matrix;
    Point offset;
  };
  std::vector<Composite> current{Composite{identity_matrix(d), Point(d, Rational(0))}};

  level_points_.resize(depth_ + 1);
  corners_.resize(depth_ + 1);
  for (std::size_t k = 0; k <= depth_; ++k) {
    if (k > 0) {
      std::vector<Composite> next;
      next.reserve(current.size() * n);
      for (const auto& parent : current) {
        for (std::size_t s = 0; s < n; ++s) {
          const auto& child = spec_.maps[s];
          Composite c{mat_mul(parent.matrix, child.matrix), mat_vec(parent.matrix, child.offset)};
          for (std::size_t r = 0; r < d; ++r) c.offset[r] += parent.offset[r];
          next.push_back(std::move(c));
        }
      }
      current = std::move(next);
    }
    auto& corners = corners_[k];
    corners.resize(current.size() * n);
    std::set<PointId> seen;
    for (std::size_t idx = 0; idx < current.size(); ++idx) {
      Word w = word_at(k, idx);
      for (std::size_t i = 0; i < n; ++i) {
        Point coords = mat_vec(current[idx].matrix, spec_.maps[i].fixed_point);
        for (std::size_t r = 0; r < d; ++r) coords[r] += current[idx].offset[r];
        PointId p = intern(std::move(coords), w, k, i);
        corners[idx * n + i] = p;
        seen.insert(p);
      }
    }
    auto& level = level_points_[k];
    level.assign(seen.begin(), seen.end());
    std::sort(level.begin(), level.end(), [&](PointId a, PointId b) { return points_[a].coords < points_[b].coords; });
  }
}

std::span<const Representation> Attractor::representations(PointId p, std::size_t length) const {
  const auto& reps = points_.at(p).reps;
  auto lo = std::lower_bound(reps.begin(), reps.end(), length,
                             [](const Representation& r, std::size_t len) { return r.word.size() < len; });
  auto hi = std::upper_bound(lo, reps.end(), length,
                             [](std::size_t len, const Representation& r) { return len < r.word.size(); });
  return {lo, hi};
}

std::optional<PointId> Attractor::find(const Point& coords) const {
  auto it = index_.find(coords);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PointId Attractor::rational_point(const Word& w, std::size_t q_index) const {
  if (w.size() > depth_) {
    throw Error(ErrorCode::kDepthExceedsTruncation, "word longer than attractor depth " + std::to_string(depth_));
  }
  if (q_index >= symbol_count()) throw Error(ErrorCode::kSymbolOutOfRange, "generator index");
  Point coords = compose_map(spec_, w, spec_.maps[q_index].fixed_point);
  auto id = find(coords);
  if (!id) throw Error(ErrorCode::kSpecError, "rational point missing from intern table");
  return *id;
}

void Attractor::check_level(std::size_t k) const {
  if (k > depth_) {
    throw Error(ErrorCode::kDepthExceedsTruncation,
                "level " + std::to_string(k) + " beyond attractor depth " + std::to_string(depth_));
  }
}

const std::vector<PointId>& Attractor::level_points(std::size_t k) const {
  check_level(k);
  return level_points_[k];
}

std::size_t Attractor::cell_count(std::size_t level) const {
  check_level(level);
  return corners_[level].size() / symbol_count();
}

std::span<const PointId> Attractor::cell_corners(std::size_t level, std::size_t cell_index) const {
  check_level(level);
  const std::size_t n = symbol_count();
  return std::span<const PointId>(corners_[level]).subspan(cell_index * n, n);
}

std::span<const PointId> Attractor::cell_corners(const Word& w) const {
  return cell_corners(w.size(), word_index(w));
}

Cell Attractor::cell(const Word& w) const {
  auto corners = cell_corners(w);
  return Cell{w, std::vector<PointId>(corners.begin(), corners.end())};
}

std::size_t Attractor::word_index(const Word& w) const {
  const std::size_t n = symbol_count();
  std::size_t idx = 0;
  for (std::size_t t = 0; t < w.size(); ++t) {
    if (w[t] >= n) throw Error(ErrorCode::kSymbolOutOfRange, "symbol " + std::to_string(static_cast<int>(w[t])));
    idx = idx * n + w[t];
  }
  return idx;
}

Word Attractor::word_at(std::size_t level, std::size_t index) const {
  const std::size_t n = symbol_count();
  std::vector<Symbol> symbols(level);
  for (std::size_t t = level; t-- > 0;) {
    symbols[t] = static_cast<Symbol>(index % n);
    index /= n;
  }
  return Word(std::move(symbols));
}

std::vector<Cell> Attractor::cell_neighborhood(PointId p, std::size_t m) const {
  if (m < generation(p)) {
    throw Error(ErrorCode::kGenerationError,
                "level " + std::to_string(m) + " below generation " + std::to_string(generation(p)));
  }
  check_level(m);
  std::set<Word> words;
  for (const auto& r : representations(p, m)) words.insert(r.word);
  std::vector<Cell> out;
  for (const auto& w : words) out.push_back(cell(w));
  return out;
}

bool Attractor::in_cell(PointId p, const Word& w) const {
  const std::size_t level = std::max(w.size(), generation(p));
  check_level(level);
  for (const auto& r : representations(p, level)) {
    if (r.word.has_prefix(w)) return true;
  }
  return false;
}

}  // namespace fractalnet
