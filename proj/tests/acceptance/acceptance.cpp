// Runs the twelve acceptance criteria and prints one PASS/FAIL line for each.
// Usage: acceptance [criterion ...]   (default: all)
#include <fractalnet/boundary.hpp>
#include <fractalnet/energy.hpp>
#include <fractalnet/error.hpp>
#include <fractalnet/harmonic.hpp>
#include <fractalnet/random_walk.hpp>
#include <fractalnet/spec_io.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace {

using namespace fractalnet;

// Pinned tolerances and sizes.
constexpr double kEigenTol = 1e-9;
constexpr double kDipoleTol = 1e-10;
constexpr double kReproducingTol = 1e-9;
constexpr double kSymmetryTol = 1e-10;
constexpr double kSuperharmonicTol = 1e-9;
constexpr double kHarmonicFloor = 0.1;
constexpr double kStableFraction = 0.95;
constexpr double kAbsorbedFraction = 0.999;
constexpr std::size_t kWalks = 10'000;
constexpr std::uint64_t kSeed = 20240601;
constexpr unsigned kThreadsA = 4;
constexpr unsigned kThreadsB = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::shared_ptr<const Attractor> sg_attractor(std::size_t depth) {
  return std::make_shared<const Attractor>(sierpinski_gasket_spec(), depth);
}

VertexIndex generator_vertex(const Network& net, std::size_t i) {
  return net.index_of(net.attractor().rational_point(Word{}, i), 0);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
  return out;
}

// Results of the stochastic criteria, kept for the determinism rerun.
std::optional<CrossingsReport> crossings_run;
std::optional<AddressStability> stability_run;

CrossingsReport run_crossings(unsigned threads) {
  const Network net = Network::build(sg_attractor(8), 8);
  // f = u_(q_0, 0)
  const VertexFunction f = harmonic_generate_localized(net, default_sg_matrices(), net.root()).approx();
  WalkConfig cfg;
  cfg.start = generator_vertex(net, 1);
  cfg.walks = kWalks;
  cfg.seed = kSeed;
  cfg.threads = threads;
  return crossings_bound_check(TransitionKernel(net), f, 0.25, 0.75, cfg);
}

AddressStability run_stability(unsigned threads) {
  auto att = sg_attractor(8);
  const Network low = Network::build(att, 6);
  const Network high = Network::build(att, 8);
  WalkConfig cfg;
  cfg.walks = kWalks;
  cfg.seed = kSeed;
  cfg.threads = threads;
  return coupled_address_stability(low, high, cfg, 3);
}

Outcome structure_counts() {
  std::vector<std::string> notes;
  bool ok = true;
  const Network sg = Network::build(sg_attractor(4), 4);
  auto counts = level_counts(sg);
  for (std::size_t k = 1; k <= 4; ++k) {
    std::size_t expected = (3 + 5 * static_cast<std::size_t>(std::pow(3, k))) / 2;
    ok = ok && counts[k].vertical_edges == expected;
    notes.push_back(fmt::format("|F_{}|={}/{}", k, counts[k].vertical_edges, expected));
  }
  const Network cantor = Network::build(std::make_shared<const Attractor>(cantor_spec(), 5), 5);
  for (std::size_t k = 0; k <= 5; ++k) {
    const VertexIndex lo = static_cast<VertexIndex>(cantor.level_begin(k));
    const VertexIndex hi = static_cast<VertexIndex>(cantor.level_end(k));
    std::vector<VertexIndex> parent(hi - lo);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<VertexIndex(VertexIndex)> root = [&](VertexIndex v) {
      return parent[v] == v ? v : parent[v] = root(parent[v]);
    };
    std::size_t edges = 0;
    for (const Edge& e : cantor.edges()) {
      if (e.kind != EdgeKind::kHorizontal || e.level != k) continue;
      ++edges;
      parent[root(e.u - lo)] = root(e.v - lo);
    }
    std::map<VertexIndex, std::size_t> sizes;
    for (VertexIndex v = 0; v < hi - lo; ++v) ++sizes[root(v)];
    bool pairs = std::all_of(sizes.begin(), sizes.end(), [](const auto& s) { return s.second == 2; });
    ok = ok && sizes.size() == (1u << k) && edges == (1u << k) && pairs;
    notes.push_back(fmt::format("cantor k={}: {} components", k, sizes.size()));
  }
  return {ok, join(notes)};
}

Outcome energy_bound() {
  const Network net = Network::build(sg_attractor(8), 8);
  const HGFunction u = harmonic_generate(net, default_sg_matrices(), {1, 0, 0});
  const ExactEnergyBreakdown b = energy_by_levels(u.values);
  const Rational r(3, 5);
  bool ratio_ok = true, vertical_ok = true;
  for (std::size_t k = 1; k < b.horizontal.size(); ++k) {
    ratio_ok = ratio_ok && b.horizontal[k] <= r * b.horizontal[k - 1];
    vertical_ok = vertical_ok && b.vertical[k] <= b.horizontal[k];
  }
  const bool total_ok = b.total <= 5;
  return {ratio_ok && vertical_ok && total_ok,
          fmt::format("E_k<=3/5 E_(k-1): {}; F_k<=E_k: {}; total={} (~{:.6f}) <=5: {}; E_1/E_0={}", ratio_ok, vertical_ok,
                      format_rational(b.total), to_double(b.total), total_ok,
                      format_rational(Rational(b.horizontal[1] / b.horizontal[0])))};
}

Outcome extension_matrices_check() {
  const ExtensionMatrices m = default_sg_matrices();
  bool ok = true;
  try {
    check_matrices(m, 3);
  } catch (const Error& e) {
    return {false, e.what()};
  }
  for (const auto& a : m.matrices) {
    for (const auto& row : a) ok = ok && std::accumulate(row.begin(), row.end(), Rational(0)) == 1;
  }
  std::vector<std::string> notes;
  for (double l : second_eigenvalues(m)) {
    ok = ok && std::abs(l - 0.6) <= kEigenTol;
    notes.push_back(fmt::format("{:.17g}", l));
  }
  return {ok, "row-stochastic; second eigenvalues " + join(notes)};
}

Outcome kernel_suite() {
  const Network net = Network::build(sg_attractor(6), 6);
  EnergyKernelSolver solver(net, BoundaryMode::kFree);
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<VertexIndex> pick(0, static_cast<VertexIndex>(net.vertex_count() - 1));
  std::uniform_int_distribution<VertexIndex> center(0, static_cast<VertexIndex>(net.interior_count() - 1));
  std::uniform_real_distribution<double> val(-1.0, 1.0);

  double dipole = 0.0;
  std::vector<VertexIndex> centers{generator_vertex(net, 1), generator_vertex(net, 2)};
  for (int i = 0; i < 8; ++i) centers.push_back(center(rng));
  for (VertexIndex x : centers) dipole = std::max(dipole, dipole_residual(solver.kernel(x)));

  double reproducing = 0.0;
  for (int t = 0; t < 20; ++t) {
    VertexFunction g(net);
    for (int s = 0; s < 12; ++s) g[pick(rng)] = val(rng);
    const VertexIndex x = center(rng);
    const double lhs = energy_inner(solver.kernel(x).values, g);
    reproducing = std::max(reproducing, std::abs(lhs - (g[x] - g[net.root()])));
  }

  double symmetry = 0.0;
  for (int t = 0; t < 10; ++t) {
    const VertexIndex x = center(rng), y = center(rng);
    symmetry = std::max(symmetry, std::abs(solver.kernel(x).values[y] - solver.kernel(y).values[x]));
  }

  auto att = sg_attractor(7);
  std::vector<double> free_r, wired_r;
  for (std::size_t m : {3, 5, 7}) {
    const Network n = Network::build(att, m);
    free_r.push_back(effective_resistance(n, generator_vertex(n, 1), n.root(), BoundaryMode::kFree));
    wired_r.push_back(effective_resistance(n, generator_vertex(n, 1), n.root(), BoundaryMode::kWired));
  }
  const bool monotone = free_r[0] >= free_r[1] && free_r[1] >= free_r[2] && wired_r[0] <= wired_r[1] &&
                        wired_r[1] <= wired_r[2] && wired_r[2] <= free_r[2];
  const bool ok = dipole < kDipoleTol && reproducing <= kReproducingTol && symmetry <= kSymmetryTol && monotone;
  return {ok, fmt::format("dipole {:.3g}; reproducing {:.3g}; symmetry {:.3g}; R_free(q1,o) M=3,5,7: {:.12f} {:.12f} "
                          "{:.12f}; R_wired: {:.12f} {:.12f} {:.12f}",
                          dipole, reproducing, symmetry, free_r[0], free_r[1], free_r[2], wired_r[0], wired_r[1],
                          wired_r[2])};
}

// (i) u_K = 1 on K^(l) for l >= m; (ii) u_K = 0 off the corner neighbourhoods.
bool bump_identities(const Network& net, const ExtensionMatrices& m, const Word& cell, std::size_t& outside) {
  const Attractor& a = net.attractor();
  const std::size_t level = cell.size();
  const HGFunction k = bump(net, m, cell);
  std::vector<Word> support;
  for (PointId xi : a.cell_corners(cell)) {
    for (const Cell& c : a.cell_neighborhood(xi, level)) support.push_back(c.word);
  }
  bool ok = true;
  for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
    const Vertex& vv = net.vertex(v);
    if (vv.level >= level && a.in_cell(vv.point, cell)) ok = ok && k.values[v] == 1;
    bool inside = false;
    for (const Word& w : support) inside = inside || a.in_cell(vv.point, w);
    if (!inside) {
      ++outside;
      ok = ok && k.values[v] == 0;
    }
  }
  return ok;
}

Outcome bump_functions(const std::string& spec_dir) {
  bool ok = true;
  std::size_t sg_outside = 0, cantor_outside = 0, sg2_outside = 0;
  const Network sg = Network::build(sg_attractor(6), 6);
  const ExtensionMatrices sm = default_sg_matrices();
  for (Symbol s = 0; s < 3; ++s) ok = bump_identities(sg, sm, Word(std::vector<Symbol>{s}), sg_outside) && ok;
  for (Symbol s = 0; s < 3; ++s) {
    for (Symbol t = 0; t < 3; ++t) ok = bump_identities(sg, sm, Word(std::vector<Symbol>{s, t}), sg2_outside) && ok;
  }
  const IfsSpec cantor = load_spec(spec_dir + "/cantor_harmonic.json");
  const ExtensionMatrices cm = extension_matrices(cantor);
  const Network cn = Network::build(std::make_shared<const Attractor>(cantor, 6), 6);
  for (Symbol s = 0; s < 2; ++s) {
    ok = bump_identities(cn, cm, Word(std::vector<Symbol>{s}), cantor_outside) && ok;
    for (Symbol t = 0; t < 2; ++t) ok = bump_identities(cn, cm, Word(std::vector<Symbol>{s, t}), cantor_outside) && ok;
  }
  return {ok, fmt::format("exact; vertices checked for vanishing: SG 1-cells {} (their neighbourhoods cover SG), "
                          "SG 2-cells {}, Cantor 1/2-cells {}",
                          sg_outside, sg2_outside, cantor_outside)};
}

Outcome crossings_estimate() {
  crossings_run = run_crossings(kThreadsA);
  const CrossingsReport& r = *crossings_run;
  return {r.pass && r.cap_exhausted == 0,
          fmt::format("mean {:.6f} + 3*ci95 {:.6f} = {:.6f} <= bound {:.6f} (G(x,x)={:.6f}, E(f)={:.6f}, N={})",
                      r.crossings.mean, r.crossings.ci95, r.crossings.mean + 3 * r.crossings.ci95, r.bound, r.green_xx,
                      r.energy, r.crossings.count)};
}

Outcome boundary_convergence() {
  stability_run = run_stability(kThreadsA);
  const AddressStability& s = *stability_run;
  const double absorbed = static_cast<double>(std::min(s.absorbed_low, s.absorbed_high)) / static_cast<double>(s.walks);
  return {s.fraction_same >= kStableFraction && absorbed >= kAbsorbedFraction,
          fmt::format("same depth-3 address {:.4f} (need >= {}); absorbed {:.4f} (need >= {})", s.fraction_same,
                      kStableFraction, absorbed, kAbsorbedFraction)};
}

Outcome harmonic_component_check() {
  auto att = sg_attractor(8);
  std::vector<Network> family;
  for (std::size_t m : {4, 6, 8}) family.push_back(Network::build(att, m));
  const ExtensionMatrices mats = default_sg_matrices();
  const RoydenSplit split = harmonic_component(
      family, [&](const Network& net) { return harmonic_generate(net, mats, {1, 0, 0}).approx(); });
  const auto& d = split.window_differences;
  const bool decreasing = d.size() == 2 && d[1] < d[0];
  const double at_o = split.harmonic[family.back().root()];
  return {decreasing && at_o >= kHarmonicFloor,
          fmt::format("window sup-differences {:.6g} {:.6g}; f_HD(o) at M=8 = {:.6f} (floor {})", d.at(0), d.at(1), at_o,
                      kHarmonicFloor)};
}

Outcome separation() {
  const IfsSpec spec = sierpinski_gasket_spec();
  const ExtensionMatrices m = default_sg_matrices();
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> sym(0, 2);
  auto random_word = [&] {
    std::vector<Symbol> w;
    for (int k = 0; k < 12; ++k) w.push_back(static_cast<Symbol>(sym(rng)));
    return Word(w);
  };
  std::size_t failures = 0, max_level = 0, pairs = 0;
  double min_margin = INFINITY;
  while (pairs < 50) {
    const Word a = random_word(), b = random_word();
    const auto limit = [&](const Word& w) { return compose_map(spec, w, spec.maps[w[w.size() - 1]].fixed_point); };
    if (limit(a) == limit(b)) continue;
    ++pairs;
    try {
      const Separation s = separate(spec, m, a, b);
      const double gap = std::abs(to_double(s.alpha.value - s.beta.value));
      min_margin = std::min(min_margin, gap / std::pow(0.6, static_cast<double>(s.level)));
      max_level = std::max(max_level, s.level);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotSeparable) throw;
      ++failures;
    }
  }
  return {failures == 0, fmt::format("{} pairs, {} failures, deepest level {}, min gap/(3/5)^m = {:.6f}", pairs, failures,
                                     max_level, min_margin)};
}

Outcome transience() {
  const Network net = Network::build(sg_attractor(10), 10);
  const TransienceReport r = transience_certificate(net, 10);
  bool bounded = true;
  for (std::size_t n = 0; n < r.partial_sums.size(); ++n) {
    bounded = bounded && r.partial_sums[n] <= r.majorants[n] && r.majorants[n] <= r.majorants[0];
  }
  return {bounded && r.max_conservation_defect == 0 && r.partial_sums.size() == 10,
          fmt::format("S_10 = {} <= majorant {}; conservation defect {}", format_rational(r.partial_sums.back()),
                      format_rational(r.majorants.back()), format_rational(r.max_conservation_defect))};
}

Outcome martin() {
  const Network net = Network::build(sg_attractor(6), 6);
  const GreenSolver green(net);
  const TransitionKernel kernel(net);
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<VertexIndex> pick(0, static_cast<VertexIndex>(net.interior_count() - 1));
  bool normalized = true;
  double worst = -INFINITY;
  for (int t = 0; t < 10; ++t) {
    const VertexIndex y = pick(rng);
    normalized = normalized && martin_kernel(green, net.root(), y) == 1.0;
    const std::vector<double> k = martin_column(green, y);
    for (int i = 0; i < 10; ++i) {
      const VertexIndex z = pick(rng);
      double avg = 0.0;
      for (const auto& nb : net.neighbors(z)) {
        if (nb.vertex < net.interior_count()) avg += kernel.probability(z, nb.vertex).get_d() * k[nb.vertex];
      }
      worst = std::max(worst, avg - k[z]);
    }
  }
  return {normalized && worst <= kSuperharmonicTol,
          fmt::format("K(o,y)=1 exactly: {}; max (P K)(z) - K(z) = {:.3g}", normalized, worst)};
}

Outcome determinism() {
  if (!crossings_run) crossings_run = run_crossings(kThreadsA);
  if (!stability_run) stability_run = run_stability(kThreadsA);
  const CrossingsReport c = run_crossings(kThreadsB);
  const AddressStability s = run_stability(kThreadsB);
  const bool same_crossings = c.crossings.mean == crossings_run->crossings.mean &&
                              c.crossings.ci95 == crossings_run->crossings.ci95 && c.bound == crossings_run->bound &&
                              c.cap_exhausted == crossings_run->cap_exhausted;
  const bool same_stability = s.same_address == stability_run->same_address &&
                              s.absorbed_low == stability_run->absorbed_low &&
                              s.absorbed_high == stability_run->absorbed_high;
  return {same_crossings && same_stability,
          fmt::format("threads {} vs {}: crossings identical {}, address stability identical {}", kThreadsA, kThreadsB,
                      same_crossings, same_stability)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: none
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::string spec_dir = FRACTALNET_SPEC_DIR;
  const std::vector<Criterion> all = {
      {1, "structure counts", 5, structure_counts},
      {2, "energy bound", 10, energy_bound},
      {3, "extension matrices", 1, extension_matrices_check},
      {4, "energy kernel suite", 60, kernel_suite},
      {5, "bump identities", 30, [&] { return bump_functions(spec_dir); }},
      {6, "crossings estimate", 300, crossings_estimate},
      {7, "convergence to boundary", 0, boundary_convergence},
      {8, "harmonic component", 0, harmonic_component_check},
      {9, "separation", 0, separation},
      {10, "transience certificate", 0, transience},
      {11, "martin kernel", 0, martin},
      {12, "determinism", 0, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_seconds == 0 || secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    const std::string limit = c.limit_seconds == 0 ? "" : fmt::format(", limit {:g} s", c.limit_seconds);
    fmt::print("{} {:>2} {}: {} ({:.2f} s{})\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail, secs, limit);
    std::fflush(stdout);
  }
  fmt::print("{} criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
