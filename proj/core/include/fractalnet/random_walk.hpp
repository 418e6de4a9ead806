#pragma once

#include "fractalnet/energy.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace fractalnet {

// Thread count from FRACTALNET_THREADS (if set and positive) or the hardware.
unsigned default_thread_count();

// p(x, y) = c_xy / c(x), sampled exactly from integer cumulative weights.
class TransitionKernel {
 public:
  explicit TransitionKernel(const Network& net);

  const Network& network() const noexcept { return *net_; }

  // Throws FrontierState for a frontier x.
  Rational probability(VertexIndex x, VertexIndex y) const;
  VertexIndex sample(VertexIndex x, std::mt19937_64& rng) const;

 private:
  const Network* net_;
  std::vector<std::uint64_t> cumulative_;  // aligned with the network's adjacency
  std::vector<std::size_t> offsets_;
};

Rational transition_prob(const Network& net, VertexIndex x, VertexIndex y);

// nu(y_0) * prod p(y_{n-1}, y_n); throws InvalidPath.
Rational path_probability(const Network& net, std::span<const VertexIndex> path,
                          const std::map<VertexIndex, Rational>& initial);

struct WalkConfig {
  VertexIndex start = 0;
  std::size_t walks = 1000;
  std::size_t step_cap = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: default_thread_count()
  bool keep_paths = false;
};

// The stream of walk i is mt19937_64 seeded from (seed, i), independent of threads.
std::mt19937_64 walk_stream(std::uint64_t seed, std::size_t walk);

class Walker {
 public:
  Walker(const TransitionKernel& kernel, VertexIndex start, std::size_t step_cap, std::mt19937_64 rng);

  VertexIndex position() const noexcept { return position_; }
  std::size_t steps() const noexcept { return steps_; }
  bool absorbed() const { return kernel_->network().is_frontier(position_); }
  bool exhausted() const noexcept { return steps_ >= cap_; }
  // Takes one step; false once absorbed or at the cap.
  bool step();

 private:
  const TransitionKernel* kernel_;
  VertexIndex position_;
  std::size_t steps_ = 0;
  std::size_t cap_;
  std::mt19937_64 rng_;
};

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

// Runs config.walks walks and returns fn(walk_index, walker) for each, in walk order.
// fn drives the walker itself.
template <class Fn>
auto map_walks(const TransitionKernel& kernel, const WalkConfig& config, Fn&& fn) {
  using Result = decltype(fn(std::size_t{}, std::declval<Walker&>()));
  std::vector<Result> out(config.walks);
  parallel_for(config.walks, config.threads, [&](std::size_t i) {
    Walker w(kernel, config.start, config.step_cap, walk_stream(config.seed, i));
    out[i] = fn(i, w);
  });
  return out;
}

struct PathSample {
  VertexIndex start = 0;
  std::vector<VertexIndex> vertices;  // empty unless keep_paths
  bool absorbed = false;
  VertexIndex end = 0;
  std::size_t steps = 0;
  std::size_t stream = 0;
};

struct WalkEnsemble {
  WalkConfig config;
  std::size_t truncation = 0;
  std::vector<PathSample> samples;
  std::map<VertexIndex, std::size_t> absorption;
  double mean_steps = 0.0;
  std::size_t cap_exhausted = 0;
};

// Throws FrontierState if the start is on the frontier.
WalkEnsemble sample_ensemble(const TransitionKernel& kernel, const WalkConfig& config);

struct MeanEstimate {
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 standard errors
  std::size_t count = 0;
};

MeanEstimate mean_estimate(std::span<const double> values);

// Completed traversals of [a, b] in either direction; BadInterval unless a < b.
std::size_t crossings(std::span<const double> seq, double a, double b);

struct CrossingsReport {
  double a = 0.0;
  double b = 0.0;
  MeanEstimate crossings;
  double energy = 0.0;
  double green_xx = 0.0;  // visits after time 0
  double constant = 0.0;  // C_x = 2 G(x,x) / c(x)
  double bound = 0.0;
  std::size_t cap_exhausted = 0;
  bool pass = false;
};

// Mean crossings of f(X_n), n >= 0, against C_x E(f) / (b - a)^2; pass iff mean + 3 ci95 <= bound.
CrossingsReport crossings_bound_check(const TransitionKernel& kernel, const VertexFunction& f, double a, double b,
                                      const WalkConfig& config, SolverOptions options = {});

struct TransienceReport {
  std::size_t depth = 0;
  std::vector<VertexIndex> tree_vertices;    // node w in {0,1}^n -> (sigma_w(q_0), n), breadth first
  std::vector<Rational> level_energy;        // energy carried by depth-n edges, n = 1..depth
  std::vector<Rational> partial_sums;        // S_d
  std::vector<Rational> majorants;           // S_d + 2^{-d} / c_min
  Rational max_conservation_defect = 0;      // exact; zero for a valid flow
};

// Binary tree embedded through the maps sigma_0, sigma_1 with the unit flow splitting in half.
TransienceReport transience_certificate(const Network& net, std::size_t depth);

// h_phi: the harmonic extension of frontier data (indexed like DirichletSolver::extend).
VertexFunction boundary_extension(const Network& net, std::span<const double> phi, SolverOptions options = {});
MeanEstimate boundary_extension_monte_carlo(const TransitionKernel& kernel, std::span<const double> phi,
                                            const WalkConfig& config);

// E(h_phi).
double trace_energy(const Network& net, std::span<const double> phi, SolverOptions options = {});

enum class GreenMethod { kLinearSolve, kMonteCarlo };

struct GreenEstimate {
  VertexIndex x = 0;
  VertexIndex y = 0;
  std::size_t truncation = 0;
  double visits_including_t0 = 0.0;
  double green_after_t0 = 0.0;  // visits - delta_xy
  GreenMethod method = GreenMethod::kLinearSolve;
  double error = 0.0;  // solver residual or ci95
};

// G(x, y) = [(I - Q)^{-1}]_{xy} = [L_int^{-1}]_{xy} c(y), one solve per column y.
class GreenSolver {
 public:
  explicit GreenSolver(const Network& net, SolverOptions options = {});

  const Network& network() const noexcept { return solver_.network(); }
  // Expected visits to y (time 0 included) from every non-frontier x.
  std::vector<double> column(VertexIndex y) const;
  GreenEstimate green(VertexIndex x, VertexIndex y) const;

 private:
  DirichletSolver solver_;
};

GreenEstimate green_monte_carlo(const TransitionKernel& kernel, VertexIndex y, const WalkConfig& config);

// K(x, y) = G(x, y) / G(o, y) with G counting visits after time 0; throws DivisionByZero.
double martin_kernel(const GreenSolver& green, VertexIndex x, VertexIndex y);
// K(., y) over non-frontier vertices from one column solve.
std::vector<double> martin_column(const GreenSolver& green, VertexIndex y);

}  // namespace fractalnet
