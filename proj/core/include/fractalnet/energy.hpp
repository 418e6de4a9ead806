#pragma once

#include "fractalnet/network.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fractalnet {

enum class Normalization { kNone, kGrounded };

template <class T>
class BasicVertexFunction {
 public:
  explicit BasicVertexFunction(const Network& net, T fill = T(0))
      : net_(&net), values_(net.vertex_count(), fill) {}
  BasicVertexFunction(const Network& net, std::vector<T> values, Normalization norm = Normalization::kNone);

  const Network& network() const noexcept { return *net_; }
  std::size_t size() const noexcept { return values_.size(); }
  Normalization normalization() const noexcept { return norm_; }
  std::span<const T> values() const noexcept { return values_; }
  std::vector<T>& mutable_values() noexcept { return values_; }

  const T& operator[](VertexIndex v) const { return values_[v]; }
  T& operator[](VertexIndex v) { return values_[v]; }

  // Subtracts the value at the root so that f(o) = 0.
  void ground();

 private:
  const Network* net_;
  std::vector<T> values_;
  Normalization norm_ = Normalization::kNone;
};

using VertexFunction = BasicVertexFunction<double>;
using ExactVertexFunction = BasicVertexFunction<Rational>;

VertexFunction to_double(const ExactVertexFunction& f);
VertexFunction operator-(const VertexFunction& a, const VertexFunction& b);
VertexFunction operator+(const VertexFunction& a, const VertexFunction& b);
VertexFunction operator*(double s, const VertexFunction& f);

template <class T>
struct BasicEnergyBreakdown {
  std::vector<T> horizontal;  // E_k, k = 0..M
  std::vector<T> vertical;    // F_k, k = 0..M; entry 0 is always zero
  T total = T(0);
};

using EnergyBreakdown = BasicEnergyBreakdown<double>;
using ExactEnergyBreakdown = BasicEnergyBreakdown<Rational>;

// Frontier entries of a Laplacian only see the edges kept by the truncation.
template <class T>
struct LaplacianValues {
  BasicVertexFunction<T> values;
  bool truncation_dependent(VertexIndex v) const { return values.network().is_frontier(v); }
};

template <class T>
T energy(const BasicVertexFunction<T>& f);
template <class T>
T energy_inner(const BasicVertexFunction<T>& f, const BasicVertexFunction<T>& g);
template <class T>
BasicEnergyBreakdown<T> energy_by_levels(const BasicVertexFunction<T>& f);
template <class T>
LaplacianValues<T> laplacian(const BasicVertexFunction<T>& f);
// E(f) + c(o) f(o)^2.
template <class T>
T dirichlet_norm(const BasicVertexFunction<T>& f);

extern template class BasicVertexFunction<double>;
extern template class BasicVertexFunction<Rational>;
extern template double energy(const VertexFunction&);
extern template Rational energy(const ExactVertexFunction&);
extern template double energy_inner(const VertexFunction&, const VertexFunction&);
extern template Rational energy_inner(const ExactVertexFunction&, const ExactVertexFunction&);
extern template EnergyBreakdown energy_by_levels(const VertexFunction&);
extern template ExactEnergyBreakdown energy_by_levels(const ExactVertexFunction&);
extern template LaplacianValues<double> laplacian(const VertexFunction&);
extern template LaplacianValues<Rational> laplacian(const ExactVertexFunction&);
extern template double dirichlet_norm(const VertexFunction&);
extern template Rational dirichlet_norm(const ExactVertexFunction&);

struct SolverOptions {
  // Relative residual target, ||b - Ax||_inf / ||b||_inf.
  double tolerance = 1e-12;
  int max_refinements = 4;
};

enum class BoundaryMode { kFree, kWired };

const char* to_string(BoundaryMode mode);

struct KernelElement {
  VertexIndex center = 0;
  VertexFunction values;
  std::size_t truncation = 0;
  BoundaryMode mode = BoundaryMode::kFree;
  double residual = 0.0;
};

// Factorizes the grounded Laplacian once and serves v_x for any center x.
// Free mode keeps the frontier as ordinary unknowns with their truncated stars;
// wired mode fuses all frontier vertices into one node.
class EnergyKernelSolver {
 public:
  EnergyKernelSolver(const Network& net, BoundaryMode mode = BoundaryMode::kFree, SolverOptions options = {});
  ~EnergyKernelSolver();
  EnergyKernelSolver(EnergyKernelSolver&&) noexcept;
  EnergyKernelSolver& operator=(EnergyKernelSolver&&) noexcept;

  const Network& network() const noexcept { return *net_; }
  BoundaryMode mode() const noexcept { return mode_; }
  KernelElement kernel(VertexIndex x) const;

 private:
  struct Impl;
  const Network* net_;
  BoundaryMode mode_;
  std::unique_ptr<Impl> impl_;
};

KernelElement energy_kernel(const Network& net, VertexIndex x, BoundaryMode mode = BoundaryMode::kFree,
                            SolverOptions options = {});

// max over non-frontier z of |(Delta v_x)(z) - (delta_x - delta_o)(z)|.
double dipole_residual(const KernelElement& k);

double effective_resistance(const EnergyKernelSolver& solver, VertexIndex x, VertexIndex y);
double effective_resistance(const Network& net, VertexIndex x, VertexIndex y, BoundaryMode mode = BoundaryMode::kFree,
                            SolverOptions options = {});

// Dirichlet problem on the interior: harmonic below the frontier, prescribed on it.
class DirichletSolver {
 public:
  explicit DirichletSolver(const Network& net, SolverOptions options = {});
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  const Network& network() const noexcept { return *net_; }

  // frontier_values[i] belongs to vertex interior_count() + i.
  VertexFunction extend(std::span<const double> frontier_values) const;
  VertexFunction extend(const VertexFunction& f) const;

  // Solves the interior block L_int g = rhs (rhs sized interior_count()).
  std::vector<double> solve_interior(std::span<const double> rhs) const;

  double last_residual() const noexcept { return last_residual_; }

 private:
  struct Impl;
  const Network* net_;
  std::unique_ptr<Impl> impl_;
  mutable double last_residual_ = 0.0;
};

struct RoydenSplit {
  VertexFunction input;
  VertexFunction harmonic;
  VertexFunction remainder;
  std::vector<std::size_t> schedule;
  std::size_t window_top_level = 2;
  // sup over levels 0..window_top_level of |h_{M_{i+1}} - h_{M_i}|.
  std::vector<double> window_differences;
  bool non_cauchy = false;
};

// Approximates f_HD by solving the Dirichlet problem with f's frontier values on
// each network of the family (increasing truncations). `make_function` supplies f
// on each network. The returned functions live on family.back().
RoydenSplit harmonic_component(std::span<const Network> family,
                               const std::function<VertexFunction(const Network&)>& make_function,
                               double cauchy_tolerance = 1e-2, std::size_t window_top_level = 2,
                               SolverOptions options = {});

}  // namespace fractalnet
