#include "fractalnet/energy.hpp"

#include "fractalnet/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>

namespace fractalnet {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

template <class T>
T weight_as(const Edge& e);

template <>
double weight_as<double>(const Edge& e) {
  return e.weight;
}

template <>
Rational weight_as<Rational>(const Edge& e) {
  return e.conductance;
}

template <class T>
void require_same_network(const BasicVertexFunction<T>& f, const BasicVertexFunction<T>& g) {
  if (&f.network() != &g.network()) throw Error(ErrorCode::kSpecError, "functions live on different networks");
}

// A factorized SPD system with residual-checked iterative refinement.
class FactoredSystem {
 public:
  FactoredSystem(SpMat matrix, const SolverOptions& options, const char* what)
      : matrix_(std::move(matrix)), options_(options) {
    matrix_.makeCompressed();
    solver_.compute(matrix_);
    if (solver_.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularSystem, fmt::format("{}: factorization failed", what));
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b, double& residual) const {
    const double bnorm = b.lpNorm<Eigen::Infinity>();
    if (bnorm == 0.0) {
      residual = 0.0;
      return Eigen::VectorXd::Zero(b.size());
    }
    Eigen::VectorXd x = solver_.solve(b);
    Eigen::VectorXd r = b - matrix_ * x;
    residual = r.lpNorm<Eigen::Infinity>() / bnorm;
    for (int i = 0; i < options_.max_refinements && residual > options_.tolerance; ++i) {
      x += solver_.solve(r);
      r = b - matrix_ * x;
      residual = r.lpNorm<Eigen::Infinity>() / bnorm;
    }
    if (!std::isfinite(residual) || residual > options_.tolerance) {
      throw Error(ErrorCode::kSingularSystem,
                  fmt::format("relative residual {:.3g} above tolerance {:.3g}", residual, options_.tolerance));
    }
    return x;
  }

 private:
  SpMat matrix_;
  SolverOptions options_;
  Eigen::SimplicialLDLT<SpMat> solver_;
};

// Assembles the Laplacian on unknowns `slot[v]` (-1 = fixed at zero).
// Edges whose endpoints share a slot are dropped.
SpMat assemble(const Network& net, const std::vector<std::int64_t>& slot, std::size_t unknowns) {
  std::vector<Triplet> trips;
  trips.reserve(net.edge_count() * 4);
  for (const Edge& e : net.edges()) {
    const auto a = slot[e.u];
    const auto b = slot[e.v];
    if (a == b) continue;
    if (a >= 0) trips.emplace_back(a, a, e.weight);
    if (b >= 0) trips.emplace_back(b, b, e.weight);
    if (a >= 0 && b >= 0) {
      trips.emplace_back(a, b, -e.weight);
      trips.emplace_back(b, a, -e.weight);
    }
  }
  SpMat m(static_cast<Eigen::Index>(unknowns), static_cast<Eigen::Index>(unknowns));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

// ---- vertex functions ------------------------------------------------------

template <class T>
BasicVertexFunction<T>::BasicVertexFunction(const Network& net, std::vector<T> values, Normalization norm)
    : net_(&net), values_(std::move(values)), norm_(norm) {
  if (values_.size() != net.vertex_count()) {
    throw Error(ErrorCode::kSpecError,
                fmt::format("function has {} values, network has {} vertices", values_.size(), net.vertex_count()));
  }
  if (norm_ == Normalization::kGrounded && values_[net.root()] != T(0)) {
    throw Error(ErrorCode::kSpecError, "grounded function is nonzero at the root");
  }
}

template <class T>
void BasicVertexFunction<T>::ground() {
  const T base = values_[net_->root()];
  for (auto& v : values_) v -= base;
  norm_ = Normalization::kGrounded;
}

VertexFunction to_double(const ExactVertexFunction& f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[static_cast<VertexIndex>(i)].get_d();
  return VertexFunction(f.network(), std::move(out), f.normalization());
}

VertexFunction operator-(const VertexFunction& a, const VertexFunction& b) {
  require_same_network(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return VertexFunction(a.network(), std::move(out));
}

VertexFunction operator+(const VertexFunction& a, const VertexFunction& b) {
  require_same_network(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return VertexFunction(a.network(), std::move(out));
}

VertexFunction operator*(double s, const VertexFunction& f) {
  std::vector<double> out(f.values().begin(), f.values().end());
  for (auto& v : out) v *= s;
  return VertexFunction(f.network(), std::move(out));
}

template <class T>
T energy(const BasicVertexFunction<T>& f) {
  return energy_inner(f, f);
}

template <class T>
T energy_inner(const BasicVertexFunction<T>& f, const BasicVertexFunction<T>& g) {
  require_same_network(f, g);
  T sum(0);
  for (const Edge& e : f.network().edges()) {
    sum += weight_as<T>(e) * (f[e.u] - f[e.v]) * (g[e.u] - g[e.v]);
  }
  return sum;
}

template <class T>
BasicEnergyBreakdown<T> energy_by_levels(const BasicVertexFunction<T>& f) {
  const std::size_t levels = f.network().truncation() + 1;
  BasicEnergyBreakdown<T> out;
  out.horizontal.assign(levels, T(0));
  out.vertical.assign(levels, T(0));
  for (const Edge& e : f.network().edges()) {
    const T d = f[e.u] - f[e.v];
    auto& bucket = e.kind == EdgeKind::kHorizontal ? out.horizontal : out.vertical;
    bucket[e.level] += weight_as<T>(e) * d * d;
  }
  for (std::size_t k = 0; k < levels; ++k) out.total += out.horizontal[k] + out.vertical[k];
  return out;
}

template <class T>
LaplacianValues<T> laplacian(const BasicVertexFunction<T>& f) {
  BasicVertexFunction<T> out(f.network());
  for (const Edge& e : f.network().edges()) {
    const T flow = weight_as<T>(e) * (f[e.u] - f[e.v]);
    out[e.u] += flow;
    out[e.v] -= flow;
  }
  return LaplacianValues<T>{std::move(out)};
}

template <class T>
T dirichlet_norm(const BasicVertexFunction<T>& f) {
  const Network& net = f.network();
  const VertexIndex o = net.root();
  T c_o;
  if constexpr (std::is_same_v<T, double>) {
    c_o = net.total_conductance_d(o);
  } else {
    c_o = net.total_conductance(o);
  }
  return energy(f) + c_o * f[o] * f[o];
}

template class BasicVertexFunction<double>;
template class BasicVertexFunction<Rational>;
template double energy(const VertexFunction&);
template Rational energy(const ExactVertexFunction&);
template double energy_inner(const VertexFunction&, const VertexFunction&);
template Rational energy_inner(const ExactVertexFunction&, const ExactVertexFunction&);
template EnergyBreakdown energy_by_levels(const VertexFunction&);
template ExactEnergyBreakdown energy_by_levels(const ExactVertexFunction&);
template LaplacianValues<double> laplacian(const VertexFunction&);
template LaplacianValues<Rational> laplacian(const ExactVertexFunction&);
template double dirichlet_norm(const VertexFunction&);
template Rational dirichlet_norm(const ExactVertexFunction&);

// ---- energy kernel ---------------------------------------------------------

const char* to_string(BoundaryMode mode) {
  return mode == BoundaryMode::kFree ? "free" : "wired";
}

struct EnergyKernelSolver::Impl {
  std::vector<std::int64_t> slot;
  std::size_t unknowns = 0;
  std::optional<FactoredSystem> system;
};

EnergyKernelSolver::EnergyKernelSolver(const Network& net, BoundaryMode mode, SolverOptions options)
    : net_(&net), mode_(mode), impl_(std::make_unique<Impl>()) {
  const std::size_t n = net.vertex_count();
  const VertexIndex o = net.root();
  impl_->slot.assign(n, -1);
  std::int64_t next = 0;
  const std::size_t own = mode == BoundaryMode::kFree ? n : net.interior_count();
  for (std::size_t v = 0; v < own; ++v) {
    if (v != o) impl_->slot[v] = next++;
  }
  if (mode == BoundaryMode::kWired) {
    const std::int64_t wired = next++;
    for (std::size_t v = own; v < n; ++v) impl_->slot[v] = wired;
  }
  impl_->unknowns = static_cast<std::size_t>(next);
  impl_->system.emplace(assemble(net, impl_->slot, impl_->unknowns), options, "energy kernel");
}

EnergyKernelSolver::~EnergyKernelSolver() = default;
EnergyKernelSolver::EnergyKernelSolver(EnergyKernelSolver&&) noexcept = default;
EnergyKernelSolver& EnergyKernelSolver::operator=(EnergyKernelSolver&&) noexcept = default;

KernelElement EnergyKernelSolver::kernel(VertexIndex x) const {
  const Network& net = *net_;
  if (x >= net.vertex_count()) throw Error(ErrorCode::kSpecError, fmt::format("vertex {} out of range", x));
  if (net.is_frontier(x)) {
    throw Error(ErrorCode::kFrontierCenter, fmt::format("kernel center {} lies on the frontier", x));
  }
  KernelElement out{x, VertexFunction(net), net.truncation(), mode_, 0.0};
  if (x != net.root()) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(impl_->unknowns));
    b[impl_->slot[x]] = 1.0;
    double residual = 0.0;
    const Eigen::VectorXd sol = impl_->system->solve(b, residual);
    for (std::size_t v = 0; v < net.vertex_count(); ++v) {
      const auto s = impl_->slot[v];
      out.values[static_cast<VertexIndex>(v)] = s < 0 ? 0.0 : sol[s];
    }
  }
  out.values = VertexFunction(net, std::vector<double>(out.values.values().begin(), out.values.values().end()),
                              Normalization::kGrounded);
  out.residual = dipole_residual(out);
  return out;
}

KernelElement energy_kernel(const Network& net, VertexIndex x, BoundaryMode mode, SolverOptions options) {
  if (x < net.vertex_count() && net.is_frontier(x)) {
    throw Error(ErrorCode::kFrontierCenter, fmt::format("kernel center {} lies on the frontier", x));
  }
  return EnergyKernelSolver(net, mode, options).kernel(x);
}

double dipole_residual(const KernelElement& k) {
  const Network& net = k.values.network();
  const auto lap = laplacian(k.values);
  double worst = 0.0;
  for (std::size_t z = 0; z < net.interior_count(); ++z) {
    double target = 0.0;
    if (z == k.center) target += 1.0;
    if (z == net.root()) target -= 1.0;
    worst = std::max(worst, std::abs(lap.values[static_cast<VertexIndex>(z)] - target));
  }
  return worst;
}

double effective_resistance(const EnergyKernelSolver& solver, VertexIndex x, VertexIndex y) {
  if (x == y) {
    if (solver.network().is_frontier(x)) {
      throw Error(ErrorCode::kFrontierCenter, fmt::format("vertex {} lies on the frontier", x));
    }
    return 0.0;
  }
  const KernelElement kx = solver.kernel(x);
  const KernelElement ky = solver.kernel(y);
  // E(v_x - v_y) = (v_x - v_y)(x) - (v_x - v_y)(y) by the reproducing property.
  return kx.values[x] - ky.values[x] - kx.values[y] + ky.values[y];
}

double effective_resistance(const Network& net, VertexIndex x, VertexIndex y, BoundaryMode mode,
                            SolverOptions options) {
  return effective_resistance(EnergyKernelSolver(net, mode, options), x, y);
}

// ---- Dirichlet problem -----------------------------------------------------

struct DirichletSolver::Impl {
  std::optional<FactoredSystem> system;
};

DirichletSolver::DirichletSolver(const Network& net, SolverOptions options)
    : net_(&net), impl_(std::make_unique<Impl>()) {
  std::vector<std::int64_t> slot(net.vertex_count(), -1);
  for (std::size_t v = 0; v < net.interior_count(); ++v) slot[v] = static_cast<std::int64_t>(v);
  impl_->system.emplace(assemble(net, slot, net.interior_count()), options, "Dirichlet problem");
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

std::vector<double> DirichletSolver::solve_interior(std::span<const double> rhs) const {
  const Network& net = *net_;
  if (rhs.size() != net.interior_count()) {
    throw Error(ErrorCode::kSpecError, "right-hand side does not match the interior size");
  }
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  const Eigen::VectorXd x = impl_->system->solve(b, last_residual_);
  return std::vector<double>(x.data(), x.data() + x.size());
}

VertexFunction DirichletSolver::extend(std::span<const double> frontier_values) const {
  const Network& net = *net_;
  const std::size_t interior = net.interior_count();
  if (frontier_values.size() != net.vertex_count() - interior) {
    throw Error(ErrorCode::kSpecError, "frontier values do not match the frontier size");
  }
  std::vector<double> rhs(interior, 0.0);
  for (const Edge& e : net.edges()) {
    const bool fu = e.u >= interior;
    const bool fv = e.v >= interior;
    if (fu == fv) continue;
    if (fv) {
      rhs[e.u] += e.weight * frontier_values[e.v - interior];
    } else {
      rhs[e.v] += e.weight * frontier_values[e.u - interior];
    }
  }
  std::vector<double> values = solve_interior(rhs);
  values.insert(values.end(), frontier_values.begin(), frontier_values.end());
  return VertexFunction(net, std::move(values));
}

VertexFunction DirichletSolver::extend(const VertexFunction& f) const {
  if (&f.network() != net_) throw Error(ErrorCode::kSpecError, "function lives on a different network");
  return extend(f.values().subspan(net_->interior_count()));
}

RoydenSplit harmonic_component(std::span<const Network> family,
                               const std::function<VertexFunction(const Network&)>& make_function,
                               double cauchy_tolerance, std::size_t window_top_level, SolverOptions options) {
  if (family.empty()) throw Error(ErrorCode::kSpecError, "empty truncation schedule");
  for (std::size_t i = 1; i < family.size(); ++i) {
    if (&family[i].attractor() != &family[0].attractor() || family[i].truncation() <= family[i - 1].truncation()) {
      throw Error(ErrorCode::kSpecError, "schedule must be strictly increasing truncations of one attractor");
    }
  }
  const std::size_t top = std::min(window_top_level, family.front().truncation() - 1);
  const std::size_t window = family.front().level_end(top);

  std::vector<double> previous;
  RoydenSplit out{VertexFunction(family.back()), VertexFunction(family.back()), VertexFunction(family.back()),
                  {}, top, {}, false};
  for (const Network& net : family) {
    out.schedule.push_back(net.truncation());
    const VertexFunction f = make_function(net);
    VertexFunction h = DirichletSolver(net, options).extend(f);
    std::vector<double> current(h.values().begin(), h.values().begin() + static_cast<std::ptrdiff_t>(window));
    if (!previous.empty()) {
      double diff = 0.0;
      for (std::size_t i = 0; i < window; ++i) diff = std::max(diff, std::abs(current[i] - previous[i]));
      out.window_differences.push_back(diff);
    }
    previous = std::move(current);
    if (&net == &family.back()) {
      out.input = f;
      out.harmonic = h;
      out.remainder = f - h;
    }
  }
  out.non_cauchy = !out.window_differences.empty() && out.window_differences.back() > cauchy_tolerance;
  return out;
}

}  // namespace fractalnet
