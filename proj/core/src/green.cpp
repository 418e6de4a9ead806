#include "fractalnet/error.hpp"
#include "fractalnet/random_walk.hpp"

#include <fmt/format.h>

namespace fractalnet {

namespace {

void require_interior(const Network& net, VertexIndex v) {
  if (v >= net.vertex_count()) throw Error(ErrorCode::kSpecError, fmt::format("vertex {} out of range", v));
  if (net.is_frontier(v)) throw Error(ErrorCode::kFrontierState, fmt::format("vertex {} is absorbing", v));
}

}  // namespace

GreenSolver::GreenSolver(const Network& net, SolverOptions options) : solver_(net, options) {}

std::vector<double> GreenSolver::column(VertexIndex y) const {
  const Network& net = network();
  require_interior(net, y);
  std::vector<double> rhs(net.interior_count(), 0.0);
  rhs[y] = 1.0;
  // L_int is symmetric, so the column [L_int^{-1}]_{. y} scaled by c(y) is G(., y).
  std::vector<double> g = solver_.solve_interior(rhs);
  const double cy = net.total_conductance_d(y);
  for (auto& v : g) v *= cy;
  return g;
}

GreenEstimate GreenSolver::green(VertexIndex x, VertexIndex y) const {
  const Network& net = network();
  require_interior(net, x);
  const std::vector<double> col = column(y);
  GreenEstimate out;
  out.x = x;
  out.y = y;
  out.truncation = net.truncation();
  out.visits_including_t0 = col[x];
  out.green_after_t0 = col[x] - (x == y ? 1.0 : 0.0);
  out.method = GreenMethod::kLinearSolve;
  out.error = solver_.last_residual();
  return out;
}

GreenEstimate green_monte_carlo(const TransitionKernel& kernel, VertexIndex y, const WalkConfig& config) {
  const Network& net = kernel.network();
  require_interior(net, config.start);
  require_interior(net, y);
  const auto visits = map_walks(kernel, config, [&](std::size_t, Walker& w) {
    double count = w.position() == y ? 1.0 : 0.0;
    while (w.step()) count += w.position() == y ? 1.0 : 0.0;
    return count;
  });
  const MeanEstimate m = mean_estimate(visits);
  GreenEstimate out;
  out.x = config.start;
  out.y = y;
  out.truncation = net.truncation();
  out.visits_including_t0 = m.mean;
  out.green_after_t0 = m.mean - (config.start == y ? 1.0 : 0.0);
  out.method = GreenMethod::kMonteCarlo;
  out.error = m.ci95;
  return out;
}

std::vector<double> martin_column(const GreenSolver& green, VertexIndex y) {
  std::vector<double> g = green.column(y);
  g[y] -= 1.0;
  const double base = g[green.network().root()];
  if (!(base > 0.0)) {
    throw Error(ErrorCode::kDivisionByZero, fmt::format("G(o, {}) vanishes", y));
  }
  for (auto& v : g) v /= base;
  return g;
}

double martin_kernel(const GreenSolver& green, VertexIndex x, VertexIndex y) {
  require_interior(green.network(), x);
  return martin_column(green, y)[x];
}

}  // namespace fractalnet
