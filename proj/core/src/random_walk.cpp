#include "fractalnet/random_walk.hpp"

#include "fractalnet/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

namespace fractalnet {

namespace {

__extension__ using u128 = unsigned __int128;

// Uniform integer in [0, range) by multiply-and-reject; exact for any range.
std::uint64_t bounded(std::uint64_t range, std::mt19937_64& rng) {
  u128 m = static_cast<u128>(rng()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<u128>(rng()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

void require_interior(const Network& net, VertexIndex x) {
  if (x >= net.vertex_count()) throw Error(ErrorCode::kSpecError, fmt::format("vertex {} out of range", x));
  if (net.is_frontier(x)) throw Error(ErrorCode::kFrontierState, fmt::format("vertex {} is absorbing", x));
}

}  // namespace

unsigned default_thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FRACTALNET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

TransitionKernel::TransitionKernel(const Network& net) : net_(&net) {
  offsets_.assign(net.vertex_count() + 1, 0);
  for (VertexIndex x = 0; x < net.vertex_count(); ++x) {
    offsets_[x + 1] = offsets_[x] + net.neighbors(x).size();
  }
  cumulative_.resize(offsets_.back());
  for (VertexIndex x = 0; x < net.vertex_count(); ++x) {
    const auto nbs = net.neighbors(x);
    mpz_class scale = 1;
    for (const auto& nb : nbs) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), net.edge(nb.edge).conductance.get_den_mpz_t());
    mpz_class running = 0;
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      const Rational& c = net.edge(nbs[k].edge).conductance;
      running += c.get_num() * (scale / c.get_den());
      if (running >= mpz_class(std::numeric_limits<std::int64_t>::max())) {
        throw Error(ErrorCode::kSpecError, fmt::format("conductances at vertex {} too large for exact sampling", x));
      }
      cumulative_[offsets_[x] + k] = running.get_ui();
    }
  }
}

Rational TransitionKernel::probability(VertexIndex x, VertexIndex y) const {
  require_interior(*net_, x);
  const Edge* e = net_->edge_between(x, y);
  if (!e) return 0;
  return e->conductance / net_->total_conductance(x);
}

VertexIndex TransitionKernel::sample(VertexIndex x, std::mt19937_64& rng) const {
  require_interior(*net_, x);
  const auto begin = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[x]);
  const auto end = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[x + 1]);
  const std::uint64_t u = bounded(*(end - 1), rng);
  const auto it = std::upper_bound(begin, end, u);
  return net_->neighbors(x)[static_cast<std::size_t>(it - begin)].vertex;
}

Rational transition_prob(const Network& net, VertexIndex x, VertexIndex y) {
  require_interior(net, x);
  const Edge* e = net.edge_between(x, y);
  if (!e) return 0;
  return e->conductance / net.total_conductance(x);
}

Rational path_probability(const Network& net, std::span<const VertexIndex> path,
                          const std::map<VertexIndex, Rational>& initial) {
  if (path.empty()) throw Error(ErrorCode::kInvalidPath, "empty path");
  for (VertexIndex v : path) {
    if (v >= net.vertex_count()) throw Error(ErrorCode::kInvalidPath, fmt::format("vertex {} out of range", v));
  }
  auto it = initial.find(path[0]);
  Rational p = it == initial.end() ? Rational(0) : it->second;
  for (std::size_t n = 1; n < path.size(); ++n) {
    if (!net.edge_between(path[n - 1], path[n])) {
      throw Error(ErrorCode::kInvalidPath, fmt::format("no edge between {} and {}", path[n - 1], path[n]));
    }
    if (net.is_frontier(path[n - 1])) {
      throw Error(ErrorCode::kInvalidPath, fmt::format("path continues past absorbing vertex {}", path[n - 1]));
    }
    p *= transition_prob(net, path[n - 1], path[n]);
  }
  return p;
}

std::mt19937_64 walk_stream(std::uint64_t seed, std::size_t walk) {
  const auto w = static_cast<std::uint64_t>(walk);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(w >> 32)};
  return std::mt19937_64(seq);
}

Walker::Walker(const TransitionKernel& kernel, VertexIndex start, std::size_t step_cap, std::mt19937_64 rng)
    : kernel_(&kernel), position_(start), cap_(step_cap), rng_(std::move(rng)) {}

bool Walker::step() {
  if (absorbed() || exhausted()) return false;
  position_ = kernel_->sample(position_, rng_);
  ++steps_;
  return true;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          const std::size_t begin = next.fetch_add(kChunk);
          if (begin >= count) break;
          const std::size_t end = std::min(count, begin + kChunk);
          for (std::size_t i = begin; i < end; ++i) body(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

WalkEnsemble sample_ensemble(const TransitionKernel& kernel, const WalkConfig& config) {
  const Network& net = kernel.network();
  require_interior(net, config.start);
  WalkEnsemble out;
  out.config = config;
  out.truncation = net.truncation();
  out.samples = map_walks(kernel, config, [&](std::size_t i, Walker& w) {
    PathSample s;
    s.start = config.start;
    s.stream = i;
    if (config.keep_paths) s.vertices.push_back(w.position());
    while (w.step()) {
      if (config.keep_paths) s.vertices.push_back(w.position());
    }
    s.absorbed = w.absorbed();
    s.end = w.position();
    s.steps = w.steps();
    return s;
  });
  double steps = 0.0;
  for (const auto& s : out.samples) {
    steps += static_cast<double>(s.steps);
    if (s.absorbed) {
      ++out.absorption[s.end];
    } else {
      ++out.cap_exhausted;
    }
  }
  out.mean_steps = out.samples.empty() ? 0.0 : steps / static_cast<double>(out.samples.size());
  return out;
}

MeanEstimate mean_estimate(std::span<const double> values) {
  MeanEstimate out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    out.ci95 = 1.96 * std::sqrt(var / static_cast<double>(values.size()));
  }
  return out;
}

std::size_t crossings(std::span<const double> seq, double a, double b) {
  if (!(a < b)) throw Error(ErrorCode::kBadInterval, fmt::format("interval [{}, {}] is empty", a, b));
  enum class Side { kNone, kLow, kHigh } side = Side::kNone;
  std::size_t count = 0;
  for (double v : seq) {
    if (v <= a) {
      if (side == Side::kHigh) ++count;
      side = Side::kLow;
    } else if (v >= b) {
      if (side == Side::kLow) ++count;
      side = Side::kHigh;
    }
  }
  return count;
}

CrossingsReport crossings_bound_check(const TransitionKernel& kernel, const VertexFunction& f, double a, double b,
                                      const WalkConfig& config, SolverOptions options) {
  const Network& net = kernel.network();
  if (&f.network() != &net) throw Error(ErrorCode::kSpecError, "function lives on a different network");
  if (!(a < b)) throw Error(ErrorCode::kBadInterval, fmt::format("interval [{}, {}] is empty", a, b));
  require_interior(net, config.start);
  CrossingsReport out;
  out.a = a;
  out.b = b;
  out.energy = energy(f);
  out.green_xx = GreenSolver(net, options).green(config.start, config.start).green_after_t0;
  out.constant = 2.0 * out.green_xx / net.total_conductance_d(config.start);
  out.bound = out.constant * out.energy / ((b - a) * (b - a));

  struct Count {
    double crossings = 0.0;
    bool exhausted = false;
  };
  const auto counts = map_walks(kernel, config, [&](std::size_t, Walker& w) {
    std::vector<double> values{f[w.position()]};
    while (w.step()) values.push_back(f[w.position()]);
    return Count{static_cast<double>(crossings(values, a, b)), !w.absorbed()};
  });
  std::vector<double> values;
  values.reserve(counts.size());
  for (const auto& c : counts) {
    values.push_back(c.crossings);
    out.cap_exhausted += c.exhausted;
  }
  out.crossings = mean_estimate(values);
  out.pass = out.crossings.mean + 3.0 * out.crossings.ci95 <= out.bound;
  return out;
}

TransienceReport transience_certificate(const Network& net, std::size_t depth) {
  if (depth > net.truncation()) {
    throw Error(ErrorCode::kDepthExceedsTruncation,
                fmt::format("tree depth {} beyond truncation {}", depth, net.truncation()));
  }
  const Attractor& attr = net.attractor();
  if (attr.symbol_count() < 2) throw Error(ErrorCode::kEmbeddingError, "need two maps to branch");

  TransienceReport out;
  out.depth = depth;
  Rational c_min = 1;
  if (!attr.spec().vertical_normalization) {
    c_min = attr.spec().vertical_weight(0);
    for (std::size_t j = 1; j < attr.symbol_count(); ++j) c_min = std::min(c_min, attr.spec().vertical_weight(j));
  }

  std::vector<Word> layer{Word{}};
  std::vector<VertexIndex> layer_vertices{net.index_of(attr.rational_point(Word{}, 0), 0)};
  std::vector<Rational> net_flow(net.vertex_count(), 0);  // outflow minus inflow
  std::set<VertexIndex> used(layer_vertices.begin(), layer_vertices.end());
  out.tree_vertices = layer_vertices;
  Rational flow = 1, partial = 0;
  for (std::size_t n = 1; n <= depth; ++n) {
    flow /= 2;
    std::vector<Word> next;
    std::vector<VertexIndex> next_vertices;
    Rational level = 0;
    for (std::size_t k = 0; k < layer.size(); ++k) {
      for (Symbol j : {Symbol{0}, Symbol{1}}) {
        const Word child = layer[k].extended(j);
        const auto v = net.find(Vertex{attr.rational_point(child, 0), n});
        if (!v || !used.insert(*v).second) {
          throw Error(ErrorCode::kEmbeddingError, fmt::format("tree node {} does not embed injectively", child.to_string()));
        }
        const Edge* e = net.edge_between(layer_vertices[k], *v);
        if (!e) throw Error(ErrorCode::kEmbeddingError, fmt::format("tree edge to {} missing", child.to_string()));
        level += flow * flow / e->conductance;
        net_flow[layer_vertices[k]] += flow;
        net_flow[*v] -= flow;
        next.push_back(child);
        next_vertices.push_back(*v);
      }
    }
    partial += level;
    out.level_energy.push_back(level);
    out.partial_sums.push_back(partial);
    // Remaining depths carry 2^{-n} each over conductances >= c_min.
    out.majorants.push_back(partial + flow / c_min);
    out.tree_vertices.insert(out.tree_vertices.end(), next_vertices.begin(), next_vertices.end());
    layer = std::move(next);
    layer_vertices = std::move(next_vertices);
  }
  // Internal nodes must balance; the root emits 1 and the leaves absorb 2^{-depth} each.
  const std::set<VertexIndex> leaves(layer_vertices.begin(), layer_vertices.end());
  const VertexIndex root = out.tree_vertices.front();
  for (VertexIndex v : out.tree_vertices) {
    Rational expected = 0;
    if (depth > 0 && v == root) expected = 1;
    if (depth > 0 && leaves.count(v)) expected = -flow;
    Rational defect = abs(net_flow[v] - expected);
    out.max_conservation_defect = std::max(out.max_conservation_defect, defect);
  }
  return out;
}

VertexFunction boundary_extension(const Network& net, std::span<const double> phi, SolverOptions options) {
  return DirichletSolver(net, options).extend(phi);
}

MeanEstimate boundary_extension_monte_carlo(const TransitionKernel& kernel, std::span<const double> phi,
                                            const WalkConfig& config) {
  const Network& net = kernel.network();
  require_interior(net, config.start);
  if (phi.size() != net.vertex_count() - net.interior_count()) {
    throw Error(ErrorCode::kSpecError, "frontier values do not match the frontier size");
  }
  const auto ends = map_walks(kernel, config, [&](std::size_t, Walker& w) {
    while (w.step()) {
    }
    return w.absorbed() ? phi[w.position() - net.interior_count()] : std::nan("");
  });
  std::vector<double> values;
  for (double v : ends) {
    if (!std::isnan(v)) values.push_back(v);
  }
  return mean_estimate(values);
}

double trace_energy(const Network& net, std::span<const double> phi, SolverOptions options) {
  return energy(boundary_extension(net, phi, options));
}

}  // namespace fractalnet
