#include <fractalnet/boundary.hpp>
#include <fractalnet/energy.hpp>
#include <fractalnet/harmonic.hpp>
#include <fractalnet/random_walk.hpp>

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

namespace {

using namespace fractalnet;

const Network& sg(std::size_t m) {
  static std::map<std::size_t, std::unique_ptr<Network>> cache;
  auto& slot = cache[m];
  if (!slot) slot = std::make_unique<Network>(build_network(sierpinski_gasket_spec(), m));
  return *slot;
}

void BM_BuildNetwork(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_network(sierpinski_gasket_spec(), m).vertex_count());
  state.counters["vertices"] = static_cast<double>(sg(m).vertex_count());
}
BENCHMARK(BM_BuildNetwork)->DenseRange(3, 7, 2)->Unit(benchmark::kMillisecond);

void BM_KernelFactorAndSolve(benchmark::State& state) {
  const Network& net = sg(static_cast<std::size_t>(state.range(0)));
  VertexIndex x = net.index_of(net.attractor().rational_point(Word{}, 1), 0);
  for (auto _ : state) {
    EnergyKernelSolver solver(net, BoundaryMode::kFree);
    benchmark::DoNotOptimize(solver.kernel(x).residual);
  }
}
BENCHMARK(BM_KernelFactorAndSolve)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_HarmonicGenerate(benchmark::State& state) {
  const Network& net = sg(static_cast<std::size_t>(state.range(0)));
  const auto m = default_sg_matrices();
  for (auto _ : state) benchmark::DoNotOptimize(harmonic_generate(net, m, {1, 0, 0}).values.size());
}
BENCHMARK(BM_HarmonicGenerate)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_Walks(benchmark::State& state) {
  const Network& net = sg(static_cast<std::size_t>(state.range(0)));
  TransitionKernel kernel(net);
  WalkConfig cfg;
  cfg.walks = 1000;
  cfg.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_ensemble(kernel, cfg).mean_steps);
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.walks));
}
BENCHMARK(BM_Walks)->ArgsProduct({{6, 8}, {1, 4}})->Unit(benchmark::kMillisecond);

void BM_AddressExtraction(benchmark::State& state) {
  const Network& net = sg(8);
  std::size_t v = net.interior_count();
  for (auto _ : state) {
    benchmark::DoNotOptimize(address_of_vertex(net, static_cast<VertexIndex>(v), 8).prefix.size());
    if (++v == net.vertex_count()) v = net.interior_count();
  }
}
BENCHMARK(BM_AddressExtraction);

}  // namespace

BENCHMARK_MAIN();
