// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>

#include "swarm/diffusion.hpp"
#include "swarm/fluid.hpp"
#include "swarm/stochastic.hpp"

namespace {

swarm::ModelParams bench_params(int n) {
  swarm::ModelParams p = swarm::ModelParams::closed(n, 1.0, 0.5, 0.3);
  p.alpha[0] = 2.0;
  return p;
}

swarm::DensityState bench_state(std::size_t dim) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  swarm::DensityState x(dim);
  for (auto& v : x) v = u(rng);
  return x;
}

void BM_VectorField(benchmark::State& state) {
  const auto p = bench_params(static_cast<int>(state.range(0)));
  const auto x = bench_state(p.dim());
  std::vector<double> out(p.dim());
  for (auto _ : state) {
    swarm::vector_field(p, x, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_VectorFieldSerial(benchmark::State& state) {
  const auto p = bench_params(static_cast<int>(state.range(0)));
  const auto x = bench_state(p.dim());
  std::vector<double> out(p.dim());
  for (auto _ : state) {
    swarm::vector_field_serial(p, x, out);
    benchmark::DoNotOptimize(out.data());
  }
}

swarm::SimConfig ensemble_config() {
  swarm::SimConfig cfg;
  cfg.t_max = 2.0;
  cfg.record = swarm::RecordMode::fixed_grid;
  cfg.grid_dt = 0.5;
  return cfg;
}

void BM_Ensemble(benchmark::State& state) {
  const swarm::JumpSet jumps(bench_params(2).scaled(200.0));
  const swarm::PopulationState x0 = {100, 50, 50, 20};
  const auto cfg = ensemble_config();
  for (auto _ : state) {
    auto out = swarm::run_ensemble(jumps, x0, cfg, static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_EnsembleSerial(benchmark::State& state) {
  const swarm::JumpSet jumps(bench_params(2).scaled(200.0));
  const swarm::PopulationState x0 = {100, 50, 50, 20};
  const auto cfg = ensemble_config();
  for (auto _ : state) {
    auto out = swarm::run_ensemble_serial(jumps, x0, cfg, static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_Diffusion(benchmark::State& state) {
  const swarm::JumpSet jumps(bench_params(2));
  swarm::DiffusionOptions opts;
  opts.n_paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto s = swarm::simulate_diffusion(jumps, {1.0, 0.2, 0.2, 0.5}, {0.5, 1.0}, opts);
    benchmark::DoNotOptimize(s.cov.data());
  }
}

void BM_DiffusionSerial(benchmark::State& state) {
  const swarm::JumpSet jumps(bench_params(2));
  swarm::DiffusionOptions opts;
  opts.n_paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto s = swarm::simulate_diffusion_serial(jumps, {1.0, 0.2, 0.2, 0.5}, {0.5, 1.0}, opts);
    benchmark::DoNotOptimize(s.cov.data());
  }
}

}  // namespace

BENCHMARK(BM_VectorField)->DenseRange(4, 10, 2);
BENCHMARK(BM_VectorFieldSerial)->DenseRange(4, 10, 2);
BENCHMARK(BM_Ensemble)->Arg(64);
BENCHMARK(BM_EnsembleSerial)->Arg(64);
BENCHMARK(BM_Diffusion)->Arg(256);
BENCHMARK(BM_DiffusionSerial)->Arg(256);

BENCHMARK_MAIN();
