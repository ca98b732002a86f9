// Benchmarks the data-parallel kernels against their serial reference
// paths: the beampattern sweep and the finite-difference gradient on one
// worker vs the OpenMP pool, the vectorized metrics against the
// explicit-loop reference, and the solver iteration kernel across array
// sizes.

#include <benchmark/benchmark.h>

#include <random>

#include "sgalm/config.hpp"
#include "sgalm/experiment.hpp"
#include "sgalm/manifold.hpp"
#include "sgalm/metrics.hpp"
#include "sgalm/oracle.hpp"
#include "sgalm/solver.hpp"

using namespace sgalm;

namespace {

ScenarioConfig bench_config(int num_antennas, int num_targets = 4) {
  ScenarioConfig cfg;
  cfg.num_antennas = num_antennas;
  cfg.num_users = 2;
  cfg.num_targets = num_targets;
  cfg.noise_power = 1e-12;
  cfg.max_power = 1.0;
  cfg.beampattern_thresholds =
      VectorXd::Constant(num_targets, dbm_to_watts(-25.0));
  cfg.rate_thresholds = VectorXd::Constant(2, 1.0);
  cfg.target_angles = VectorXd::LinSpaced(num_targets, -65.0, 60.0);
  return cfg;
}

}  // namespace

static void BM_BeampatternSweep(benchmark::State& state) {
  const int workers = static_cast<int>(state.range(0));
  const ScenarioConfig cfg = bench_config(257);
  std::mt19937_64 rng(1);
  const MatrixXcd V = manifold::extract(
      manifold::random_point(258, 6, rng), cfg.max_power);
  for (auto _ : state) {
    auto points = compute_beampattern(V, cfg, -90.0, 90.0, 0.5, 20.0, workers);
    benchmark::DoNotOptimize(points.data());
  }
}
BENCHMARK(BM_BeampatternSweep)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_FiniteDifferenceGradient(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  const auto inst = oracle::random_instance(17, 2, 2, rng);
  oracle::FdSpec spec;
  spec.num_threads = threads;
  for (auto _ : state) {
    const MatrixXcd g = oracle::finite_difference_gradient(
        [&](const MatrixXcd& p) {
          return augmented_lagrangian(p, inst.fp, inst.mult, inst.channels,
                                      inst.cfg);
        },
        inst.point, spec);
    benchmark::DoNotOptimize(g.sum());
  }
}
BENCHMARK(BM_FiniteDifferenceGradient)
    ->Arg(1)
    ->Arg(2)
    ->Unit(benchmark::kMillisecond);

static void BM_MetricsVectorized(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const auto inst = oracle::random_instance(M, 2, 4, rng);
  const MatrixXcd V = manifold::extract(inst.point, inst.cfg.max_power);
  for (auto _ : state) {
    double acc = 0.0;
    for (int k = 0; k < 2; ++k) {
      acc += sinr(V, inst.channels.users.col(k), k, inst.cfg.noise_power);
    }
    for (int n = 0; n < 4; ++n) {
      acc += beampattern_gain(V, inst.channels.targets.col(n));
    }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_MetricsVectorized)->Arg(65)->Arg(257);

static void BM_MetricsSerialReference(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const auto inst = oracle::random_instance(M, 2, 4, rng);
  const MatrixXcd V = manifold::extract(inst.point, inst.cfg.max_power);
  for (auto _ : state) {
    const auto brute = oracle::bruteforce_metrics(
        V, inst.channels.users, inst.channels.targets, inst.cfg.noise_power);
    benchmark::DoNotOptimize(brute.power);
  }
}
BENCHMARK(BM_MetricsSerialReference)->Arg(65)->Arg(257);

static void BM_IterationKernel(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  const ScenarioConfig cfg = bench_config(M);
  const Scenario scenario = generate_scenario(cfg);
  std::mt19937_64 rng(4);
  MatrixXcd point = manifold::random_point(M + 1, 6, rng);
  const FpState fp = update_mu(point, scenario.channels, cfg.noise_power);
  MultiplierState mult = MultiplierState::zeros(4, 2);
  mult.sensing_scale = cfg.beampattern_thresholds;
  for (auto _ : state) {
    const MatrixXcd g =
        euclidean_gradient(point, fp, mult, scenario.channels, cfg);
    const MatrixXcd xi = manifold::project_tangent(point, g);
    point = manifold::retract(point, xi, 1e-4 / (1.0 + xi.norm()));
    benchmark::DoNotOptimize(point.data());
  }
}
BENCHMARK(BM_IterationKernel)->Arg(65)->Arg(129)->Arg(257);

static void BM_MonteCarloTrials(benchmark::State& state) {
  const int workers = static_cast<int>(state.range(0));
  ParsedConfig cfg;
  cfg.scenario = bench_config(33, 2);
  cfg.scenario.target_angles = VectorXd(2);
  cfg.scenario.target_angles << -45.0, 30.0;
  cfg.scenario.beampattern_thresholds =
      VectorXd::Constant(2, dbm_to_watts(-25.0));
  cfg.solver.max_fp_iterations = 6;
  SweepSpec spec;
  spec.parameter = "num_antennas";
  spec.values = {"33"};
  spec.trials = 8;
  spec.workers = workers;
  for (auto _ : state) {
    auto points = run_sweep(cfg, spec);
    benchmark::DoNotOptimize(points.data());
  }
}
BENCHMARK(BM_MonteCarloTrials)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
