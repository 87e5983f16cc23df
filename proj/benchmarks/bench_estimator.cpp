#include <benchmark/benchmark.h>

#include <random>

#include "galoc/estimator.hpp"
#include "galoc/scenario.hpp"

namespace {

using namespace galoc;

WindowProblem random_problem(int tw, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0), W(0.1, 2.0);
  const auto st = discretize(DynamicsParams{});
  WindowSequences s;
  for (int k = 0; k <= tw; ++k) {
    Vector6d prior, pw;
    Vector8d y, mw;
    for (int j = 0; j < 6; ++j) {
      prior[j] = U(rng);
      pw[j] = W(rng);
    }
    for (int j = 0; j < 8; ++j) {
      y[j] = U(rng);
      mw[j] = W(rng);
    }
    s.priors.push_back(prior);
    s.prior_weights.push_back(pw);
    s.measurements.push_back(y);
    s.measurement_weights.push_back(mw);
    s.observations.push_back(assemble_observation(Vec3(U(rng), U(rng), 2.0).normalized()).C);
    s.times.push_back(0.04 * k);
    if (k > 0) {
      s.inputs.push_back(Vec3(U(rng), U(rng), U(rng)));
      s.transitions.push_back(st);
      Vector6d tw6;
      for (int j = 0; j < 6; ++j) tw6[j] = W(rng);
      s.transfer_weights.push_back(tw6);
    }
  }
  return build_problem(s);
}

void BM_SolveFull(benchmark::State& state) {
  const auto p = random_problem(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_full(p).x.data());
}
BENCHMARK(BM_SolveFull)->DenseRange(2, 12, 2);

void BM_SolveReduced(benchmark::State& state) {
  const int tw = static_cast<int>(state.range(0));
  const auto p = random_problem(tw, 1);
  const auto tau = polynomial_basis(p.times, 3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_reduced(p, tau).x.data());
}
BENCHMARK(BM_SolveReduced)->DenseRange(4, 12, 2);

// One closed-loop scenario second (25 ticks) per iteration, estimator included.
void BM_ScenarioSecond(benchmark::State& state) {
  auto cfg = preset("s1_clear");
  cfg.duration = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg).ticks.size());
}
BENCHMARK(BM_ScenarioSecond)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
