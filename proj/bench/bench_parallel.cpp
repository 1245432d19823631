// Serial reference kernels against their OpenMP versions.
//
//   bench_parallel --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include <string>

#include "ofsmpc/pipeline.hpp"
#include "ofsmpc/scenario.hpp"
#include "ofsmpc/sim_harness.hpp"

using namespace ofsmpc;

namespace {

struct Fixture {
  Scenario s;
  KalmanSchedule schedule;
  MpcController baseline;
  Mat cov;
  HPolytope e_set;

  static const Fixture& get() {
    static const Fixture f = make();
    return f;
  }

 private:
  static Fixture make() {
    Scenario s = load_scenario_file(std::string(OFSMPC_SCENARIO_DIR) + "/example.json");
    KalmanSchedule ks = kalman_schedule(s.model);
    MpcController base(baseline_for(s, lqr_design(s.model.A, s.model.B, s.Q_lqr, s.R_lqr)));
    const Mat p_inf = steady_state_prior(s.model);
    const CovarianceBound b = bound_analytic_md(s.model, p_inf, ks);
    HPolytope e = ubcs(b.P_bar, ProbabilityBudget::uniform(s.p_x, 4)).hrep;
    Mat cov = ks.post_cov.back();
    return {std::move(s), std::move(ks), std::move(base), std::move(cov), std::move(e)};
  }
};

constexpr long kRuns = 500;
constexpr long kSamples = 1000000;

void BM_MonteCarloSerial(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  for (auto _ : state) {
    McReport r = monte_carlo_serial(f.s.model, f.schedule, f.baseline, f.s.x_set, f.s.p_f, {kRuns, 1, 1});
    benchmark::DoNotOptimize(r);
  }
  state.counters["runs/s"] = benchmark::Counter(static_cast<double>(kRuns), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    McReport r = monte_carlo(f.s.model, f.schedule, f.baseline, f.s.x_set, f.s.p_f, {kRuns, 1, workers});
    benchmark::DoNotOptimize(r);
  }
  state.counters["runs/s"] = benchmark::Counter(static_cast<double>(kRuns), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_CoverageSerial(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(coverage_fraction_serial(f.cov, f.e_set, kSamples, 1));
  state.counters["samples/s"] =
      benchmark::Counter(static_cast<double>(kSamples), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_CoverageParallel(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(coverage_fraction(f.cov, f.e_set, kSamples, 1, workers));
  state.counters["samples/s"] =
      benchmark::Counter(static_cast<double>(kSamples), benchmark::Counter::kIsIterationInvariantRate);
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonteCarloParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CoverageSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CoverageParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
