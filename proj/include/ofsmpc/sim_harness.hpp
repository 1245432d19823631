#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ofsmpc/estimation.hpp"
#include "ofsmpc/rng.hpp"
#include "ofsmpc/set_algebra.hpp"
#include "ofsmpc/smpc.hpp"

namespace ofsmpc {

enum class RunOutcome {
  success,
  failed,                // infeasible at some k >= 1
  initially_infeasible,  // infeasible at k = 0
  solver_limit,          // QP gave up; excluded from all statistics
};
std::string to_string(RunOutcome o);

/// One closed-loop run. Index k runs over the visited steps; u and status
/// stop at the step where the run ended.
struct SimTrace {
  std::vector<Vec> x, y, xhat;
  std::vector<Vec> u;
  std::vector<MpcStatus> status;
  std::vector<char> violated;  // x_k outside X
  RunOutcome outcome = RunOutcome::success;
  int end_step = -1;  // step of the infeasible / aborted solve, -1 on success
  long violation_count = 0;

  int steps() const { return static_cast<int>(x.size()); }
  Vec estimation_error(int k) const { return x[static_cast<std::size_t>(k)] - xhat[static_cast<std::size_t>(k)]; }
};

/// Draws x0 ~ N(mu0, Sigma0) and the noise sequence from `rng`, then runs the
/// filter and the controller for k = 0..T-1. `x_set` is the original state
/// constraint used to flag violations.
SimTrace simulate_run(const SystemModel& model, const KalmanSchedule& schedule,
                      const MpcController& controller, const HPolytope& x_set,
                      RngStream& rng);

void write_trace_csv(std::ostream& os, const SimTrace& trace);

struct McConfig {
  long n_runs = 1;
  std::uint64_t base_seed = 0;
  int workers = 1;  // <= 0: OpenMP default
};

struct McReport {
  long runs_total = 0;
  long runs_initially_infeasible = 0;
  long runs_failed = 0;
  long runs_solver_limit = 0;
  long runs_successful = 0;
  double task_failure_rate = 0.0;
  long violation_count = 0;
  long successful_step_count = 0;
  double violation_rate = 0.0;
  double theoretical_failure_bound = 0.0;  // 1 - (1 - p_f)^(T-1)
};

/// Run i uses RngStream(base_seed, i). The report is folded in run order, so it
/// does not depend on `workers`.
McReport monte_carlo(const SystemModel& model, const KalmanSchedule& schedule,
                     const MpcController& controller, const HPolytope& x_set,
                     double p_f, const McConfig& cfg);
/// Single-threaded reference of monte_carlo.
McReport monte_carlo_serial(const SystemModel& model, const KalmanSchedule& schedule,
                            const MpcController& controller, const HPolytope& x_set,
                            double p_f, const McConfig& cfg);

/// key = value lines.
std::string format_report(const McReport& r);
std::string report_csv_header();
std::string report_csv_row(const std::string& label, const McReport& r);

/// Per-step frequencies over successful runs of e_k in E^e and of the
/// estimator disturbance n_k = xhat_{k+1} - A xhat_k - B u_k in E^n.
struct StepCoverage {
  std::vector<long> e_samples, e_inside;  // k = 0..T-1
  std::vector<long> n_samples, n_inside;  // k = 0..T-2
  long runs_used = 0;
};
StepCoverage closed_loop_coverage(const SystemModel& model, const KalmanSchedule& schedule,
                                  const MpcController& controller, const HPolytope& x_set,
                                  const HPolytope& e_set, const HPolytope& n_set,
                                  const McConfig& cfg);

/// Fraction of `n_samples` draws from N(0, cov) inside `set`. Samples are
/// drawn in fixed chunks with one stream per chunk, so the count is the same
/// for every worker count.
double coverage_fraction(const Mat& cov, const HPolytope& set, long n_samples,
                         std::uint64_t seed, int workers = 1);
double coverage_fraction_serial(const Mat& cov, const HPolytope& set, long n_samples,
                                std::uint64_t seed);

}  // namespace ofsmpc
