#include "ofsmpc/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

std::string to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::success: return "success";
    case RunOutcome::failed: return "failed";
    case RunOutcome::initially_infeasible: return "initially_infeasible";
    case RunOutcome::solver_limit: return "solver_limit";
  }
  return "unknown";
}

SimTrace simulate_run(const SystemModel& model, const KalmanSchedule& schedule,
                      const MpcController& controller, const HPolytope& x_set,
                      RngStream& rng) {
  const int T = model.T;
  if (schedule.horizon() != T) throw DimensionError("simulate_run: schedule length differs from T");
  if (controller.problem().nx() != model.nx()) throw DimensionError("simulate_run: controller dimension");

  const GaussianSampler x0_dist(model.mu0, model.Sigma0);
  const GaussianSampler w_dist(Vec::Zero(model.nx()), model.Qw);
  const GaussianSampler v_dist(Vec::Zero(model.ny()), model.Rv);

  // x_k on the boundary of X (an active nominal constraint with zero noise)
  // must not count as a violation because of round-off.
  const double violation_tol = 1e-9 * (1.0 + x_set.h.cwiseAbs().maxCoeff());

  SimTrace tr;
  tr.x.reserve(static_cast<std::size_t>(T));
  Vec x = x0_dist.draw(rng);
  Vec y = model.C * x + v_dist.draw_zero_mean(rng);
  FilterState fs = filter_init(model, y, schedule);

  for (int k = 0; k < T; ++k) {
    tr.x.push_back(x);
    tr.y.push_back(y);
    tr.xhat.push_back(fs.xhat);
    const bool violated = x_set.max_violation(x) > violation_tol;
    tr.violated.push_back(violated ? 1 : 0);
    if (violated) ++tr.violation_count;

    const ControlStep step = controller.control_step(fs.xhat);
    tr.status.push_back(step.solution.status);
    if (step.solution.status == MpcStatus::infeasible) {
      tr.outcome = k == 0 ? RunOutcome::initially_infeasible : RunOutcome::failed;
      tr.end_step = k;
      return tr;
    }
    if (step.solution.status == MpcStatus::iteration_limit) {
      tr.outcome = RunOutcome::solver_limit;
      tr.end_step = k;
      return tr;
    }
    tr.u.push_back(step.u);
    if (k + 1 == T) break;

    x = model.A * x + model.B * step.u + w_dist.draw_zero_mean(rng);
    y = model.C * x + v_dist.draw_zero_mean(rng);
    fs = filter_step(fs, step.u, y, model, schedule);
  }
  tr.outcome = RunOutcome::success;
  return tr;
}

void write_trace_csv(std::ostream& os, const SimTrace& tr) {
  if (tr.x.empty()) return;
  const auto nx = tr.x.front().size();
  const auto ny = tr.y.front().size();
  const auto nu = tr.u.empty() ? Eigen::Index{0} : tr.u.front().size();
  os << "k";
  for (Eigen::Index i = 0; i < nx; ++i) os << ",x" << i;
  for (Eigen::Index i = 0; i < nx; ++i) os << ",xhat" << i;
  for (Eigen::Index i = 0; i < ny; ++i) os << ",y" << i;
  for (Eigen::Index i = 0; i < nu; ++i) os << ",u" << i;
  os << ",feasible,violated\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.10g", v);
    os << buf;
  };
  for (int k = 0; k < tr.steps(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    os << k;
    for (Eigen::Index i = 0; i < nx; ++i) put(tr.x[kk](i));
    for (Eigen::Index i = 0; i < nx; ++i) put(tr.xhat[kk](i));
    for (Eigen::Index i = 0; i < ny; ++i) put(tr.y[kk](i));
    for (Eigen::Index i = 0; i < nu; ++i) {
      if (kk < tr.u.size()) put(tr.u[kk](i));
      else os << ",";
    }
    os << "," << (tr.status[kk] == MpcStatus::optimal ? 1 : 0) << "," << int(tr.violated[kk]) << "\n";
  }
}

namespace {

struct RunSummary {
  RunOutcome outcome = RunOutcome::success;
  long violations = 0;
  long steps = 0;
};

RunSummary summarize(const SimTrace& tr) {
  return {tr.outcome, tr.violation_count, tr.steps()};
}

McReport fold(const std::vector<RunSummary>& runs, double p_f, int T) {
  McReport r;
  r.runs_total = static_cast<long>(runs.size());
  for (const RunSummary& s : runs) {
    switch (s.outcome) {
      case RunOutcome::success:
        ++r.runs_successful;
        r.violation_count += s.violations;
        r.successful_step_count += s.steps;
        break;
      case RunOutcome::failed: ++r.runs_failed; break;
      case RunOutcome::initially_infeasible: ++r.runs_initially_infeasible; break;
      case RunOutcome::solver_limit: ++r.runs_solver_limit; break;
    }
  }
  const long eligible = r.runs_successful + r.runs_failed;
  r.task_failure_rate = eligible > 0 ? static_cast<double>(r.runs_failed) / static_cast<double>(eligible) : 0.0;
  r.violation_rate = r.successful_step_count > 0
                         ? static_cast<double>(r.violation_count) / static_cast<double>(r.successful_step_count)
                         : 0.0;
  r.theoretical_failure_bound = 1.0 - std::pow(1.0 - p_f, T - 1);
  return r;
}

// Runs body(i) for i in [0, n) on `workers` threads and rethrows the first
// exception (lowest index) after the loop.
template <class Body>
void parallel_for(long n, int workers, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_config(const McConfig& cfg) {
  if (cfg.n_runs < 1) throw PreconditionError("monte_carlo: n_runs must be >= 1");
}

}  // namespace

McReport monte_carlo(const SystemModel& model, const KalmanSchedule& schedule,
                     const MpcController& controller, const HPolytope& x_set,
                     double p_f, const McConfig& cfg) {
  check_config(cfg);
  std::vector<RunSummary> runs(static_cast<std::size_t>(cfg.n_runs));
  parallel_for(cfg.n_runs, cfg.workers, [&](long i) {
    RngStream rng(cfg.base_seed, static_cast<std::uint64_t>(i));
    runs[static_cast<std::size_t>(i)] = summarize(simulate_run(model, schedule, controller, x_set, rng));
  });
  return fold(runs, p_f, model.T);
}

McReport monte_carlo_serial(const SystemModel& model, const KalmanSchedule& schedule,
                            const MpcController& controller, const HPolytope& x_set,
                            double p_f, const McConfig& cfg) {
  check_config(cfg);
  std::vector<RunSummary> runs;
  runs.reserve(static_cast<std::size_t>(cfg.n_runs));
  for (long i = 0; i < cfg.n_runs; ++i) {
    RngStream rng(cfg.base_seed, static_cast<std::uint64_t>(i));
    runs.push_back(summarize(simulate_run(model, schedule, controller, x_set, rng)));
  }
  return fold(runs, p_f, model.T);
}

std::string format_report(const McReport& r) {
  std::ostringstream os;
  char buf[64];
  auto real = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  os << "runs_total = " << r.runs_total << "\n"
     << "runs_initially_infeasible = " << r.runs_initially_infeasible << "\n"
     << "runs_failed = " << r.runs_failed << "\n"
     << "runs_solver_limit = " << r.runs_solver_limit << "\n"
     << "runs_successful = " << r.runs_successful << "\n"
     << "task_failure_rate = " << real(r.task_failure_rate) << "\n"
     << "violation_count = " << r.violation_count << "\n"
     << "successful_step_count = " << r.successful_step_count << "\n"
     << "violation_rate = " << real(r.violation_rate) << "\n"
     << "theoretical_failure_bound = " << real(r.theoretical_failure_bound) << "\n";
  return os.str();
}

std::string report_csv_header() {
  return "label,runs_total,runs_initially_infeasible,runs_failed,runs_solver_limit,"
         "runs_successful,task_failure_rate,violation_count,successful_step_count,"
         "violation_rate,theoretical_failure_bound";
}

std::string report_csv_row(const std::string& label, const McReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%ld,%ld,%ld,%ld,%ld,%.10g,%ld,%ld,%.10g,%.10g", label.c_str(),
                r.runs_total, r.runs_initially_infeasible, r.runs_failed, r.runs_solver_limit,
                r.runs_successful, r.task_failure_rate, r.violation_count,
                r.successful_step_count, r.violation_rate, r.theoretical_failure_bound);
  return buf;
}

StepCoverage closed_loop_coverage(const SystemModel& model, const KalmanSchedule& schedule,
                                  const MpcController& controller, const HPolytope& x_set,
                                  const HPolytope& e_set, const HPolytope& n_set,
                                  const McConfig& cfg) {
  check_config(cfg);
  const auto T = static_cast<std::size_t>(model.T);
  struct PerRun {
    bool used = false;
    std::vector<char> e_in, n_in;
  };
  std::vector<PerRun> runs(static_cast<std::size_t>(cfg.n_runs));
  parallel_for(cfg.n_runs, cfg.workers, [&](long i) {
    RngStream rng(cfg.base_seed, static_cast<std::uint64_t>(i));
    const SimTrace tr = simulate_run(model, schedule, controller, x_set, rng);
    if (tr.outcome != RunOutcome::success) return;
    PerRun& pr = runs[static_cast<std::size_t>(i)];
    pr.used = true;
    for (std::size_t k = 0; k < T; ++k) pr.e_in.push_back(e_set.contains(tr.x[k] - tr.xhat[k], 0.0));
    for (std::size_t k = 0; k + 1 < T; ++k) {
      const Vec n = tr.xhat[k + 1] - model.A * tr.xhat[k] - model.B * tr.u[k];
      pr.n_in.push_back(n_set.contains(n, 0.0));
    }
  });
  StepCoverage cov;
  cov.e_samples.assign(T, 0);
  cov.e_inside.assign(T, 0);
  cov.n_samples.assign(T - 1, 0);
  cov.n_inside.assign(T - 1, 0);
  for (const PerRun& pr : runs) {
    if (!pr.used) continue;
    ++cov.runs_used;
    for (std::size_t k = 0; k < T; ++k) {
      ++cov.e_samples[k];
      cov.e_inside[k] += pr.e_in[k];
    }
    for (std::size_t k = 0; k + 1 < T; ++k) {
      ++cov.n_samples[k];
      cov.n_inside[k] += pr.n_in[k];
    }
  }
  return cov;
}

namespace {
constexpr long kCoverageChunk = 1L << 16;

long count_chunk(const GaussianSampler& g, const HPolytope& set, std::uint64_t seed, long chunk,
                 long n_samples) {
  RngStream rng(seed, static_cast<std::uint64_t>(chunk));
  const long begin = chunk * kCoverageChunk;
  const long end = std::min(n_samples, begin + kCoverageChunk);
  long inside = 0;
  for (long s = begin; s < end; ++s) inside += set.contains(g.draw_zero_mean(rng), 0.0) ? 1 : 0;
  return inside;
}
}  // namespace

double coverage_fraction(const Mat& cov, const HPolytope& set, long n_samples,
                         std::uint64_t seed, int workers) {
  if (n_samples < 1) throw PreconditionError("coverage_fraction: n_samples must be >= 1");
  const GaussianSampler g(Vec::Zero(cov.rows()), cov);
  const long chunks = (n_samples + kCoverageChunk - 1) / kCoverageChunk;
  std::vector<long> counts(static_cast<std::size_t>(chunks), 0);
  parallel_for(chunks, workers, [&](long c) {
    counts[static_cast<std::size_t>(c)] = count_chunk(g, set, seed, c, n_samples);
  });
  long inside = 0;
  for (long c : counts) inside += c;
  return static_cast<double>(inside) / static_cast<double>(n_samples);
}

double coverage_fraction_serial(const Mat& cov, const HPolytope& set, long n_samples,
                                std::uint64_t seed) {
  if (n_samples < 1) throw PreconditionError("coverage_fraction: n_samples must be >= 1");
  const GaussianSampler g(Vec::Zero(cov.rows()), cov);
  const long chunks = (n_samples + kCoverageChunk - 1) / kCoverageChunk;
  long inside = 0;
  for (long c = 0; c < chunks; ++c) inside += count_chunk(g, set, seed, c, n_samples);
  return static_cast<double>(inside) / static_cast<double>(n_samples);
}

}  // namespace ofsmpc
