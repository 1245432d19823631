// ofsmpc synth|simulate|montecarlo|verify --config <path> [options]
//
// Exit codes: 0 ok, 2 configuration error, 3 infeasible synthesis,
// 4 property check failed, 5 solver iteration limit hit.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ofsmpc/errors.hpp"
#include "ofsmpc/pipeline.hpp"
#include "ofsmpc/scenario.hpp"
#include "ofsmpc/sim_harness.hpp"
#include "ofsmpc/verify.hpp"

namespace fs = std::filesystem;
using namespace ofsmpc;

namespace {

enum Exit { kOk = 0, kConfig = 2, kInfeasible = 3, kProperty = 4, kSolverLimit = 5 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> runs;
  std::optional<int> workers;
  std::string controller = "proposed";
  std::string out = ".";
};

Scenario load(const Options& o) {
  Scenario s = load_scenario_file(o.config);
  if (o.seed) s.base_seed = *o.seed;
  if (o.runs) s.n_runs = *o.runs;
  if (o.workers) s.workers = *o.workers;
  s.validate();
  return s;
}

fs::path out_path(const Options& o, const std::string& file) {
  fs::create_directories(o.out);
  return fs::path(o.out) / file;
}

MpcProblem controller_problem(const Options& o, const Scenario& s) {
  if (o.controller == "baseline") {
    return baseline_for(s, lqr_design(s.model.A, s.model.B, s.Q_lqr, s.R_lqr));
  }
  return synthesize(s).problem;
}

int cmd_synth(const Options& o) {
  const Scenario s = load(o);
  const Synthesis syn = synthesize(s);
  const fs::path path = out_path(o, "synthesis.txt");
  std::ofstream f(path);
  write_synthesis(f, syn);
  std::cout << "synthesis written to " << path.string() << "\n";
  return kOk;
}

int cmd_simulate(const Options& o) {
  const Scenario s = load(o);
  const MpcController controller(controller_problem(o, s));
  const KalmanSchedule schedule = kalman_schedule(s.model);
  RngStream rng(s.base_seed, 0);
  const SimTrace tr = simulate_run(s.model, schedule, controller, s.x_set, rng);
  const fs::path path = out_path(o, "trace_" + o.controller + "_seed" + std::to_string(s.base_seed) + ".csv");
  std::ofstream f(path);
  write_trace_csv(f, tr);
  std::cout << "outcome = " << to_string(tr.outcome);
  if (tr.end_step >= 0) std::cout << " at k = " << tr.end_step;
  std::cout << ", violations = " << tr.violation_count << ", trace = " << path.string() << "\n";
  return tr.outcome == RunOutcome::solver_limit ? kSolverLimit : kOk;
}

int cmd_montecarlo(const Options& o) {
  const Scenario s = load(o);
  const MpcController controller(controller_problem(o, s));
  const KalmanSchedule schedule = kalman_schedule(s.model);
  const McConfig cfg{s.n_runs, s.base_seed, s.workers};
  const McReport r = monte_carlo(s.model, schedule, controller, s.x_set, s.p_f, cfg);
  const std::string text = "controller = " + o.controller + "\n" + format_report(r);
  std::cout << text;
  std::ofstream(out_path(o, "report_" + o.controller + ".txt")) << text;
  std::ofstream(out_path(o, "report_" + o.controller + ".csv"))
      << report_csv_header() << "\n" << report_csv_row(o.controller, r) << "\n";
  return r.runs_solver_limit > 0 ? kSolverLimit : kOk;
}

int cmd_verify(const Options& o) {
  const Scenario s = load(o);
  bool all_ok = true;
  auto print = [&](const CheckResult& c) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " : " << c.detail << "\n";
    all_ok = all_ok && c.passed;
  };

  const Mat p_inf = steady_state_prior(s.model);
  const AssumptionReport a = check_assumptions(s.model, p_inf);
  const bool assumptions_ok = a.initial_cov_below_steady_state && a.dynamics_invertible;
  const BoundMethod method = resolved_bound_method(s, p_inf);
  print({"assumptions", assumptions_ok || method != BoundMethod::analytic_md,
         std::string("Sigma0 <= P_inf: ") + (a.initial_cov_below_steady_state ? "yes" : "no") +
             ", A invertible: " + (a.dynamics_invertible ? "yes" : "no") +
             " (required by " + to_string(BoundMethod::analytic_md) + ")"});
  if (!assumptions_ok && method == BoundMethod::analytic_md) return kProperty;

  VerifyOptions vo;
  vo.seed = s.base_seed;
  vo.workers = s.workers;
  Synthesis syn;
  try {
    syn = synthesize(s);
  } catch (const EmptySetError& e) {
    print({"synthesis", false, std::string("stage ") + e.stage() + ": " + e.what()});
    return kInfeasible;
  }
  print({"synthesis", true, "all sets nonempty"});
  for (const CheckResult& c : verify_synthesis(s, syn, vo)) print(c);
  return all_ok ? kOk : kProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Output-feedback stochastic MPC: synthesis, simulation and verification"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "base seed (overrides mc.base_seed)");
    sub->add_option("--runs", o.runs, "number of Monte-Carlo runs")->check(CLI::PositiveNumber);
    sub->add_option("--workers", o.workers, "worker threads, 0 = all")->check(CLI::NonNegativeNumber);
    sub->add_option("--controller", o.controller, "proposed or baseline")
        ->check(CLI::IsMember({"proposed", "baseline"}));
    sub->add_option("--out", o.out, "output directory");
  };
  auto* synth = app.add_subcommand("synth", "compute bounds and tightened sets");
  auto* simulate = app.add_subcommand("simulate", "one closed-loop run, writes a trace CSV");
  auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo campaign report");
  auto* verify = app.add_subcommand("verify", "run the property checks");
  for (auto* sub : {synth, simulate, mc, verify}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*simulate) return cmd_simulate(o);
    if (*mc) return cmd_montecarlo(o);
    return cmd_verify(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const EmptySetError& e) {
    std::cerr << "infeasible synthesis (" << e.stage();
    if (e.index() >= 0) std::cerr << ", step " << e.index();
    std::cerr << "): " << e.what() << "\n";
    return kInfeasible;
  } catch (const DivergenceError& e) {
    std::cerr << "synthesis did not converge: " << e.what() << "\n";
    return kInfeasible;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kProperty;
  }
}
