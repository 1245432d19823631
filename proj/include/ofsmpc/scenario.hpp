#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ofsmpc/estimation.hpp"
#include "ofsmpc/set_algebra.hpp"

namespace ofsmpc {

/// Experiment definition, stored as JSON:
///
///   system:      A, B, C, Q, R, mu0, Sigma0, T
///   constraints: X {H, h} or {lower, upper}; U likewise; p_x; p_f or
///                target_task_success
///   mpc:         N, Q_LQR, R_LQR, bound_method, budget_split,
///                zero_disturbance_set (test toggle: E^n = {0})
///   mc:          n_runs, base_seed, workers
///   tolerances:  rpi_max_iter, qp_max_iter
///
/// Unknown keys are rejected.
struct Scenario {
  SystemModel model;
  HPolytope x_set;
  HPolytope u_set;
  double p_x = 0.05;
  double p_f = 0.0;
  std::optional<double> target_task_success;  // when set, p_f is derived from it

  int horizon = 0;
  Mat Q_lqr;
  Mat R_lqr;
  /// Unset: analytic_md when its assumptions hold, scaled_reference otherwise.
  std::optional<BoundMethod> bound_method;
  std::string budget_split = "uniform";
  bool zero_disturbance_set = false;

  long n_runs = 1;
  std::uint64_t base_seed = 0;
  int workers = 1;

  int rpi_max_iter = 500;
  int qp_max_iter = 1000;

  /// Checks every field; throws ConfigError naming the offending key.
  void validate() const;
};

/// p_f such that 1 - (1 - p_f)^(T - 1) = 1 - target.
double p_f_from_task_success(double target, int T);

Scenario load_scenario(std::istream& is);
Scenario load_scenario_file(const std::string& path);
/// Pretty-printed JSON; load(emit(s)) reproduces s.
std::string emit_scenario(const Scenario& s);

}  // namespace ofsmpc
