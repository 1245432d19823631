#include "ofsmpc/pipeline.hpp"

#include <ostream>
#include <string>

#include "ofsmpc/errors.hpp"
#include "ofsmpc/set_io.hpp"

namespace ofsmpc {

namespace {

CovarianceBound compute_bound(const Scenario& s, const KalmanSchedule& schedule, const Mat& p_inf) {
  switch (resolved_bound_method(s, p_inf)) {
    case BoundMethod::analytic_md: return bound_analytic_md(s.model, p_inf, schedule);
    case BoundMethod::scaled_reference: return bound_scaled_reference(schedule, p_inf);
  }
  throw ConfigError("unknown bound method");
}

}  // namespace

BoundMethod resolved_bound_method(const Scenario& s, const Mat& p_inf) {
  if (s.bound_method) return *s.bound_method;
  const AssumptionReport a = check_assumptions(s.model, p_inf);
  return a.initial_cov_below_steady_state && a.dynamics_invertible ? BoundMethod::analytic_md
                                                                   : BoundMethod::scaled_reference;
}

Synthesis synthesize(const Scenario& s) {
  s.validate();
  Synthesis syn;
  const SystemModel& model = s.model;
  const auto nx = model.nx();

  syn.schedule = kalman_schedule(model);
  syn.P_inf = steady_state_prior(model);
  syn.bound = compute_bound(s, syn.schedule, syn.P_inf);
  syn.lqr = lqr_design(model.A, model.B, s.Q_lqr, s.R_lqr);
  const Mat& K = syn.lqr.gains.K;
  const Mat& Acl = syn.lqr.gains.Acl;

  const auto rows = static_cast<std::size_t>(2 * nx);
  syn.budget_e = ProbabilityBudget::uniform(s.p_x, rows);
  syn.budget_n = ProbabilityBudget::uniform(s.p_f, rows);
  syn.E_e = ubcs(syn.bound.P_bar, syn.budget_e);
  if (s.zero_disturbance_set) {
    syn.E_n.zonotope = Zonotope::origin(nx);
    syn.E_n.hrep = HPolytope::box(Vec::Zero(nx), Vec::Zero(nx));
    syn.E_n.degenerate = true;
  } else {
    syn.E_n = ubcs(syn.bound.Phi_bar, syn.budget_n);
  }

  syn.X_hat = pontryagin_diff(s.x_set, syn.E_e.zonotope);
  if (is_empty(syn.X_hat)) {
    throw EmptySetError("state_confidence", 0, "X minus the estimation-error set is empty");
  }
  const Zonotope& En = syn.E_n.zonotope;
  syn.state_sets = tighten_state(syn.X_hat, En, Acl, s.horizon);
  syn.input_sets = tighten_input(s.u_set, En, K, Acl, s.horizon);
  syn.Xf_hat = max_rpi(Acl, En, syn.X_hat.intersect(s.u_set.preimage(K)), s.rpi_max_iter);
  syn.terminal = terminal_set(syn.Xf_hat, En, Acl, s.horizon);

  MpcProblem& p = syn.problem;
  p.A = model.A;
  p.B = model.B;
  p.gains = syn.lqr.gains;
  p.cost = syn.lqr.cost;
  p.horizon = s.horizon;
  p.state_sets = syn.state_sets;
  p.input_sets = syn.input_sets;
  p.terminal = syn.terminal;
  p.disturbance = En;
  p.enforce_initial_state = true;
  p.validate();
  return syn;
}

MpcProblem baseline_for(const Scenario& s, const LqrDesign& lqr) {
  return baseline_problem(s.model.A, s.model.B, lqr.gains, lqr.cost, s.x_set, s.u_set, s.horizon);
}

void write_synthesis(std::ostream& os, const Synthesis& syn) {
  os << "# bound_method " << to_string(syn.bound.method) << "\n";
  write_matrix(os, "P_inf", syn.P_inf);
  write_matrix(os, "P_bar", syn.bound.P_bar);
  write_matrix(os, "Phi_bar", syn.bound.Phi_bar);
  write_matrix(os, "K", syn.lqr.gains.K);
  write_matrix(os, "P_LQR", syn.lqr.cost.P_terminal);
  write_zonotope(os, "E_e", syn.E_e.zonotope);
  write_hpolytope(os, "E_e_hrep", syn.E_e.hrep);
  write_zonotope(os, "E_n", syn.E_n.zonotope);
  write_hpolytope(os, "E_n_hrep", syn.E_n.hrep);
  write_hpolytope(os, "X_hat", syn.X_hat);
  for (std::size_t i = 0; i < syn.state_sets.size(); ++i) {
    write_hpolytope(os, "X_RF_" + std::to_string(i), syn.state_sets[i]);
  }
  for (std::size_t i = 0; i < syn.input_sets.size(); ++i) {
    write_hpolytope(os, "U_RF_" + std::to_string(i), syn.input_sets[i]);
  }
  write_hpolytope(os, "Xf_hat", syn.Xf_hat);
  write_hpolytope(os, "Xf_RF", syn.terminal);
}

}  // namespace ofsmpc
