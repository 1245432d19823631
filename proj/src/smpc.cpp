#include "ofsmpc/smpc.hpp"

#include <algorithm>
#include <utility>

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

LqrDesign lqr_design(const Mat& a, const Mat& b, const Mat& q_stage, const Mat& r_stage) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || q_stage.rows() != a.rows() ||
      r_stage.rows() != b.cols()) {
    throw DimensionError("lqr_design: inconsistent dimensions");
  }
  const Mat q = make_symmetric(q_stage, "Q_stage");
  const Mat r = make_symmetric(r_stage, "R_stage");
  if (min_eigenvalue(q) < -1e-12) throw PreconditionError("lqr_design: Q_stage not PSD");
  if (min_eigenvalue(r) <= 0.0) throw PreconditionError("lqr_design: R_stage not PD");
  if (!is_controllable(a, b)) throw PreconditionError("lqr_design: (A, B) not controllable");

  LqrDesign out;
  out.cost.Q_stage = q;
  out.cost.R_stage = r;
  out.cost.P_terminal = dare(a, b, q, r);
  const Mat& p = out.cost.P_terminal;
  out.gains.K = -chol_solve(r + b.transpose() * p * b, b.transpose() * p * a);
  out.gains.Acl = a + b * out.gains.K;
  if (spectral_radius(out.gains.Acl) >= 1.0) {
    throw ConsistencyError("lqr_design: closed loop is not Schur");
  }
  return out;
}

void MpcProblem::validate() const {
  const auto n = nx();
  const auto m = nu();
  if (A.cols() != n || B.rows() != n) throw DimensionError("MpcProblem: A/B dimensions");
  if (gains.K.rows() != m || gains.K.cols() != n || gains.Acl.rows() != n || gains.Acl.cols() != n) {
    throw DimensionError("MpcProblem: gain dimensions");
  }
  if (cost.Q_stage.rows() != n || cost.R_stage.rows() != m || cost.P_terminal.rows() != n) {
    throw DimensionError("MpcProblem: cost dimensions");
  }
  if (horizon < 1) throw PreconditionError("MpcProblem: horizon must be >= 1");
  const auto len = static_cast<std::size_t>(horizon);
  if (state_sets.size() != len || input_sets.size() != len) {
    throw DimensionError("MpcProblem: need one state and one input set per stage");
  }
  for (std::size_t i = 0; i < len; ++i) {
    if (state_sets[i].dim() != n) throw DimensionError("MpcProblem: state set dimension");
    if (input_sets[i].dim() != m) throw DimensionError("MpcProblem: input set dimension");
    if (is_empty(state_sets[i])) throw EmptySetError("state_tightening", static_cast<int>(i), "empty state set");
    if (is_empty(input_sets[i])) throw EmptySetError("input_tightening", static_cast<int>(i), "empty input set");
  }
  if (terminal.dim() != n) throw DimensionError("MpcProblem: terminal set dimension");
  if (is_empty(terminal)) throw EmptySetError("terminal_tightening", horizon, "empty terminal set");
  if (disturbance.dim() != n) throw DimensionError("MpcProblem: disturbance dimension");
}

MpcProblem baseline_problem(const Mat& a, const Mat& b, const ControllerGains& gains,
                            const CostSpec& cost, const HPolytope& x_set,
                            const HPolytope& u_set, int horizon) {
  MpcProblem p;
  p.A = a;
  p.B = b;
  p.gains = gains;
  p.cost = cost;
  p.horizon = horizon;
  p.state_sets.assign(static_cast<std::size_t>(horizon), x_set);
  p.input_sets.assign(static_cast<std::size_t>(horizon), u_set);
  p.disturbance = Zonotope::origin(a.rows());
  p.enforce_initial_state = true;
  const HPolytope admissible = x_set.intersect(u_set.preimage(gains.K));
  try {
    p.terminal = max_rpi(gains.Acl, p.disturbance, admissible);
  } catch (const EmptySetError& e) {
    throw ConfigError(std::string("baseline terminal set: ") + e.what());
  }
  p.validate();
  return p;
}

std::string to_string(MpcStatus s) {
  switch (s) {
    case MpcStatus::optimal: return "optimal";
    case MpcStatus::infeasible: return "infeasible";
    case MpcStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

MpcController::MpcController(MpcProblem problem, QpOptions qp_options)
    : problem_(std::move(problem)), qp_options_(qp_options) {
  problem_.validate();
  const auto n = problem_.nx();
  const auto m = problem_.nu();
  const int N = problem_.horizon;
  const Mat& A = problem_.A;
  const Mat& B = problem_.B;

  sx_ = Mat::Zero((N + 1) * n, n);
  su_ = Mat::Zero((N + 1) * n, N * m);
  sx_.topRows(n).setIdentity();
  for (int i = 1; i <= N; ++i) {
    sx_.middleRows(i * n, n) = A * sx_.middleRows((i - 1) * n, n);
    su_.middleRows(i * n, n) = A * su_.middleRows((i - 1) * n, n);
    su_.block(i * n, (i - 1) * m, n, m) = B;
  }

  Mat qbar = Mat::Zero((N + 1) * n, (N + 1) * n);
  for (int i = 0; i < N; ++i) qbar.block(i * n, i * n, n, n) = problem_.cost.Q_stage;
  qbar.block(N * n, N * n, n, n) = problem_.cost.P_terminal;
  Mat rbar = Mat::Zero(N * m, N * m);
  for (int i = 0; i < N; ++i) rbar.block(i * m, i * m, m, m) = problem_.cost.R_stage;

  hessian_ = 2.0 * (su_.transpose() * qbar * su_ + rbar);
  hessian_ = 0.5 * (hessian_ + hessian_.transpose()).eval();
  f_x_ = 2.0 * su_.transpose() * qbar * sx_;
  c_x_ = sx_.transpose() * qbar * sx_;

  Eigen::Index rows = problem_.terminal.rows();
  for (int i = 0; i < N; ++i) {
    if (i >= 1) rows += problem_.state_sets[static_cast<std::size_t>(i)].rows();
    rows += problem_.input_sets[static_cast<std::size_t>(i)].rows();
  }
  a_ineq_ = Mat::Zero(rows, N * m);
  b0_ = Vec::Zero(rows);
  b_x_ = Mat::Zero(rows, n);
  Eigen::Index r = 0;
  auto add_state_rows = [&](const HPolytope& set, int i) {
    const auto k = set.rows();
    a_ineq_.middleRows(r, k) = set.H * su_.middleRows(i * n, n);
    b_x_.middleRows(r, k) = set.H * sx_.middleRows(i * n, n);
    b0_.segment(r, k) = set.h;
    r += k;
  };
  for (int i = 0; i < N; ++i) {
    if (i >= 1) add_state_rows(problem_.state_sets[static_cast<std::size_t>(i)], i);
    const HPolytope& u = problem_.input_sets[static_cast<std::size_t>(i)];
    a_ineq_.block(r, i * m, u.rows(), m) = u.H;
    b0_.segment(r, u.rows()) = u.h;
    r += u.rows();
  }
  add_state_rows(problem_.terminal, N);
}

QpProblem MpcController::build_qp(const Vec& xhat) const {
  if (xhat.size() != problem_.nx()) throw DimensionError("build_qp: state dimension");
  QpProblem qp;
  qp.H = hessian_;
  qp.f = f_x_ * xhat;
  qp.A = a_ineq_;
  qp.b = b0_ - b_x_ * xhat;
  qp.constant = xhat.dot(c_x_ * xhat);
  return qp;
}

MpcSolution MpcController::solve(const Vec& xhat) const {
  MpcSolution sol;
  if (problem_.enforce_initial_state) {
    const double v = problem_.state_sets.front().max_violation(xhat);
    if (v > 1e-9 * (1.0 + problem_.state_sets.front().h.cwiseAbs().maxCoeff())) {
      sol.status = MpcStatus::infeasible;
      sol.initial_state_violated = true;
      sol.infeasibility = v;
      return sol;
    }
  }
  const QpProblem qp = build_qp(xhat);
  const QpResult res = qp_solve(qp, qp_options_);
  sol.kkt_residual = res.kkt_residual;
  if (res.status == QpStatus::infeasible) {
    sol.status = MpcStatus::infeasible;
    sol.infeasibility = res.phase1_violation;
    return sol;
  }
  if (res.status == QpStatus::iteration_limit) {
    sol.status = MpcStatus::iteration_limit;
    sol.infeasibility = res.phase1_violation;
    return sol;
  }
  const auto m = problem_.nu();
  const int N = problem_.horizon;
  sol.status = MpcStatus::optimal;
  sol.objective = res.objective;
  sol.c_seq.reserve(static_cast<std::size_t>(N));
  sol.xbar_seq.reserve(static_cast<std::size_t>(N + 1));
  sol.xbar_seq.push_back(xhat);
  for (int i = 0; i < N; ++i) {
    sol.c_seq.push_back(res.x.segment(i * m, m));
    sol.xbar_seq.push_back(problem_.A * sol.xbar_seq.back() + problem_.B * sol.c_seq.back());
  }
  return sol;
}

ControlStep MpcController::control_step(const Vec& xhat) const {
  ControlStep step;
  step.solution = solve(xhat);
  if (step.solution.status == MpcStatus::optimal) step.u = step.solution.c_seq.front();
  return step;
}

bool MpcController::feasibility_probe(const MpcSolution& solution, const Vec& n_tilde,
                                      double tol) const {
  if (solution.status != MpcStatus::optimal) {
    throw PreconditionError("feasibility_probe: solution is not optimal");
  }
  if (n_tilde.size() != problem_.nx()) throw DimensionError("feasibility_probe: disturbance dimension");
  if (!problem_.disturbance.contains(n_tilde)) {
    throw PreconditionError("feasibility_probe: n_tilde outside the disturbance set");
  }
  const int N = problem_.horizon;
  const Mat& K = problem_.gains.K;
  const Mat& Acl = problem_.gains.Acl;

  std::vector<Vec> c(static_cast<std::size_t>(N));
  Vec propagated = n_tilde;  // Acl^i n_tilde
  for (int i = 0; i + 1 < N; ++i) {
    c[static_cast<std::size_t>(i)] = solution.c_seq[static_cast<std::size_t>(i + 1)] + K * propagated;
    propagated = Acl * propagated;
  }
  c[static_cast<std::size_t>(N - 1)] = K * (solution.xbar_seq.back() + propagated);

  auto inside = [tol](const HPolytope& set, const Vec& v) {
    return set.max_violation(v) <= tol * (1.0 + set.h.cwiseAbs().maxCoeff());
  };
  Vec x = solution.xbar_seq[1] + n_tilde;
  for (int i = 0; i < N; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if ((i > 0 || problem_.enforce_initial_state) && !inside(problem_.state_sets[idx], x)) return false;
    if (!inside(problem_.input_sets[idx], c[idx])) return false;
    x = problem_.A * x + problem_.B * c[idx];
  }
  return inside(problem_.terminal, x);
}

}  // namespace ofsmpc
