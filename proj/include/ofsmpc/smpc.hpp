#pragma once

#include <string>
#include <vector>

#include "ofsmpc/mat_core.hpp"
#include "ofsmpc/qp.hpp"
#include "ofsmpc/set_algebra.hpp"

namespace ofsmpc {

struct CostSpec {
  Mat Q_stage;
  Mat R_stage;
  Mat P_terminal;
};

struct ControllerGains {
  Mat K;    // u = K x
  Mat Acl;  // A + B K
};

struct LqrDesign {
  ControllerGains gains;
  CostSpec cost;
};

/// Infinite-horizon LQR: P from the control DARE, K = -(R + B^T P B)^{-1} B^T P A.
LqrDesign lqr_design(const Mat& a, const Mat& b, const Mat& q_stage, const Mat& r_stage);

/// Tightened finite-horizon problem solved at every step:
///   min sum_i xbar_i^T Q xbar_i + c_i^T R c_i + xbar_N^T P xbar_N
///   xbar_{i+1} = A xbar_i + B c_i, xbar_0 = xhat,
///   xbar_i in state_sets[i], c_i in input_sets[i], xbar_N in terminal.
struct MpcProblem {
  Mat A, B;
  ControllerGains gains;
  CostSpec cost;
  int horizon = 0;
  std::vector<HPolytope> state_sets;
  std::vector<HPolytope> input_sets;
  HPolytope terminal;
  /// Set the estimator disturbance may take per step; the origin for the
  /// deterministic baseline.
  Zonotope disturbance;
  /// Whether xbar_0 = xhat has to lie in state_sets[0]. The baseline only
  /// constrains the predicted states x_1..x_N.
  bool enforce_initial_state = true;

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index nu() const { return B.cols(); }
  void validate() const;
};

/// Deterministic MPC on the raw constraints: every state set is X, every input
/// set is U, and the terminal set is the maximal positive invariant subset of
/// X intersected with {x : K x in U} under x+ = Acl x.
MpcProblem baseline_problem(const Mat& a, const Mat& b, const ControllerGains& gains,
                            const CostSpec& cost, const HPolytope& x_set,
                            const HPolytope& u_set, int horizon);

enum class MpcStatus { optimal, infeasible, iteration_limit };
std::string to_string(MpcStatus s);

struct MpcSolution {
  MpcStatus status = MpcStatus::infeasible;
  std::vector<Vec> c_seq;     // c_0..c_{N-1}
  std::vector<Vec> xbar_seq;  // xbar_0..xbar_N, propagated from c_seq
  double objective = 0.0;
  double kkt_residual = 0.0;
  /// Phase-1 violation when infeasible, or the violation of xbar_0 when the
  /// initial state constraint alone fails.
  double infeasibility = 0.0;
  bool initial_state_violated = false;
};

struct ControlStep {
  Vec u;
  MpcSolution solution;
};

/// Condensed form of an MpcProblem: the nominal states are eliminated, the
/// decision vector is c_0..c_{N-1} stacked, and everything that does not
/// depend on xhat is computed once.
class MpcController {
 public:
  explicit MpcController(MpcProblem problem, QpOptions qp_options = {});

  const MpcProblem& problem() const { return problem_; }

  /// Rows of the condensed QP: state sets 1..N-1, input sets 0..N-1 and the
  /// terminal set. The constraint on xbar_0 is checked separately.
  Eigen::Index constraint_count() const { return a_ineq_.rows(); }

  QpProblem build_qp(const Vec& xhat) const;
  MpcSolution solve(const Vec& xhat) const;
  ControlStep control_step(const Vec& xhat) const;

  /// Shifted-candidate check for one step ahead: with xhat_{k+1} =
  /// xbar_1 + n_tilde, builds c~_i = c*_{i+1} + K Acl^i n_tilde (i <= N-2),
  /// c~_{N-1} = K (xbar_N + Acl^{N-1} n_tilde), propagates the nominal states
  /// and reports whether every tightened constraint holds.
  /// Throws PreconditionError if n_tilde is outside the disturbance set or the
  /// solution is not optimal.
  bool feasibility_probe(const MpcSolution& solution, const Vec& n_tilde,
                         double tol = 1e-7) const;

 private:
  MpcProblem problem_;
  QpOptions qp_options_;
  Mat sx_;      // stacked A^i, i = 0..N
  Mat su_;      // stacked input-to-state map
  Mat hessian_; // 2 (Su^T Qbar Su + Rbar)
  Mat f_x_;     // f = f_x xhat
  Mat c_x_;     // constant = xhat^T c_x xhat
  Mat a_ineq_;
  Vec b0_;      // b = b0 - b_x xhat
  Mat b_x_;
};

}  // namespace ofsmpc
