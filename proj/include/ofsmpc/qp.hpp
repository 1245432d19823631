#pragma once

#include <string>

#include "ofsmpc/mat_core.hpp"

namespace ofsmpc {

/// min 0.5 x^T H x + f^T x + constant   s.t.   A x <= b,  H positive definite.
struct QpProblem {
  Mat H;
  Vec f;
  Mat A;
  Vec b;
  double constant = 0.0;
};

/// `iteration_limit` covers every outcome that is neither a certified optimum
/// nor a certified infeasibility; it must never be counted as infeasible.
enum class QpStatus { optimal, infeasible, iteration_limit };

std::string to_string(QpStatus s);

struct QpOptions {
  int max_iter = 1000;
  double feas_tol = 1e-9;  // constraint violation accepted by the active-set loop
  double kkt_tol = 1e-7;   // relative KKT residual required for `optimal`
  double infeasibility_tol = 1e-7;  // phase-1 violation that certifies infeasibility
};

struct QpResult {
  QpStatus status = QpStatus::iteration_limit;
  Vec x;
  Vec multipliers;  // one per row of A
  double objective = 0.0;
  double kkt_residual = 0.0;       // relative, see qp_kkt_residual
  double phase1_violation = 0.0;   // set when status is infeasible
  int iterations = 0;
};

/// Max of stationarity |Hx + f + A^T l|, primal violation, complementarity
/// |l_i (b_i - A_i x)| and negative multipliers, divided by
/// 1 + max(|H|, |f|, |A|, |b|).
double qp_kkt_residual(const QpProblem& qp, const Vec& x, const Vec& multipliers);

/// Goldfarb-Idnani dual active-set method. A reported infeasibility is always
/// confirmed by the phase-1 LP; if the LP disagrees the result is
/// `iteration_limit`.
QpResult qp_solve(const QpProblem& qp, const QpOptions& opts = {});

}  // namespace ofsmpc
