#include "ofsmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ofsmpc/errors.hpp"
#include "ofsmpc/lp.hpp"

namespace ofsmpc {

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

double data_scale(const QpProblem& qp) {
  double s = 0.0;
  if (qp.H.size()) s = std::max(s, qp.H.cwiseAbs().maxCoeff());
  if (qp.f.size()) s = std::max(s, qp.f.cwiseAbs().maxCoeff());
  if (qp.A.size()) s = std::max(s, qp.A.cwiseAbs().maxCoeff());
  if (qp.b.size()) s = std::max(s, qp.b.cwiseAbs().maxCoeff());
  return 1.0 + s;
}

double objective_at(const QpProblem& qp, const Vec& x) {
  return 0.5 * x.dot(qp.H * x) + qp.f.dot(x) + qp.constant;
}

// Newton polish on a fixed active set: solves the equality-constrained KKT
// system and keeps the result only if it is at least as accurate.
void polish(const QpProblem& qp, const std::vector<Eigen::Index>& active, Vec& x, Vec& lambda) {
  const auto n = qp.H.rows();
  const auto q = static_cast<Eigen::Index>(active.size());
  Mat kkt = Mat::Zero(n + q, n + q);
  Vec rhs(n + q);
  kkt.topLeftCorner(n, n) = qp.H;
  rhs.head(n) = -qp.f;
  for (Eigen::Index j = 0; j < q; ++j) {
    kkt.block(0, n + j, n, 1) = qp.A.row(active[j]).transpose();
    kkt.block(n + j, 0, 1, n) = qp.A.row(active[j]);
    rhs(n + j) = qp.b(active[j]);
  }
  Eigen::FullPivLU<Mat> lu(kkt);
  if (!lu.isInvertible()) return;
  const Vec sol = lu.solve(rhs);
  if (!sol.allFinite()) return;
  Vec cand_lambda = Vec::Zero(qp.A.rows());
  for (Eigen::Index j = 0; j < q; ++j) cand_lambda(active[j]) = sol(n + j);
  const Vec cand_x = sol.head(n);
  if (qp_kkt_residual(qp, cand_x, cand_lambda) <= qp_kkt_residual(qp, x, lambda)) {
    x = cand_x;
    lambda = cand_lambda;
  }
}

}  // namespace

double qp_kkt_residual(const QpProblem& qp, const Vec& x, const Vec& multipliers) {
  double r = (qp.H * x + qp.f + qp.A.transpose() * multipliers).cwiseAbs().maxCoeff();
  if (qp.A.rows() > 0) {
    const Vec slack = qp.b - qp.A * x;
    r = std::max(r, std::max(0.0, -slack.minCoeff()));
    r = std::max(r, multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff());
    r = std::max(r, std::max(0.0, -multipliers.minCoeff()));
  }
  return r / data_scale(qp);
}

QpResult qp_solve(const QpProblem& qp, const QpOptions& opts) {
  const auto n = qp.H.rows();
  const auto m = qp.A.rows();
  if (qp.H.cols() != n || qp.f.size() != n || qp.A.cols() != n || qp.b.size() != m) {
    throw DimensionError("qp_solve: inconsistent dimensions");
  }
  Eigen::LLT<Mat> llt(qp.H);
  if (llt.info() != Eigen::Success) throw PreconditionError("qp_solve: Hessian is not positive definite");
  const Mat h_inv = llt.solve(Mat::Identity(n, n));

  Vec row_norm(m);
  for (Eigen::Index i = 0; i < m; ++i) row_norm(i) = std::max(qp.A.row(i).norm(), 1e-300);

  QpResult res;
  Vec x = -(h_inv * qp.f);
  std::vector<Eigen::Index> active;
  std::vector<double> u;  // multipliers of `active`
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);
  const double feas_tol = opts.feas_tol * data_scale(qp);

  auto finish_infeasible = [&]() {
    const Phase1Result cert = lp_min_violation(qp.A, qp.b);
    res.phase1_violation = cert.max_violation;
    res.status = cert.max_violation > opts.infeasibility_tol ? QpStatus::infeasible
                                                             : QpStatus::iteration_limit;
    return res;
  };

  int iter = 0;
  while (true) {
    // most violated constraint, normalized by the row norm
    Eigen::Index p = -1;
    double worst = -feas_tol;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      const double s = (qp.b(i) - qp.A.row(i).dot(x)) / row_norm(i);
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) break;

    double u_plus = 0.0;
    while (true) {
      if (++iter > opts.max_iter) {
        res.iterations = iter;
        res.status = QpStatus::iteration_limit;
        return res;
      }
      // constraints in >= form: n_j = -A_j
      const Vec np = -qp.A.row(p).transpose();
      const auto q = static_cast<Eigen::Index>(active.size());
      Vec z;
      Vec r(q);
      if (q == 0) {
        z = h_inv * np;
      } else {
        Mat nmat(n, q);
        for (Eigen::Index j = 0; j < q; ++j) nmat.col(j) = -qp.A.row(active[j]).transpose();
        const Mat hn = h_inv * nmat;
        const Mat gram = nmat.transpose() * hn;
        Eigen::LDLT<Mat> ldlt(gram);
        r = ldlt.solve(hn.transpose() * np);
        z = h_inv * np - hn * r;
      }

      // partial (dual) step length
      double t1 = std::numeric_limits<double>::infinity();
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (r(j) > 0.0) {
          const double ratio = u[static_cast<std::size_t>(j)] / r(j);
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }
      // full (primal) step length
      const double curvature = z.dot(np);
      const double ref = np.dot(h_inv * np);
      const bool zero_step = !(curvature > 1e-14 * ref);
      const double slack_p = qp.b(p) - qp.A.row(p).dot(x);
      const double t2 = zero_step ? std::numeric_limits<double>::infinity() : -slack_p / curvature;

      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        res.iterations = iter;
        return finish_infeasible();
      }

      if (!zero_step) x += t * z;
      for (Eigen::Index j = 0; j < q; ++j) u[static_cast<std::size_t>(j)] -= t * r(j);
      u_plus += t;

      if (!zero_step && t2 <= t1) {
        active.push_back(p);
        u.push_back(u_plus);
        is_active[static_cast<std::size_t>(p)] = 1;
        break;
      }
      is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }

  Vec lambda = Vec::Zero(m);
  for (std::size_t j = 0; j < active.size(); ++j) lambda(active[j]) = std::max(0.0, u[j]);
  if (qp_kkt_residual(qp, x, lambda) > 1e-3 * opts.kkt_tol) polish(qp, active, x, lambda);

  res.x = x;
  res.multipliers = lambda;
  res.iterations = iter;
  res.kkt_residual = qp_kkt_residual(qp, x, lambda);
  res.objective = objective_at(qp, x);
  if (res.kkt_residual <= opts.kkt_tol) {
    res.status = QpStatus::optimal;
    return res;
  }
  // Nearly dependent rows of an infeasible problem can make the dual steps
  // blow up instead of stopping; the phase-1 LP decides.
  return finish_infeasible();
}

}  // namespace ofsmpc
