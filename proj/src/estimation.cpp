#include "ofsmpc/estimation.hpp"

#include <cmath>
#include <string>

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

namespace {

void require_psd(const Mat& m, const char* what) {
  const Mat s = make_symmetric(m, what);
  if (min_eigenvalue(s) < -1e-12 * (1.0 + s.cwiseAbs().maxCoeff())) {
    throw PreconditionError(std::string(what) + " is not positive semidefinite");
  }
}

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void SystemModel::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) throw DimensionError("A must be square and nonempty");
  if (B.rows() != n || B.cols() == 0) throw DimensionError("B must have nx rows");
  if (C.cols() != n || C.rows() == 0) throw DimensionError("C must have nx columns");
  if (Qw.rows() != n || Qw.cols() != n) throw DimensionError("Qw must be nx x nx");
  if (Rv.rows() != C.rows() || Rv.cols() != C.rows()) throw DimensionError("Rv must be ny x ny");
  if (mu0.size() != n) throw DimensionError("mu0 must have nx entries");
  if (Sigma0.rows() != n || Sigma0.cols() != n) throw DimensionError("Sigma0 must be nx x nx");
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(C, "C");
  require_finite(mu0, "mu0");
  require_psd(Qw, "Qw");
  require_psd(Rv, "Rv");
  require_psd(Sigma0, "Sigma0");
  if (T < 2) throw PreconditionError("task horizon T must be at least 2");
  if (!is_controllable(A, B)) throw PreconditionError("(A, B) is not controllable");
  if (!is_observable(A, C)) throw PreconditionError("(A, C) is not observable");
}

KalmanSchedule kalman_schedule(const SystemModel& model) {
  model.validate();
  const auto n = model.nx();
  const Mat eye = Mat::Identity(n, n);
  const Mat& a = model.A;
  const Mat& c = model.C;

  KalmanSchedule s;
  s.gain.reserve(model.T);
  s.prior_cov.reserve(model.T);
  s.post_cov.reserve(model.T);

  Mat prior = symmetrized(model.Sigma0);
  for (int k = 0; k < model.T; ++k) {
    if (k > 0) prior = symmetrized(a * s.post_cov.back() * a.transpose() + model.Qw);
    const Mat innovation = c * prior * c.transpose() + model.Rv;
    const Mat gain = psd_right_divide(prior * c.transpose(), innovation);
    s.prior_cov.push_back(prior);
    s.gain.push_back(gain);
    s.post_cov.push_back(symmetrized((eye - gain * c) * prior));
  }

  s.noise_cov.reserve(model.T - 1);
  for (int k = 0; k + 1 < model.T; ++k) {
    const Mat& next_gain = s.gain[k + 1];
    const Mat inner =
        c * (a * s.post_cov[k] * a.transpose() + model.Qw) * c.transpose() + model.Rv;
    s.noise_cov.push_back(symmetrized(next_gain * inner * next_gain.transpose()));
  }
  return s;
}

FilterState filter_init(const SystemModel& model, const Vec& y0,
                        const KalmanSchedule& schedule) {
  if (y0.size() != model.ny()) throw DimensionError("filter_init: y0 size");
  if (schedule.gain.empty()) throw PreconditionError("filter_init: empty schedule");
  return {model.mu0 + schedule.gain[0] * (y0 - model.C * model.mu0), 0};
}

FilterState filter_step(const FilterState& state, const Vec& u, const Vec& y_next,
                        const SystemModel& model, const KalmanSchedule& schedule) {
  if (state.k < 0 || state.k + 1 >= schedule.horizon()) {
    throw PreconditionError("filter_step: step index outside the schedule");
  }
  if (u.size() != model.nu() || y_next.size() != model.ny()) {
    throw DimensionError("filter_step: input or measurement size");
  }
  const Vec prior = model.A * state.xhat + model.B * u;
  const Mat& gain = schedule.gain[state.k + 1];
  return {prior + gain * (y_next - model.C * prior), state.k + 1};
}

Mat steady_state_prior(const SystemModel& model, const DareOptions& opts) {
  return dare(model.A.transpose(), model.C.transpose(), model.Qw, model.Rv, opts);
}

AssumptionReport check_assumptions(const SystemModel& model, const Mat& p_inf) {
  AssumptionReport r;
  r.initial_cov_below_steady_state = psd_leq(model.Sigma0, p_inf, kBoundCheckTol);
  r.dynamics_invertible = std::abs(Eigen::PartialPivLU<Mat>(model.A).determinant()) > 1e-12;
  return r;
}

std::string to_string(BoundMethod m) {
  return m == BoundMethod::analytic_md ? "analytic_md" : "scaled_reference";
}

BoundMethod bound_method_from_string(const std::string& s) {
  if (s == "analytic_md") return BoundMethod::analytic_md;
  if (s == "scaled_reference") return BoundMethod::scaled_reference;
  throw ConfigError("unknown bound method '" + s + "'");
}

bool bound_holds(const CovarianceBound& bound, const KalmanSchedule& schedule,
                 double tol) {
  for (const Mat& p : schedule.post_cov)
    if (!psd_leq(p, bound.P_bar, tol)) return false;
  for (const Mat& phi : schedule.noise_cov)
    if (!psd_leq(phi, bound.Phi_bar, tol)) return false;
  return true;
}

CovarianceBound bound_analytic_md(const SystemModel& model, const Mat& p_inf,
                                  const KalmanSchedule& schedule) {
  const auto assumptions = check_assumptions(model, p_inf);
  if (!assumptions.initial_cov_below_steady_state) {
    throw PreconditionError("analytic bound requires Sigma0 <= P_inf");
  }
  if (!assumptions.dynamics_invertible) {
    throw PreconditionError("analytic bound requires a nonsingular A");
  }
  const Eigen::PartialPivLU<Mat> lu(model.A);
  const Mat a_inv = lu.inverse();
  CovarianceBound b;
  b.P_bar = symmetrized(a_inv * (p_inf - model.Qw) * a_inv.transpose());
  b.Phi_bar = symmetrized(p_inf);
  b.method = BoundMethod::analytic_md;
  b.P_inf = p_inf;
  if (!bound_holds(b, schedule)) {
    throw ConsistencyError("analytic covariance bound does not bound the schedule");
  }
  return b;
}

namespace {

// max_k lambda_max(ref^{-1/2} M_k ref^{-1/2})
double max_generalized_eigenvalue(const std::vector<Mat>& mats, const Mat& ref) {
  const SymEigResult eig = sym_eig(ref);
  const Vec inv_sqrt = eig.values.cwiseSqrt().cwiseInverse();
  const Mat w = eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.transpose();
  double alpha = 0.0;
  for (const Mat& m : mats) alpha = std::max(alpha, max_eigenvalue(symmetrized(w * m * w)));
  return alpha;
}

}  // namespace

CovarianceBound bound_scaled_reference(const KalmanSchedule& schedule,
                                       const Mat& p_inf, double eps) {
  const auto n = p_inf.rows();
  const Mat ref = symmetrized(p_inf) + eps * Mat::Identity(n, n);
  if (min_eigenvalue(ref) <= 0.0) {
    throw PreconditionError("scaled bound: reference P_inf + eps I is not positive definite");
  }
  CovarianceBound b;
  b.P_bar = max_generalized_eigenvalue(schedule.post_cov, ref) * ref;
  b.Phi_bar = max_generalized_eigenvalue(schedule.noise_cov, ref) * ref;
  b.method = BoundMethod::scaled_reference;
  b.P_inf = p_inf;
  return b;
}

}  // namespace ofsmpc
