#pragma once

// Kalman filter scheduling and uniform covariance bounds.

#include <string>
#include <vector>

#include "ofsmpc/mat_core.hpp"

namespace ofsmpc {

/// x_{k+1} = A x_k + B u_k + w_k,  y_k = C x_k + v_k,
/// w ~ N(0, Qw), v ~ N(0, Rv), x_0 ~ N(mu0, Sigma0), task of T steps.
struct SystemModel {
  Mat A, B, C;
  Mat Qw, Rv;
  Vec mu0;
  Mat Sigma0;
  int T = 0;

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index nu() const { return B.cols(); }
  Eigen::Index ny() const { return C.rows(); }

  /// Dimensions, symmetry, PSD-ness of the covariances, T >= 2,
  /// controllability and observability. Throws on the first failure.
  void validate() const;
};

/// Precomputed filter quantities for k = 0..T-1. noise_cov (Phi_k) needs
/// L_{k+1}, so it only has T-1 entries.
struct KalmanSchedule {
  std::vector<Mat> gain;       // L_k
  std::vector<Mat> prior_cov;  // P_k^-
  std::vector<Mat> post_cov;   // P_k
  std::vector<Mat> noise_cov;  // Phi_k, k = 0..T-2

  int horizon() const { return static_cast<int>(gain.size()); }
};

KalmanSchedule kalman_schedule(const SystemModel& model);

struct FilterState {
  Vec xhat;
  int k = 0;
};

/// xhat_0 = mu0 + L_0 (y0 - C mu0)
FilterState filter_init(const SystemModel& model, const Vec& y0,
                        const KalmanSchedule& schedule);

/// One predict/correct step using the scheduled gain L_{k+1}.
FilterState filter_step(const FilterState& state, const Vec& u,
                        const Vec& y_next, const SystemModel& model,
                        const KalmanSchedule& schedule);

/// Steady-state prior covariance P_inf (filter-form Riccati equation).
Mat steady_state_prior(const SystemModel& model, const DareOptions& opts = {});

struct AssumptionReport {
  bool initial_cov_below_steady_state = false;  // Sigma0 <= P_inf
  bool dynamics_invertible = false;             // |det A| > 1e-12
};

AssumptionReport check_assumptions(const SystemModel& model, const Mat& p_inf);

enum class BoundMethod { analytic_md, scaled_reference };

std::string to_string(BoundMethod m);
BoundMethod bound_method_from_string(const std::string& s);

struct CovarianceBound {
  Mat P_bar;    // bounds every P_k
  Mat Phi_bar;  // bounds every Phi_k
  BoundMethod method = BoundMethod::analytic_md;
  Mat P_inf;
};

constexpr double kBoundCheckTol = 1e-9;

/// True iff P_k <= P_bar and Phi_k <= Phi_bar for every scheduled k.
bool bound_holds(const CovarianceBound& bound, const KalmanSchedule& schedule,
                 double tol = kBoundCheckTol);

/// P_bar = A^{-1} (P_inf - Qw) A^{-T}, Phi_bar = P_inf. Requires both
/// modelling assumptions and verifies the result against the schedule.
CovarianceBound bound_analytic_md(const SystemModel& model, const Mat& p_inf,
                                  const KalmanSchedule& schedule);

/// Fixes the shape of the bound to P_ref = P_inf + eps I and scales it by the
/// largest generalized eigenvalue of (P_k, P_ref) over the schedule; same for
/// Phi_k.
CovarianceBound bound_scaled_reference(const KalmanSchedule& schedule,
                                       const Mat& p_inf, double eps = 1e-10);

}  // namespace ofsmpc
