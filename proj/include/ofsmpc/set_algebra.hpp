#pragma once

// Polytopic set calculus: zonotopes for the confidence sets and their linear
// images, H-polytopes for constraint sets. Minkowski sums of zonotopes and
// Pontryagin differences "H-polytope minus zonotope" are exact and LP-free;
// the LP is only needed for emptiness, support and inclusion queries.

#include <string>
#include <vector>

#include "ofsmpc/lp.hpp"
#include "ofsmpc/mat_core.hpp"

namespace ofsmpc {

/// {center + G alpha : |alpha|_inf <= 1}; generators are the columns of G.
struct Zonotope {
  Vec center;
  Mat generators;

  static Zonotope origin(Eigen::Index dim);
  static Zonotope from_generators(Mat g);

  Eigen::Index dim() const { return center.size(); }
  Eigen::Index order() const { return generators.cols(); }

  /// max_{z in Z} d^T z = d^T c + sum_j |d^T g_j|
  double support(const Vec& d) const;
  /// Row-wise support for every row of `directions`.
  Vec support_rows(const Mat& directions) const;

  bool contains(const Vec& x, double tol = 1e-9) const;
};

/// {x : H x <= h}
struct HPolytope {
  Mat H;
  Vec h;

  static HPolytope box(const Vec& lower, const Vec& upper);

  Eigen::Index dim() const { return H.cols(); }
  Eigen::Index rows() const { return H.rows(); }

  bool contains(const Vec& x, double tol = 1e-9) const;
  /// max_i (H_i x - h_i); <= 0 iff x is inside.
  double max_violation(const Vec& x) const;

  /// Stacks the rows of both polytopes.
  HPolytope intersect(const HPolytope& other) const;
  /// {x : M x in P}
  HPolytope preimage(const Mat& m) const;

  void validate() const;
};

struct ProbabilityBudget {
  double total = 0.0;
  std::vector<double> per_row;

  /// p split evenly over `rows` rows.
  static ProbabilityBudget uniform(double p, std::size_t rows);
  void validate() const;
};

/// Standard normal quantile, |Phi(result) - q| <= 1e-9.
double inv_norm_cdf(double q);
/// Standard normal CDF.
double norm_cdf(double x);

/// A uniformly bounded confidence set in both representations: the
/// eigenvector-aligned zonotope and its H-form H_r = [V, -V]^T.
struct ConfidenceSet {
  Zonotope zonotope;
  HPolytope hrep;
  bool degenerate = false;  // some direction has zero variance
};

/// Confidence set of level 1 - budget.total for every zero-mean Gaussian whose
/// covariance is below `sigma_bound`.
ConfidenceSet ubcs(const Mat& sigma_bound, const ProbabilityBudget& budget);

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);
Zonotope linear_map(const Mat& m, const Zonotope& z);

/// P minus Z in the Pontryagin sense: {x : x + z in P for all z in Z}.
HPolytope pontryagin_diff(const HPolytope& p, const Zonotope& z);

struct SupportResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Vec maximizer;
};

SupportResult lp_support(const HPolytope& p, const Vec& d);

bool is_empty(const HPolytope& p);
/// A point of P (Chebyshev-free phase-1 witness); throws EmptySetError when P
/// is empty.
Vec feasible_point(const HPolytope& p);

constexpr double kInclusionTol = 1e-8;

/// inner is a subset of outer (both nonempty).
bool poly_includes(const HPolytope& outer, const HPolytope& inner,
                   double tol = kInclusionTol);

/// Drops rows implied by the remaining ones and near-duplicate rows.
HPolytope remove_redundant(const HPolytope& p, double tol = kInclusionTol);

/// Maximal robust positive invariant subset of S for x+ = Acl x + w, w in W.
HPolytope max_rpi(const Mat& a_cl, const Zonotope& w, const HPolytope& s,
                  int max_iter = 500);

/// Certificate check for robust invariance: for every row i,
/// sup_{x in O} H_i Acl x + h_W(H_i) <= h_i + tol.
bool is_robust_invariant(const HPolytope& omega, const Mat& a_cl,
                         const Zonotope& w, double tol = kInclusionTol);

/// Element i is Xhat minus (E + Acl E + ... + Acl^{i-1} E), i = 0..N-1.
std::vector<HPolytope> tighten_state(const HPolytope& xhat, const Zonotope& e,
                                     const Mat& a_cl, int horizon);

/// Element i is U minus (K E + K Acl E + ... + K Acl^{i-1} E), i = 0..N-1.
std::vector<HPolytope> tighten_input(const HPolytope& u, const Zonotope& e,
                                     const Mat& k, const Mat& a_cl, int horizon);

/// Xf_hat minus (E + Acl E + ... + Acl^{N-1} E).
HPolytope terminal_set(const HPolytope& xf_hat, const Zonotope& e,
                       const Mat& a_cl, int horizon);

}  // namespace ofsmpc
