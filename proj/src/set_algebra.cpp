#include "ofsmpc/set_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

// ---------------------------------------------------------------- Zonotope

Zonotope Zonotope::origin(Eigen::Index dim) {
  return {Vec::Zero(dim), Mat::Zero(dim, 0)};
}

Zonotope Zonotope::from_generators(Mat g) {
  const auto n = g.rows();
  return {Vec::Zero(n), std::move(g)};
}

double Zonotope::support(const Vec& d) const {
  if (d.size() != dim()) throw DimensionError("Zonotope::support: direction size");
  return d.dot(center) + (d.transpose() * generators).cwiseAbs().sum();
}

Vec Zonotope::support_rows(const Mat& directions) const {
  if (directions.cols() != dim()) throw DimensionError("Zonotope::support_rows");
  return directions * center + (directions * generators).cwiseAbs().rowwise().sum();
}

bool Zonotope::contains(const Vec& x, double tol) const {
  if (x.size() != dim()) throw DimensionError("Zonotope::contains");
  const Vec d = x - center;
  const auto m = order();
  if (m == dim() && m > 0) {
    Eigen::FullPivLU<Mat> lu(generators);
    if (lu.isInvertible() && lu.rcond() > 1e-10) {
      return (lu.solve(d).cwiseAbs().array() <= 1.0 + tol).all();
    }
  }
  if (m == 0) return d.cwiseAbs().maxCoeff() <= tol;
  // exists alpha with G alpha = d, |alpha| <= 1
  const auto n = dim();
  Mat a(2 * n + 2 * m, m);
  a << generators, -generators, Mat::Identity(m, m), -Mat::Identity(m, m);
  Vec b(2 * n + 2 * m);
  b << d, -d, Vec::Ones(2 * m);
  return lp_min_violation(a, b).max_violation <= tol;
}

// --------------------------------------------------------------- HPolytope

HPolytope HPolytope::box(const Vec& lower, const Vec& upper) {
  const auto n = lower.size();
  if (upper.size() != n) throw DimensionError("HPolytope::box");
  HPolytope p{Mat(2 * n, n), Vec(2 * n)};
  p.H << Mat::Identity(n, n), -Mat::Identity(n, n);
  p.h << upper, -lower;
  return p;
}

bool HPolytope::contains(const Vec& x, double tol) const {
  return max_violation(x) <= tol;
}

double HPolytope::max_violation(const Vec& x) const {
  if (x.size() != dim()) throw DimensionError("HPolytope::max_violation");
  if (rows() == 0) return -std::numeric_limits<double>::infinity();
  return (H * x - h).maxCoeff();
}

HPolytope HPolytope::intersect(const HPolytope& other) const {
  if (other.dim() != dim()) throw DimensionError("HPolytope::intersect");
  HPolytope p{Mat(rows() + other.rows(), dim()), Vec(rows() + other.rows())};
  p.H << H, other.H;
  p.h << h, other.h;
  return p;
}

HPolytope HPolytope::preimage(const Mat& m) const {
  if (m.rows() != dim()) throw DimensionError("HPolytope::preimage");
  return {H * m, h};
}

void HPolytope::validate() const {
  if (H.rows() != h.size()) throw DimensionError("HPolytope: H and h row counts differ");
  require_finite(H, "HPolytope normals");
  require_finite(h, "HPolytope offsets");
  for (Eigen::Index i = 0; i < rows(); ++i) {
    if (H.row(i).cwiseAbs().maxCoeff() == 0.0) {
      throw PreconditionError("HPolytope: row " + std::to_string(i) + " has a zero normal");
    }
  }
}

namespace {

// Rows with a (numerically) zero normal are either vacuous or make the set
// empty. Vacuous ones are dropped; an infeasible one is kept as 0 x <= h so
// that emptiness stays detectable.
HPolytope drop_trivial_rows(const HPolytope& p) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double scale = p.H.row(i).cwiseAbs().maxCoeff();
    if (scale > 1e-14 * (1.0 + std::abs(p.h(i))) || p.h(i) < 0.0) keep.push_back(i);
  }
  HPolytope out{Mat(static_cast<Eigen::Index>(keep.size()), p.dim()),
                Vec(static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.H.row(static_cast<Eigen::Index>(r)) = p.H.row(keep[r]);
    out.h(static_cast<Eigen::Index>(r)) = p.h(keep[r]);
  }
  return out;
}

HPolytope select_rows(const HPolytope& p, const std::vector<Eigen::Index>& idx) {
  HPolytope out{Mat(static_cast<Eigen::Index>(idx.size()), p.dim()),
                Vec(static_cast<Eigen::Index>(idx.size()))};
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.H.row(static_cast<Eigen::Index>(r)) = p.H.row(idx[r]);
    out.h(static_cast<Eigen::Index>(r)) = p.h(idx[r]);
  }
  return out;
}

}  // namespace

// ----------------------------------------------------- probability budget

ProbabilityBudget ProbabilityBudget::uniform(double p, std::size_t rows) {
  if (rows == 0) throw PreconditionError("ProbabilityBudget: zero rows");
  ProbabilityBudget b{p, std::vector<double>(rows, p / static_cast<double>(rows))};
  b.validate();
  return b;
}

void ProbabilityBudget::validate() const {
  if (!(total > 0.0 && total < 1.0)) throw PreconditionError("probability budget must lie in (0, 1)");
  double sum = 0.0;
  for (double pm : per_row) {
    if (!(pm > 0.0 && pm < 1.0)) throw PreconditionError("per-row probability must lie in (0, 1)");
    sum += pm;
  }
  if (std::abs(sum - total) > 1e-12) throw PreconditionError("per-row probabilities must sum to the total");
}

// ------------------------------------------------------ normal quantiles

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double inv_norm_cdf(double q) {
  if (!(q > 0.0 && q < 1.0)) throw PreconditionError("inv_norm_cdf: q must lie in (0, 1)");

  // Acklam's rational approximation, then Halley refinement on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;

  double x;
  if (q < low) {
    const double t = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  } else if (q <= 1.0 - low) {
    const double s = q - 0.5;
    const double r = s * s;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * s /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double t = std::sqrt(-2.0 * std::log1p(-q));
    x = -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  }

  const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
  for (int i = 0; i < 2; ++i) {
    // Phi(x) - q, evaluated on the smaller tail to avoid cancellation
    const double e = x < 0.0 ? norm_cdf(x) - q : (1.0 - q) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    const double u = e * sqrt_2pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

// ----------------------------------------------------------- confidence sets

ConfidenceSet ubcs(const Mat& sigma_bound, const ProbabilityBudget& budget) {
  const auto n = sigma_bound.rows();
  budget.validate();
  if (budget.per_row.size() != static_cast<std::size_t>(2 * n)) {
    throw PreconditionError("ubcs: budget needs one entry per row of [V, -V]^T");
  }
  const SymEigResult eig = sym_eig(sigma_bound);
  const double scale = std::max(1.0, std::abs(eig.values(0)));
  if (eig.values(n - 1) < -1e-12 * scale) {
    throw PreconditionError("ubcs: covariance bound is not positive semidefinite");
  }

  ConfidenceSet out;
  Mat g(n, n);
  out.hrep.H.resize(2 * n, n);
  out.hrep.h.resize(2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double lambda = eig.values(j);
    if (lambda <= 1e-15 * scale) {
      lambda = std::max(lambda, 0.0);
      out.degenerate = true;
    }
    const double z = std::max(inv_norm_cdf(1.0 - budget.per_row[static_cast<std::size_t>(j)]),
                              inv_norm_cdf(1.0 - budget.per_row[static_cast<std::size_t>(n + j)]));
    const double half_width = z * std::sqrt(lambda);
    const Vec v = eig.vectors.col(j);
    g.col(j) = half_width * v;
    out.hrep.H.row(j) = v.transpose();
    out.hrep.H.row(n + j) = -v.transpose();
    out.hrep.h(j) = half_width;
    out.hrep.h(n + j) = half_width;
  }
  out.zonotope = Zonotope::from_generators(std::move(g));
  return out;
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
  if (a.dim() != b.dim()) throw DimensionError("minkowski_sum: dimension mismatch");
  Mat g(a.dim(), a.order() + b.order());
  g << a.generators, b.generators;
  return {a.center + b.center, std::move(g)};
}

Zonotope linear_map(const Mat& m, const Zonotope& z) {
  if (m.cols() != z.dim()) throw DimensionError("linear_map: dimension mismatch");
  return {m * z.center, m * z.generators};
}

HPolytope pontryagin_diff(const HPolytope& p, const Zonotope& z) {
  if (p.dim() != z.dim()) throw DimensionError("pontryagin_diff: dimension mismatch");
  return {p.H, p.h - z.support_rows(p.H)};
}

// ---------------------------------------------------------------- LP queries

SupportResult lp_support(const HPolytope& p, const Vec& d) {
  if (d.size() != p.dim()) throw DimensionError("lp_support: direction size");
  LpResult r = lp_maximize(d, p.H, p.h);
  return {r.status, r.value, std::move(r.x)};
}

bool is_empty(const HPolytope& p) {
  if (p.rows() == 0) return false;
  const double tol = kLpTol * (1.0 + p.h.cwiseAbs().maxCoeff());
  return lp_min_violation(p.H, p.h).max_violation > tol;
}

Vec feasible_point(const HPolytope& p) {
  if (p.rows() == 0) return Vec::Zero(p.dim());
  const double tol = kLpTol * (1.0 + p.h.cwiseAbs().maxCoeff());
  Phase1Result r = lp_min_violation(p.H, p.h);
  if (r.max_violation > tol) throw EmptySetError("feasible_point", -1, "polytope is empty");
  return r.x;
}

bool poly_includes(const HPolytope& outer, const HPolytope& inner, double tol) {
  if (outer.dim() != inner.dim()) throw DimensionError("poly_includes: dimension mismatch");
  for (Eigen::Index i = 0; i < outer.rows(); ++i) {
    const SupportResult s = lp_support(inner, outer.H.row(i).transpose());
    if (s.status == LpStatus::infeasible) {
      throw PreconditionError("poly_includes: inner polytope is empty");
    }
    if (s.status == LpStatus::unbounded || s.value > outer.h(i) + tol) return false;
  }
  return true;
}

HPolytope remove_redundant(const HPolytope& p, double tol) {
  const HPolytope q = drop_trivial_rows(p);

  // near-duplicate directions: keep the tightest normalized offset
  std::vector<Eigen::Index> unique;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const double ni = q.H.row(i).norm();
    if (ni == 0.0) {
      unique.push_back(i);
      continue;
    }
    bool merged = false;
    for (auto& j : unique) {
      const double nj = q.H.row(j).norm();
      if (nj == 0.0) continue;
      if ((q.H.row(i) / ni - q.H.row(j) / nj).cwiseAbs().maxCoeff() < 1e-12) {
        if (q.h(i) / ni < q.h(j) / nj) j = i;
        merged = true;
        break;
      }
    }
    if (!merged) unique.push_back(i);
  }

  std::vector<Eigen::Index> kept = unique;
  for (std::size_t pos = 0; pos < kept.size();) {
    if (kept.size() == 1) break;
    std::vector<Eigen::Index> others = kept;
    others.erase(others.begin() + static_cast<std::ptrdiff_t>(pos));
    const Eigen::Index row = kept[pos];
    const SupportResult s = lp_support(select_rows(q, others), q.H.row(row).transpose());
    if (s.status == LpStatus::optimal && s.value <= q.h(row) + tol) {
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(pos));
    } else {
      ++pos;
    }
  }
  std::sort(kept.begin(), kept.end());
  return select_rows(q, kept);
}

// -------------------------------------------------------------- invariance

bool is_robust_invariant(const HPolytope& omega, const Mat& a_cl, const Zonotope& w,
                         double tol) {
  const Mat directions = omega.H * a_cl;
  const Vec w_support = w.support_rows(omega.H);
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    const SupportResult s = lp_support(omega, directions.row(i).transpose());
    if (s.status != LpStatus::optimal) return false;
    if (s.value + w_support(i) > omega.h(i) + tol) return false;
  }
  return true;
}

HPolytope max_rpi(const Mat& a_cl, const Zonotope& w, const HPolytope& s, int max_iter) {
  if (a_cl.rows() != s.dim() || a_cl.cols() != s.dim() || w.dim() != s.dim()) {
    throw DimensionError("max_rpi: dimension mismatch");
  }
  if (spectral_radius(a_cl) >= 1.0) throw PreconditionError("max_rpi: closed loop is not Schur");
  if (s.rows() == 0 || (s.h.array() <= 0.0).any()) {
    throw PreconditionError("max_rpi: S must contain the origin in its interior");
  }

  HPolytope omega = s;
  for (int t = 0; t < max_iter; ++t) {
    const HPolytope pre = drop_trivial_rows(pontryagin_diff(omega, w).preimage(a_cl));
    const HPolytope next = s.intersect(pre);
    if (is_empty(next)) {
      throw EmptySetError("rpi", t + 1,
                          "max_rpi: iterate " + std::to_string(t + 1) +
                              " is empty; disturbance too large for the constraint set");
    }
    if (poly_includes(next, omega)) {
      HPolytope result = remove_redundant(omega);
      if (!is_robust_invariant(result, a_cl, w)) {
        throw ConsistencyError("max_rpi: fixed point fails the invariance certificate");
      }
      return result;
    }
    omega = next;
  }
  throw DivergenceError("max_rpi: no fixed point within " + std::to_string(max_iter) +
                            " iterations",
                        static_cast<double>(omega.rows()));
}

// -------------------------------------------------------------- tightening

namespace {

void require_nonempty(const HPolytope& p, const char* stage, int index) {
  if (is_empty(p)) {
    throw EmptySetError(stage, index,
                        std::string(stage) + ": tightened set " + std::to_string(index) +
                            " is empty");
  }
}

}  // namespace

std::vector<HPolytope> tighten_state(const HPolytope& xhat, const Zonotope& e,
                                     const Mat& a_cl, int horizon) {
  if (horizon < 1) throw PreconditionError("tighten_state: horizon must be >= 1");
  std::vector<HPolytope> out{xhat};
  Vec shrink = Vec::Zero(xhat.rows());
  Mat power = Mat::Identity(a_cl.rows(), a_cl.cols());
  for (int i = 1; i < horizon; ++i) {
    shrink += linear_map(power, e).support_rows(xhat.H);
    power = a_cl * power;
    HPolytope next{xhat.H, xhat.h - shrink};
    require_nonempty(next, "state_tightening", i);
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<HPolytope> tighten_input(const HPolytope& u, const Zonotope& e, const Mat& k,
                                     const Mat& a_cl, int horizon) {
  if (horizon < 1) throw PreconditionError("tighten_input: horizon must be >= 1");
  if (k.rows() != u.dim()) throw DimensionError("tighten_input: K rows vs input dimension");
  std::vector<HPolytope> out{u};
  Vec shrink = Vec::Zero(u.rows());
  Mat power = Mat::Identity(a_cl.rows(), a_cl.cols());
  for (int i = 1; i < horizon; ++i) {
    shrink += linear_map(k * power, e).support_rows(u.H);
    power = a_cl * power;
    HPolytope next{u.H, u.h - shrink};
    require_nonempty(next, "input_tightening", i);
    out.push_back(std::move(next));
  }
  return out;
}

HPolytope terminal_set(const HPolytope& xf_hat, const Zonotope& e, const Mat& a_cl,
                       int horizon) {
  if (horizon < 1) throw PreconditionError("terminal_set: horizon must be >= 1");
  Vec shrink = Vec::Zero(xf_hat.rows());
  Mat power = Mat::Identity(a_cl.rows(), a_cl.cols());
  for (int q = 0; q < horizon; ++q) {
    shrink += linear_map(power, e).support_rows(xf_hat.H);
    power = a_cl * power;
  }
  HPolytope out{xf_hat.H, xf_hat.h - shrink};
  require_nonempty(out, "terminal_tightening", horizon);
  return out;
}

}  // namespace ofsmpc
