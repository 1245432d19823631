#pragma once

// Independent reference computations used to check the library. None of
// these call into ofsmpc except for the Mat/Vec aliases.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using P2 = Eigen::Vector2d;

/// Standard normal CDF by composite Simpson integration of the density from 0.
inline double normal_cdf_simpson(double x, int panels = 20000) {
  const double a = 0.0;
  const double b = std::abs(x);
  const double h = (b - a) / panels;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(a + i * h);
  const double half = s * h / 3.0;
  return x >= 0 ? 0.5 + half : 0.5 - half;
}

/// Quantile by bisection on normal_cdf_simpson.
inline double normal_quantile_bisect(double q) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf_simpson(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Vertices of the bounded 2-D polytope {x : H x <= h}: every pairwise line
/// intersection that satisfies all rows.
inline std::vector<P2> vertices_2d(const Mat& H, const Vec& h, double tol = 1e-9) {
  std::vector<P2> out;
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < H.rows(); ++j) {
      Eigen::Matrix2d m;
      m << H(i, 0), H(i, 1), H(j, 0), H(j, 1);
      if (std::abs(m.determinant()) < 1e-12) continue;
      const P2 p = m.inverse() * Eigen::Vector2d(h(i), h(j));
      if (((H * p - h).array() <= tol * (1.0 + h.cwiseAbs().maxCoeff())).all()) out.push_back(p);
    }
  }
  return out;
}

/// Vertices of the 2-D zonotope c + G alpha by enumerating all sign patterns.
inline std::vector<P2> zonotope_vertices_2d(const P2& c, const Mat& G) {
  std::vector<P2> out;
  const auto m = G.cols();
  for (long mask = 0; mask < (1L << m); ++mask) {
    P2 p = c;
    for (Eigen::Index j = 0; j < m; ++j) p += ((mask >> j) & 1 ? 1.0 : -1.0) * G.col(j);
    out.push_back(p);
  }
  return out;
}

inline double support_of_points(const std::vector<P2>& pts, const P2& d) {
  double best = -INFINITY;
  for (const P2& p : pts) best = std::max(best, d.dot(p));
  return best;
}

/// Minkowski sum of two point clouds (all pairwise sums); its support equals
/// the sum of the supports.
inline std::vector<P2> minkowski_points(const std::vector<P2>& a, const std::vector<P2>& b) {
  std::vector<P2> out;
  for (const P2& p : a) {
    for (const P2& q : b) out.push_back(p + q);
  }
  return out;
}

/// min 0.5 x^T H x + f^T x s.t. A x <= b by accelerated projected gradient on
/// the dual (projection onto lambda >= 0), x = -H^{-1}(f + A^T lambda).
inline Vec qp_dual_projected_gradient(const Mat& H, const Vec& f, const Mat& A, const Vec& b,
                                      int iters = 200000) {
  const Mat hinv = H.inverse();
  const Mat M = A * hinv * A.transpose();
  const double L = std::max(1e-12, Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().maxCoeff());
  Vec lam = Vec::Zero(A.rows());
  Vec y = lam;
  double t = 1.0;
  for (int k = 0; k < iters; ++k) {
    const Vec x = -hinv * (f + A.transpose() * y);
    const Vec grad = A * x - b;  // gradient of the dual objective (to ascend)
    Vec next = (y + grad / L).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - lam);
    if ((next - lam).norm() < 1e-15 * (1.0 + next.norm()) && k > 100) {
      lam = next;
      break;
    }
    lam = next;
    t = t_next;
  }
  return -hinv * (f + A.transpose() * lam);
}

/// Scalar DARE p = a^2 p - a^2 g^2 p^2 / (g^2 p + r) + q, positive root.
inline double scalar_dare(double a, double g, double q, double r) {
  // g^2 p^2 + (r (1 - a^2) - q g^2) p - q r = 0
  const double A = g * g;
  const double B = r * (1.0 - a * a) - q * g * g;
  const double C = -q * r;
  return (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
}

}  // namespace oracle
