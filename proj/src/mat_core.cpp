#include "ofsmpc/mat_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numeric>
#include <vector>

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

namespace {

double max_abs(const Mat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + " must be square");
  }
}

}  // namespace

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) {
    throw PreconditionError(std::string(what) + " has non-finite entries");
  }
}

bool is_symmetric(const Mat& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.transpose()) <= rel_tol * (1.0 + max_abs(m));
}

Mat make_symmetric(const Mat& m, const char* what) {
  require_finite(m, what);
  require_square(m, what);
  if (!is_symmetric(m)) {
    throw PreconditionError(std::string(what) + " is not symmetric");
  }
  return 0.5 * (m + m.transpose());
}

SymEigResult sym_eig(const Mat& m, double rel_tol) {
  Mat a = make_symmetric(m, "sym_eig input");
  const Eigen::Index n = a.rows();
  Mat v = Mat::Identity(n, n);

  const double threshold = rel_tol * a.norm();
  auto off_norm = [&a, n] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_norm() > threshold; ++sweep) {
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (p, q) plane rotation
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymEigResult out{Vec(n), Mat(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values(j) = a(order[j], order[j]);
    out.vectors.col(j) = v.col(order[j]);
  }
  return out;
}

double min_eigenvalue(const Mat& sym) {
  const auto eig = sym_eig(sym);
  return eig.values.size() ? eig.values(eig.values.size() - 1) : 0.0;
}

double max_eigenvalue(const Mat& sym) {
  const auto eig = sym_eig(sym);
  return eig.values.size() ? eig.values(0) : 0.0;
}

bool psd_leq(const Mat& lhs, const Mat& rhs, double tol) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
    throw DimensionError("psd_leq: dimension mismatch");
  }
  const Mat diff = rhs - lhs;
  return min_eigenvalue(0.5 * (diff + diff.transpose())) >= -tol;
}

Mat riccati_map(const Mat& p, const Mat& a, const Mat& g, const Mat& qc,
                const Mat& rc) {
  const Mat pa = p * a;
  const Mat gtpa = g.transpose() * pa;
  const Mat s = g.transpose() * p * g + rc;
  // A^T P G (G^T P G + R)^{-1} G^T P A, written as X^T S^{-1} X with X = G^T P A
  const Mat correction = psd_right_divide(gtpa.transpose(), s) * gtpa;
  Mat next = a.transpose() * pa - correction + qc;
  return 0.5 * (next + next.transpose());
}

Mat dare(const Mat& a, const Mat& g, const Mat& qc, const Mat& rc,
         const DareOptions& opts) {
  require_square(a, "dare: A");
  if (g.rows() != a.rows() || qc.rows() != a.rows() || qc.cols() != a.cols() ||
      rc.rows() != g.cols() || rc.cols() != g.cols()) {
    throw DimensionError("dare: inconsistent dimensions");
  }
  if (!(opts.tol > 0.0)) throw PreconditionError("dare: tol must be positive");
  const Mat q = make_symmetric(qc, "dare: Qc");
  const Mat r = make_symmetric(rc, "dare: Rc");

  Mat p = q;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iter; ++it) {
    Mat next = riccati_map(p, a, g, q, r);
    residual = max_abs(next - p);
    p = std::move(next);
    if (!p.allFinite()) break;
    if (residual <= opts.tol) {
      // report the fixed-point residual of the returned matrix itself
      const double final_res = max_abs(riccati_map(p, a, g, q, r) - p);
      if (final_res <= opts.tol) return p;
      residual = final_res;
    }
  }
  throw DivergenceError("dare: no convergence, last residual " +
                            std::to_string(residual),
                        residual);
}

Mat chol_solve(const Mat& m, const Mat& rhs) {
  require_square(m, "chol_solve: M");
  if (rhs.rows() != m.rows()) throw DimensionError("chol_solve: rhs rows");
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("chol_solve: matrix is not positive definite");
  }
  return llt.solve(rhs);
}

Mat psd_right_divide(const Mat& num, const Mat& s) {
  if (num.cols() != s.rows()) throw DimensionError("psd_right_divide");
  Eigen::LLT<Mat> llt(s);
  if (llt.info() == Eigen::Success) {
    return llt.solve(num.transpose()).transpose();
  }
  if (max_abs(num) == 0.0) return Mat::Zero(num.rows(), num.cols());
  throw FactorizationError("psd_right_divide: singular divisor with nonzero numerator");
}

Mat psd_factor(const Mat& m, double zero_tol) {
  const Mat a = make_symmetric(m, "psd_factor input");
  const Eigen::Index n = a.rows();
  const double scale_tol = zero_tol * (1.0 + max_abs(a));
  Mat f = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - f.row(j).head(j).squaredNorm();
    if (d < -scale_tol) {
      throw FactorizationError("psd_factor: matrix is indefinite");
    }
    if (d <= scale_tol) continue;  // zero pivot, column stays zero
    const double ljj = std::sqrt(d);
    f(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      f(i, j) = (a(i, j) - f.row(i).head(j).dot(f.row(j).head(j))) / ljj;
    }
  }
  return f;
}

double spectral_radius(const Mat& m) {
  require_square(m, "spectral_radius");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

Eigen::Index numeric_rank(const Mat& m) {
  Eigen::FullPivLU<Mat> lu(m);
  lu.setThreshold(1e-10);
  return lu.rank();
}

}  // namespace

bool is_controllable(const Mat& a, const Mat& b) {
  const Eigen::Index n = a.rows();
  Mat ctrb(n, n * b.cols());
  Mat block = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * b.cols(), b.cols()) = block;
    block = a * block;
  }
  return numeric_rank(ctrb) == n;
}

bool is_observable(const Mat& a, const Mat& c) {
  return is_controllable(a.transpose(), c.transpose());
}

}  // namespace ofsmpc
