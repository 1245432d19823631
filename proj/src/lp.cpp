#include "ofsmpc/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr int kMaxPivots = 100000;

// Tableau for  max c^T z,  T z = rhs,  z >= 0. Row 0 holds the objective in
// the form z0 - c^T z = 0; the last column is the right-hand side.
class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(RowMat::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  double& at(Eigen::Index r, Eigen::Index c) { return t_(r + 1, c); }
  double& rhs(Eigen::Index r) { return t_(r + 1, cols()); }
  double& cost(Eigen::Index c) { return t_(0, c); }
  double objective() const { return t_(0, t_.cols() - 1); }
  std::vector<Eigen::Index>& basis() { return basis_; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r + 1) /= t_(r + 1, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r + 1) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r + 1);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Bring the objective row into canonical form for the current basis.
  void price_out() {
    for (Eigen::Index r = 0; r < rows(); ++r) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(r)];
      const double f = t_(0, b);
      if (f != 0.0) t_.row(0) -= f * t_.row(r + 1);
    }
  }

  void drop_row(Eigen::Index r) {
    RowMat next(t_.rows() - 1, t_.cols());
    next.topRows(r + 1) = t_.topRows(r + 1);
    next.bottomRows(t_.rows() - r - 2) = t_.bottomRows(t_.rows() - r - 2);
    t_ = std::move(next);
    basis_.erase(basis_.begin() + r);
  }

  // Runs primal simplex with Bland's rule over the columns in [0, usable).
  // Returns false when the objective is unbounded.
  bool optimize(Eigen::Index usable, double tol) {
    for (int it = 0; it < kMaxPivots; ++it) {
      Eigen::Index enter = -1;
      for (Eigen::Index c = 0; c < usable; ++c) {
        if (t_(0, c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows(); ++r) {
        const double a = at(r, enter);
        if (a <= tol) continue;
        const double ratio = rhs(r) / a;
        const bool better = ratio < best - tol;
        const bool tie = !better && ratio <= best + tol && leave >= 0 &&
                         basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)];
        if (better || tie) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw DivergenceError("lp: pivot limit reached", 0.0);
  }

 private:
  RowMat t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

LpResult lp_maximize(const Vec& c, const Mat& a, const Vec& b) {
  const Eigen::Index n = a.cols();
  const Eigen::Index m = a.rows();
  if (c.size() != n || b.size() != m) throw DimensionError("lp_maximize: dimensions");
  if (!a.allFinite() || !b.allFinite() || !c.allFinite()) {
    throw PreconditionError("lp_maximize: non-finite data");
  }

  const double tol = kLpTol * (1.0 + (m ? b.cwiseAbs().maxCoeff() : 0.0));

  std::vector<Eigen::Index> negative_rows;
  for (Eigen::Index i = 0; i < m; ++i)
    if (b(i) < 0.0) negative_rows.push_back(i);
  const auto n_art = static_cast<Eigen::Index>(negative_rows.size());

  // columns: x+ [0, n), x- [n, 2n), slack [2n, 2n+m), artificial [2n+m, ...)
  const Eigen::Index slack0 = 2 * n;
  const Eigen::Index art0 = 2 * n + m;
  Tableau tab(m, art0 + n_art);
  Eigen::Index next_art = art0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      tab.at(i, j) = sign * a(i, j);
      tab.at(i, n + j) = -sign * a(i, j);
    }
    tab.at(i, slack0 + i) = sign;
    tab.rhs(i) = sign * b(i);
    if (sign < 0.0) {
      tab.at(i, next_art) = 1.0;
      tab.basis()[static_cast<std::size_t>(i)] = next_art++;
    } else {
      tab.basis()[static_cast<std::size_t>(i)] = slack0 + i;
    }
  }

  if (n_art > 0) {
    // phase 1: maximize -sum(artificials)
    for (Eigen::Index j = art0; j < art0 + n_art; ++j) tab.cost(j) = 1.0;
    tab.price_out();
    tab.optimize(art0 + n_art, kLpTol);
    if (tab.objective() < -tol) return {LpStatus::infeasible, 0.0, Vec()};

    // drive artificial variables out of the basis
    for (Eigen::Index r = tab.rows() - 1; r >= 0; --r) {
      if (tab.basis()[static_cast<std::size_t>(r)] < art0) continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < art0; ++j) {
        if (std::abs(tab.at(r, j)) > kLpTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(r, col);
      } else {
        tab.drop_row(r);  // redundant equality
      }
    }
  }

  for (Eigen::Index j = 0; j < tab.cols() + 1; ++j) tab.cost(j) = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    tab.cost(j) = -c(j);
    tab.cost(n + j) = c(j);
  }
  tab.price_out();
  if (!tab.optimize(art0, kLpTol)) return {LpStatus::unbounded, 0.0, Vec()};

  Vec z = Vec::Zero(art0);
  for (Eigen::Index r = 0; r < tab.rows(); ++r) {
    const Eigen::Index bcol = tab.basis()[static_cast<std::size_t>(r)];
    if (bcol < art0) z(bcol) = tab.rhs(r);
  }
  Vec x = z.head(n) - z.segment(n, n);
  return {LpStatus::optimal, c.dot(x), std::move(x)};
}

Phase1Result lp_min_violation(const Mat& a, const Vec& b) {
  const Eigen::Index n = a.cols();
  const Eigen::Index m = a.rows();
  if (b.size() != m) throw DimensionError("lp_min_violation: dimensions");
  if (m == 0) return {0.0, Vec::Zero(n)};
  Mat aug = Mat::Zero(m + 1, n + 1);
  aug.topLeftCorner(m, n) = a;
  aug.col(n).head(m).setConstant(-1.0);
  aug(m, n) = -1.0;  // t >= 0
  Vec rhs(m + 1);
  rhs << b, 0.0;
  Vec cost = Vec::Zero(n + 1);
  cost(n) = -1.0;
  const LpResult r = lp_maximize(cost, aug, rhs);
  if (r.status != LpStatus::optimal) {
    throw ConsistencyError("lp_min_violation: phase-1 problem must be solvable");
  }
  return {r.x(n), r.x.head(n)};
}

}  // namespace ofsmpc
