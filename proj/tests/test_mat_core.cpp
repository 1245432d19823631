#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ofsmpc/errors.hpp"
#include "ofsmpc/mat_core.hpp"
#include "oracles.hpp"

using namespace ofsmpc;

namespace {

Mat random_symmetric(int n, unsigned seed) {
  std::srand(seed);
  Mat m = Mat::Random(n, n);
  return 0.5 * (m + m.transpose());
}

// Plain Riccati value iteration written without the library, used as the
// fixed-point oracle for the example system.
Mat riccati_oracle(const Mat& a, const Mat& g, const Mat& q, const Mat& r) {
  Mat p = q;
  for (int i = 0; i < 200000; ++i) {
    const Mat s = g.transpose() * p * g + r;
    const Mat next = a.transpose() * p * a -
                     a.transpose() * p * g * s.inverse() * g.transpose() * p * a + q;
    if ((next - p).cwiseAbs().maxCoeff() < 1e-14) return next;
    p = next;
  }
  return p;
}

}  // namespace

TEST(Symmetry, RejectsAsymmetricAndNonFinite) {
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_FALSE(is_symmetric(m));
  EXPECT_THROW(make_symmetric(m), PreconditionError);
  m << 1, std::numeric_limits<double>::quiet_NaN(), 0, 1;
  EXPECT_THROW(require_finite(m, "m"), PreconditionError);
  m << 1, 2 + 1e-14, 2, 1;
  EXPECT_TRUE(is_symmetric(m));
  const Mat s = make_symmetric(m);
  EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(SymEig, Identity) {
  const SymEigResult r = sym_eig(Mat::Identity(2, 2));
  EXPECT_NEAR(r.values(0), 1.0, 1e-15);
  EXPECT_NEAR(r.values(1), 1.0, 1e-15);
  EXPECT_NEAR((r.vectors.transpose() * r.vectors - Mat::Identity(2, 2)).norm(), 0.0, 1e-12);
}

TEST(SymEig, DiagonalDescendingAxisAligned) {
  Mat m = Mat::Zero(2, 2);
  m.diagonal() << 1, 4;
  const SymEigResult r = sym_eig(m);
  EXPECT_DOUBLE_EQ(r.values(0), 4.0);
  EXPECT_DOUBLE_EQ(r.values(1), 1.0);
  EXPECT_NEAR(std::abs(r.vectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(r.vectors(0, 1)), 1.0, 1e-15);
}

TEST(SymEig, TwoByTwoHandSolved) {
  Mat m(2, 2);
  m << 2, 1, 1, 2;
  const SymEigResult r = sym_eig(m);
  EXPECT_NEAR(r.values(0), 3.0, 1e-14);
  EXPECT_NEAR(r.values(1), 1.0, 1e-14);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(r.vectors(0, 0)), s, 1e-14);
  EXPECT_NEAR(r.vectors(0, 0) * r.vectors(1, 0), 0.5, 1e-14);
  EXPECT_NEAR(r.vectors(0, 1) * r.vectors(1, 1), -0.5, 1e-14);
}

TEST(SymEig, RandomMatchesEigenAndReconstructs) {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 9);
    const Mat m = random_symmetric(n, seed);
    const SymEigResult r = sym_eig(m);
    Eigen::SelfAdjointEigenSolver<Mat> ref(m);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(r.values(i), ref.eigenvalues()(n - 1 - i), 1e-12);
    EXPECT_LE((r.vectors * r.values.asDiagonal() * r.vectors.transpose() - m).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((r.vectors.transpose() * r.vectors - Mat::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    for (int j = 0; j < n; ++j) {
      EXPECT_LE((m * r.vectors.col(j) - r.values(j) * r.vectors.col(j)).cwiseAbs().maxCoeff(),
                1e-9 * (1.0 + m.cwiseAbs().maxCoeff()));
    }
  }
  Mat bad(2, 2);
  bad << 1, 0, 1, 1;
  EXPECT_THROW(sym_eig(bad), PreconditionError);
}

TEST(PsdLeq, Examples) {
  const Mat I = Mat::Identity(2, 2);
  EXPECT_TRUE(psd_leq(I, 2 * I, 1e-9));
  EXPECT_FALSE(psd_leq(2 * I, I, 1e-9));
  Mat a = Mat::Zero(2, 2), b = Mat::Zero(2, 2);
  a.diagonal() << 1, 3;
  b.diagonal() << 3, 1;
  EXPECT_FALSE(psd_leq(a, b, 1e-9));
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Mat p = random_symmetric(4, seed);
    EXPECT_TRUE(psd_leq(p, p, 1e-12));
  }
}

TEST(Dare, ScalarCases) {
  auto s = [](double v) { return Mat::Constant(1, 1, v); };
  EXPECT_NEAR(dare(s(0), s(1), s(1), s(1))(0, 0), 1.0, 1e-12);
  const double p = dare(s(0.5), s(1), s(1), s(1))(0, 0);
  EXPECT_NEAR(p, oracle::scalar_dare(0.5, 1, 1, 1), 1e-11);
  EXPECT_NEAR(p, 1.13278, 1e-5);
  EXPECT_NEAR(p * p - 0.25 * p - 1.0, 0.0, 1e-11);
  EXPECT_NEAR(dare(s(1), s(1), s(1), s(1))(0, 0), (1.0 + std::sqrt(5.0)) / 2.0, 1e-11);
}

TEST(Dare, ExampleSystemControlAndFilterForms) {
  Mat A(2, 2), B(2, 1), C(1, 2);
  A << 1, 1, 0, 1;
  B << 0.5, 1;
  C << 1, 0;
  Mat Q = Mat::Zero(2, 2);
  Q.diagonal() << 100, 1;
  const Mat R = Mat::Identity(1, 1);
  const Mat p = dare(A, B, Q, R);
  EXPECT_LE((riccati_map(p, A, B, Q, R) - p).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((p - riccati_oracle(A, B, Q, R)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_GE(min_eigenvalue(p), -1e-10);

  const Mat Qw = 0.1 * Mat::Identity(2, 2);
  const Mat Rv = 0.1 * Mat::Identity(1, 1);
  const Mat pf = dare(A.transpose(), C.transpose(), Qw, Rv);
  EXPECT_LE((riccati_map(pf, A.transpose(), C.transpose(), Qw, Rv) - pf).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((pf - riccati_oracle(A.transpose(), C.transpose(), Qw, Rv)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Dare, DivergenceReportsResidual) {
  Mat A(2, 2), B(2, 1);
  A << 1, 1, 0, 1;
  B << 0.5, 1;
  DareOptions opts;
  opts.max_iter = 2;
  try {
    dare(A, B, Mat::Identity(2, 2), Mat::Identity(1, 1), opts);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.last_residual(), 1e-12);
  }
}

TEST(CholSolve, Examples) {
  Vec b(2);
  b << 3, -1;
  EXPECT_EQ(chol_solve(Mat::Identity(2, 2), b), Mat(b));
  Mat d = Mat::Zero(2, 2);
  d.diagonal() << 2, 4;
  Vec rhs(2);
  rhs << 2, 4;
  EXPECT_NEAR((chol_solve(d, rhs) - Vec::Ones(2)).norm(), 0.0, 1e-15);
  std::srand(3);
  const Mat m = Mat::Random(3, 3);
  const Mat spd = m * m.transpose() + Mat::Identity(3, 3);
  const Mat r = Mat::Random(3, 2);
  EXPECT_LE((spd * chol_solve(spd, r) - r).cwiseAbs().maxCoeff(), 1e-12);
  Mat indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(chol_solve(indefinite, rhs), FactorizationError);
}

TEST(PsdFactor, SingularAndIndefinite) {
  Vec v(3);
  v << 1, -2, 0.5;
  const Mat rank1 = v * v.transpose();
  const Mat f = psd_factor(rank1);
  EXPECT_LE((f * f.transpose() - rank1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(psd_factor(Mat::Zero(2, 2)), Mat::Zero(2, 2));
  Mat bad(2, 2);
  bad << 1, 0, 0, -1;
  EXPECT_THROW(psd_factor(bad), FactorizationError);
}

TEST(PsdRightDivide, ZeroOverSingularIsZero) {
  const Mat s = Mat::Zero(1, 1);
  EXPECT_EQ(psd_right_divide(Mat::Zero(2, 1), s), Mat::Zero(2, 1));
  EXPECT_THROW(psd_right_divide(Mat::Ones(2, 1), s), FactorizationError);
}

TEST(Structure, SpectralRadiusAndRankTests) {
  Mat A(2, 2), B(2, 1), C(1, 2);
  A << 1, 1, 0, 1;
  B << 0.5, 1;
  C << 1, 0;
  EXPECT_NEAR(spectral_radius(A), 1.0, 1e-12);
  EXPECT_TRUE(is_controllable(A, B));
  EXPECT_TRUE(is_observable(A, C));
  Mat C2(1, 2);
  C2 << 0, 1;
  EXPECT_FALSE(is_observable(A, C2));
  Mat B2(2, 1);
  B2 << 1, 0;
  EXPECT_FALSE(is_controllable(A, B2));
}
