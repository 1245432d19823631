#include <gtest/gtest.h>

#include "ofsmpc/qp.hpp"
#include "ofsmpc/rng.hpp"
#include "oracles.hpp"

using namespace ofsmpc;

namespace {

double objective(const QpProblem& qp, const Vec& x) {
  return 0.5 * x.dot(qp.H * x) + qp.f.dot(x) + qp.constant;
}

// Random strictly convex QP whose feasible set contains a known point.
QpProblem random_qp(RngStream& rng, int n, int m) {
  QpProblem qp;
  Mat l(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) l(i, j) = rng.standard_normal();
  qp.H = l * l.transpose() + 0.5 * Mat::Identity(n, n);
  qp.f = 5.0 * rng.standard_normal(n);
  qp.A.resize(m, n);
  for (int i = 0; i < m; ++i) qp.A.row(i) = rng.standard_normal(n).transpose();
  const Vec x0 = rng.standard_normal(n);
  qp.b = qp.A * x0;
  for (int i = 0; i < m; ++i) qp.b(i) += 0.1 + rng.uniform();
  return qp;
}

}  // namespace

TEST(Qp, Unconstrained) {
  QpProblem qp;
  qp.H.resize(2, 2);
  qp.H << 4, 1, 1, 3;
  qp.f.resize(2);
  qp.f << 1, -2;
  qp.A.resize(0, 2);
  qp.b.resize(0);
  const QpResult r = qp_solve(qp);
  ASSERT_EQ(r.status, QpStatus::optimal);
  EXPECT_LE((r.x + qp.H.inverse() * qp.f).norm(), 1e-12);
}

TEST(Qp, OneDimensionalActiveBound) {
  // min (c - 3)^2 s.t. c <= 1
  QpProblem qp{Mat::Constant(1, 1, 2), Vec::Constant(1, -6), Mat::Constant(1, 1, 1), Vec::Constant(1, 1), 9};
  const QpResult r = qp_solve(qp);
  ASSERT_EQ(r.status, QpStatus::optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.objective, 4.0, 1e-12);
  EXPECT_NEAR(r.multipliers(0), 4.0, 1e-12);
  EXPECT_LE(r.kkt_residual, 1e-7);
}

TEST(Qp, InfeasibleIsCertified) {
  Mat a(2, 1);
  a << 1, -1;
  Vec b(2);
  b << 0, -1;  // c <= 0 and c >= 1
  const QpResult r = qp_solve({Mat::Identity(1, 1), Vec::Zero(1), a, b, 0});
  EXPECT_EQ(r.status, QpStatus::infeasible);
  EXPECT_GT(r.phase1_violation, 1e-7);
}

TEST(Qp, IterationLimitIsNotInfeasible) {
  RngStream rng(2, 0);
  const QpProblem qp = random_qp(rng, 6, 20);
  QpOptions o;
  o.max_iter = 1;
  const QpResult r = qp_solve(qp, o);
  if (r.status != QpStatus::optimal) EXPECT_EQ(r.status, QpStatus::iteration_limit);
}

TEST(Qp, MatchesProjectedGradientOracle) {
  RngStream rng(17, 0);
  int active_cases = 0;
  for (int inst = 0; inst < 60; ++inst) {
    const int n = 1 + inst % 10;
    const QpProblem qp = random_qp(rng, n, 2 * n + 3);
    const QpResult r = qp_solve(qp);
    ASSERT_EQ(r.status, QpStatus::optimal) << "instance " << inst;
    const Vec xo = oracle::qp_dual_projected_gradient(qp.H, qp.f, qp.A, qp.b);
    EXPECT_NEAR(r.objective, objective(qp, xo), 1e-5) << "instance " << inst;
    EXPECT_LE(qp_kkt_residual(qp, r.x, r.multipliers), 1e-7);
    EXPECT_LE((qp.A * r.x - qp.b).maxCoeff(), 1e-7);
    if ((r.multipliers.array() > 1e-9).any()) ++active_cases;
  }
  EXPECT_GT(active_cases, 30);
}

TEST(Qp, KktResidualFlagsWrongPoint) {
  QpProblem qp{Mat::Constant(1, 1, 2), Vec::Constant(1, -6), Mat::Constant(1, 1, 1), Vec::Constant(1, 1), 9};
  EXPECT_NEAR(qp_kkt_residual(qp, Vec::Constant(1, 1), Vec::Constant(1, 4)), 0.0, 1e-15);
  EXPECT_GT(qp_kkt_residual(qp, Vec::Constant(1, 0.5), Vec::Constant(1, 0)), 1e-3);
  EXPECT_GT(qp_kkt_residual(qp, Vec::Constant(1, 1), Vec::Constant(1, -1)), 1e-3);
}
