#pragma once

#include "ofsmpc/mat_core.hpp"

namespace ofsmpc {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;  // objective at x when optimal
  Vec x;               // maximizer when optimal, empty otherwise
};

/// Tolerance used for pivots, ratio tests and the phase-1 feasibility decision.
constexpr double kLpTol = 1e-9;

/// maximize c^T x  subject to  A x <= b,  x free.
///
/// Dense two-phase tableau simplex with Bland's anti-cycling rule. Meant for
/// the small problems in this library (tens of variables, hundreds of rows).
LpResult lp_maximize(const Vec& c, const Mat& a, const Vec& b);

/// Smallest uniform relaxation t >= 0 such that {x : A x <= b + t} is
/// nonempty, together with a point attaining it. This is the phase-1
/// certificate used to separate genuinely infeasible constraint sets from
/// solver noise.
struct Phase1Result {
  double max_violation = 0.0;
  Vec x;
};
Phase1Result lp_min_violation(const Mat& a, const Vec& b);

}  // namespace ofsmpc
