#pragma once

#include <iosfwd>
#include <vector>

#include "ofsmpc/estimation.hpp"
#include "ofsmpc/scenario.hpp"
#include "ofsmpc/set_algebra.hpp"
#include "ofsmpc/smpc.hpp"

namespace ofsmpc {

/// Everything derived from a scenario before the first control step.
struct Synthesis {
  KalmanSchedule schedule;
  Mat P_inf;
  CovarianceBound bound;
  LqrDesign lqr;
  ProbabilityBudget budget_e;
  ProbabilityBudget budget_n;
  ConfidenceSet E_e;  // estimation error, level 1 - p_x
  ConfidenceSet E_n;  // estimator disturbance, level 1 - p_f
  HPolytope X_hat;    // X minus E_e
  std::vector<HPolytope> state_sets;  // X_RF,0..N-1
  std::vector<HPolytope> input_sets;  // U_RF,0..N-1
  HPolytope Xf_hat;   // RPI set of X_hat intersected with {K x in U}
  HPolytope terminal; // Xf_hat minus the accumulated tube
  MpcProblem problem;
};

/// The scenario's bound method, or the default when it is unset.
BoundMethod resolved_bound_method(const Scenario& s, const Mat& p_inf);

/// Runs bounds -> confidence sets -> tightening -> terminal set. Empty sets
/// raise EmptySetError with the stage name ("state_confidence",
/// "state_tightening", "input_tightening", "rpi", "terminal_tightening").
Synthesis synthesize(const Scenario& s);

/// Deterministic comparison controller on the raw X and U.
MpcProblem baseline_for(const Scenario& s, const LqrDesign& lqr);

/// All synthesized quantities as set_io blocks.
void write_synthesis(std::ostream& os, const Synthesis& syn);

}  // namespace ofsmpc
