#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ofsmpc/pipeline.hpp"
#include "ofsmpc/rng.hpp"

namespace ofsmpc {

/// Point of a zonotope: every generator weight is uniform on [-1, 1], except
/// that with probability `vertex_prob` all weights are pushed to +-1.
Vec sample_zonotope(const Zonotope& z, RngStream& rng, double vertex_prob = 0.1);

struct ProbeStats {
  long states = 0;      // feasible states found
  long attempts = 0;    // sampled states, feasible or not
  long cases = 0;       // (state, n_tilde) pairs probed
  long passed = 0;
  long solver_limit = 0;
};

/// Samples states uniformly in the bounding box of `sample_region` until
/// `n_states` of them give an optimal MPC solution, then runs
/// feasibility_probe for `n_disturbances` draws from the disturbance set at
/// each. State i uses RngStream(seed, i).
ProbeStats probe_batch(const MpcController& controller, const HPolytope& sample_region,
                       long n_states, long n_disturbances, std::uint64_t seed,
                       int workers = 1);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  long coverage_samples = 1000000;
  long probe_states = 200;
  long probe_disturbances = 50;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Property suite on a synthesized scenario: covariance bounds, confidence
/// coverage, tube monotonicity, terminal inclusion, RPI certificate, the
/// shifted-candidate probe and the disturbance-membership precondition.
std::vector<CheckResult> verify_synthesis(const Scenario& s, const Synthesis& syn,
                                          const VerifyOptions& opts);

}  // namespace ofsmpc
