#include "ofsmpc/verify.hpp"

#include <cmath>
#include <cstdio>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ofsmpc/errors.hpp"
#include "ofsmpc/sim_harness.hpp"

namespace ofsmpc {

Vec sample_zonotope(const Zonotope& z, RngStream& rng, double vertex_prob) {
  const bool vertex = rng.uniform() < vertex_prob;
  Vec alpha(z.order());
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    const double u = 2.0 * rng.uniform() - 1.0;
    alpha(j) = vertex ? (u < 0.0 ? -1.0 : 1.0) : u;
  }
  return z.center + z.generators * alpha;
}

ProbeStats probe_batch(const MpcController& controller, const HPolytope& sample_region,
                       long n_states, long n_disturbances, std::uint64_t seed, int workers) {
  const auto n = sample_region.dim();
  Vec lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec e = Vec::Unit(n, i);
    const SupportResult up = lp_support(sample_region, e);
    const SupportResult down = lp_support(sample_region, -e);
    if (up.status != LpStatus::optimal || down.status != LpStatus::optimal) {
      throw PreconditionError("probe_batch: sample region must be bounded and nonempty");
    }
    hi(i) = up.value;
    lo(i) = -down.value;
  }
  constexpr long kMaxAttemptsPerState = 10000;

  struct PerState {
    long attempts = 0;
    long cases = 0;
    long passed = 0;
    long solver_limit = 0;
    bool found = false;
  };
  std::vector<PerState> out(static_cast<std::size_t>(n_states));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_states));
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long s = 0; s < n_states; ++s) {
    try {
      PerState& ps = out[static_cast<std::size_t>(s)];
      RngStream rng(seed, static_cast<std::uint64_t>(s));
      MpcSolution sol;
      while (ps.attempts < kMaxAttemptsPerState) {
        ++ps.attempts;
        Vec x(n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * rng.uniform();
        sol = controller.solve(x);
        if (sol.status == MpcStatus::iteration_limit) ++ps.solver_limit;
        if (sol.status == MpcStatus::optimal) {
          ps.found = true;
          break;
        }
      }
      if (!ps.found) continue;
      for (long d = 0; d < n_disturbances; ++d) {
        const Vec nt = sample_zonotope(controller.problem().disturbance, rng);
        ++ps.cases;
        if (controller.feasibility_probe(sol, nt)) ++ps.passed;
      }
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  ProbeStats st;
  for (const PerState& ps : out) {
    st.attempts += ps.attempts;
    st.states += ps.found ? 1 : 0;
    st.cases += ps.cases;
    st.passed += ps.passed;
    st.solver_limit += ps.solver_limit;
  }
  return st;
}

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

std::vector<CheckResult> verify_synthesis(const Scenario& s, const Synthesis& syn,
                                          const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  const KalmanSchedule& sch = syn.schedule;

  {
    CheckResult c{"covariance_bound_" + to_string(syn.bound.method), true, ""};
    double worst = 0.0;
    for (const Mat& p : sch.post_cov) worst = std::min(worst, min_eigenvalue(syn.bound.P_bar - p));
    for (const Mat& p : sch.noise_cov) worst = std::min(worst, min_eigenvalue(syn.bound.Phi_bar - p));
    c.passed = bound_holds(syn.bound, sch);
    c.detail = fmt("min eigenvalue of (bound - covariance) over the schedule = %.3e", worst);
    out.push_back(c);
  }

  {
    const long n = opts.coverage_samples;
    const double p = s.p_x;
    const double floor = 1.0 - p - 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const int T = s.model.T;
    for (int k : {0, T / 10, T - 1}) {
      const double f = coverage_fraction(sch.post_cov[static_cast<std::size_t>(k)], syn.E_e.hrep, n,
                                         opts.seed + static_cast<std::uint64_t>(k), opts.workers);
      out.push_back({"coverage_e_k" + std::to_string(k), f >= floor,
                     fmt("fraction %.6f, required >= %.6f", f, floor)});
    }
  }

  {
    bool ok = true;
    for (std::size_t i = 0; i + 1 < syn.state_sets.size(); ++i) {
      ok = ok && poly_includes(syn.state_sets[i], syn.state_sets[i + 1]);
    }
    for (std::size_t i = 0; i + 1 < syn.input_sets.size(); ++i) {
      ok = ok && poly_includes(syn.input_sets[i], syn.input_sets[i + 1]);
    }
    out.push_back({"tube_monotonicity", ok, "X_RF,i+1 within X_RF,i and U_RF,i+1 within U_RF,i"});
    out.push_back({"terminal_inclusion",
                   poly_includes(syn.X_hat, syn.Xf_hat) &&
                       poly_includes(syn.state_sets.back(), syn.terminal),
                   "Xf_hat within X_hat and Xf_RF within X_RF,N-1"});
  }

  out.push_back({"rpi_certificate",
                 is_robust_invariant(syn.Xf_hat, syn.lqr.gains.Acl, syn.E_n.zonotope),
                 "Acl Xf_hat + E_n within Xf_hat"});

  const MpcController controller(syn.problem);
  {
    const ProbeStats st = probe_batch(controller, syn.X_hat, opts.probe_states,
                                      opts.probe_disturbances, opts.seed, opts.workers);
    const bool ok = st.states == opts.probe_states && st.passed == st.cases && st.solver_limit == 0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%ld/%ld candidates feasible at %ld states (%ld samples, %ld solver limits)",
                  st.passed, st.cases, st.states, st.attempts, st.solver_limit);
    out.push_back({"shifted_candidate_probe", ok, buf});
  }

  {
    // scale a vertex of E_n by 1.5 and expect the precondition to fire
    CheckResult c{"disturbance_membership_precondition", false, ""};
    const Zonotope& en = syn.problem.disturbance;
    const MpcSolution sol = controller.solve(Vec::Zero(s.model.nx()));
    if (en.order() == 0 || en.generators.norm() == 0.0) {
      c.passed = true;
      c.detail = "disturbance set is {0}; skipped";
    } else if (sol.status != MpcStatus::optimal) {
      c.detail = "MPC infeasible at the origin";
    } else {
      const Vec vertex = en.generators * Vec::Ones(en.order());
      bool boundary_ok = false;
      bool outside_rejected = false;
      try {
        controller.feasibility_probe(sol, vertex);
        boundary_ok = true;
      } catch (const PreconditionError&) {
      }
      try {
        controller.feasibility_probe(sol, 1.5 * vertex);
      } catch (const PreconditionError&) {
        outside_rejected = true;
      }
      c.passed = boundary_ok && outside_rejected;
      c.detail = std::string("vertex accepted: ") + (boundary_ok ? "yes" : "no") +
                 ", 1.5 x vertex rejected: " + (outside_rejected ? "yes" : "no");
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace ofsmpc
