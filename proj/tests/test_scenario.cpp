#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "ofsmpc/errors.hpp"
#include "ofsmpc/pipeline.hpp"
#include "ofsmpc/scenario.hpp"
#include "ofsmpc/set_io.hpp"
#include "ofsmpc/verify.hpp"

using namespace ofsmpc;

namespace {

std::string scenario_path(const char* name) { return std::string(OFSMPC_SCENARIO_DIR) + "/" + name; }

Scenario load_text(const std::string& text) {
  std::istringstream is(text);
  return load_scenario(is);
}

const char* kMinimal = R"({
  "system": {"A": [[1, 1], [0, 1]], "B": [[0.5], [1]], "C": [[1, 0]],
             "Q": [[0.001, 0], [0, 0.001]], "R": [[0.001]], "mu0": [5, 0],
             "Sigma0": [[0.001, 0], [0, 0.001]], "T": 20},
  "constraints": {"X": {"lower": [-8, -8], "upper": [80, 40]},
                  "U": {"H": [[1], [-1]], "h": [5, 5]},
                  "p_x": 0.05, "p_f": 0.002},
  "mpc": {"N": 5, "Q_LQR": [[100, 0], [0, 1]], "R_LQR": 1},
  "mc": {"n_runs": 10, "base_seed": 3, "workers": 2}
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(Scenario, TaskSuccessDerivation) {
  EXPECT_NEAR(p_f_from_task_success(0.905, 50), 0.002035, 1e-6);
  const double pf = p_f_from_task_success(0.905, 50);
  EXPECT_NEAR(1 - std::pow(1 - pf, 49), 0.095, 1e-12);
  const Scenario s = load_scenario_file(scenario_path("example.json"));
  EXPECT_NEAR(s.p_f, pf, 1e-15);
  EXPECT_EQ(s.horizon, 5);
  EXPECT_EQ(s.model.T, 50);
  EXPECT_EQ(*s.bound_method, BoundMethod::analytic_md);
}

TEST(Scenario, RoundTripIsIdempotent) {
  for (const char* f : {"example.json", "reduced_noise.json"}) {
    const Scenario s = load_scenario_file(scenario_path(f));
    const std::string once = emit_scenario(s);
    const std::string twice = emit_scenario(load_text(once));
    EXPECT_EQ(once, twice) << f;
  }
  const Scenario m = load_text(kMinimal);
  EXPECT_FALSE(m.bound_method.has_value());
  EXPECT_EQ(emit_scenario(load_text(emit_scenario(m))), emit_scenario(m));
  EXPECT_EQ(m.u_set.h(0), 5.0);
}

TEST(Scenario, RejectsUnknownAndMissingKeys) {
  EXPECT_THROW(load_text(replace(kMinimal, "\"T\": 20", "\"T\": 20, \"dt\": 1")), ConfigError);
  EXPECT_THROW(load_text(replace(kMinimal, "\"workers\": 2", "\"workers\": 2, \"threads\": 4")), ConfigError);
  EXPECT_THROW(load_text(replace(kMinimal, "\"p_x\": 0.05, ", "")), ConfigError);
  EXPECT_THROW(load_text(replace(kMinimal, "\"p_f\": 0.002", "\"p_f\": 0.002, \"target_task_success\": 0.9")),
               ConfigError);
  EXPECT_THROW(load_text(replace(kMinimal, "\"p_f\": 0.002", "\"p_f\": 1.5")), ConfigError);
  EXPECT_THROW(load_text(replace(kMinimal, "\"R_LQR\": 1", "\"R_LQR\": 1, \"bound_method\": \"lowner_john\"")),
               ConfigError);
  EXPECT_THROW(load_text(replace(kMinimal, "\"C\": [[1, 0]]", "\"C\": [[0, 1]]")), ConfigError);
  EXPECT_THROW(load_text("{ not json"), ConfigError);
  EXPECT_THROW(load_scenario_file("/nonexistent/scenario.json"), ConfigError);
}

TEST(Pipeline, FirstTightenedSetsEqualUntightened) {
  const Scenario s = load_scenario_file(scenario_path("reduced_noise.json"));
  const Synthesis syn = synthesize(s);
  EXPECT_EQ(syn.state_sets[0].h, syn.X_hat.h);
  EXPECT_EQ(syn.state_sets[0].H, syn.X_hat.H);
  EXPECT_EQ(syn.input_sets[0].h, s.u_set.h);
  EXPECT_EQ(static_cast<int>(syn.state_sets.size()), s.horizon);
  EXPECT_TRUE(poly_includes(syn.state_sets.back(), syn.terminal));
  EXPECT_EQ(syn.bound.method, BoundMethod::analytic_md);
}

TEST(Pipeline, ZeroDisturbanceSetLeavesStateSetsUntouched) {
  Scenario s = load_scenario_file(scenario_path("reduced_noise.json"));
  s.zero_disturbance_set = true;
  const Synthesis syn = synthesize(s);
  for (const auto& x : syn.state_sets) EXPECT_EQ(x.h, syn.X_hat.h);
  for (const auto& u : syn.input_sets) EXPECT_EQ(u.h, s.u_set.h);
}

TEST(Pipeline, OverTightInputNamesStage) {
  Scenario s = load_scenario_file(scenario_path("reduced_noise.json"));
  s.u_set.h << 0.01, 0.01;
  try {
    synthesize(s);
    FAIL() << "expected EmptySetError";
  } catch (const EmptySetError& e) {
    EXPECT_EQ(e.stage(), "input_tightening");
  }
}

TEST(Pipeline, BoundMethodDefaultAndAssumptionFailure) {
  Scenario s = load_scenario_file(scenario_path("reduced_noise.json"));
  const Mat p_inf = steady_state_prior(s.model);
  s.bound_method.reset();
  EXPECT_EQ(resolved_bound_method(s, p_inf), BoundMethod::analytic_md);

  s.model.Sigma0 = 10 * p_inf;
  EXPECT_EQ(resolved_bound_method(s, p_inf), BoundMethod::scaled_reference);
  s.bound_method = BoundMethod::analytic_md;
  EXPECT_THROW(synthesize(s), PreconditionError);
  s.bound_method = BoundMethod::scaled_reference;
  const Synthesis syn = synthesize(s);
  EXPECT_TRUE(bound_holds(syn.bound, syn.schedule));
}

TEST(Pipeline, SynthesisDumpHasEveryBlock) {
  const Scenario s = load_scenario_file(scenario_path("reduced_noise.json"));
  std::stringstream ss;
  write_synthesis(ss, synthesize(s));
  const auto blocks = read_set_blocks(ss);
  for (const char* name : {"P_inf", "P_bar", "Phi_bar", "K", "P_LQR", "E_e", "E_n", "X_hat", "X_RF_0", "X_RF_4",
                           "U_RF_0", "U_RF_4", "Xf_hat", "Xf_RF"}) {
    EXPECT_EQ(blocks.count(name), 1u) << name;
  }
}

TEST(Verify, ReducedNoiseScenarioPassesAllChecks) {
  const Scenario s = load_scenario_file(scenario_path("reduced_noise.json"));
  const Synthesis syn = synthesize(s);
  VerifyOptions o;
  o.coverage_samples = 100000;
  o.probe_states = 50;
  o.probe_disturbances = 20;
  o.workers = 0;
  const auto checks = verify_synthesis(s, syn, o);
  EXPECT_GE(checks.size(), 8u);
  for (const CheckResult& c : checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Verify, ProbeBatchIsWorkerIndependent) {
  const Scenario s = load_scenario_file(scenario_path("reduced_noise.json"));
  const Synthesis syn = synthesize(s);
  const MpcController ctl(syn.problem);
  const ProbeStats a = probe_batch(ctl, syn.X_hat, 30, 10, 5, 1);
  const ProbeStats b = probe_batch(ctl, syn.X_hat, 30, 10, 5, 4);
  EXPECT_EQ(a.attempts, b.attempts);
  EXPECT_EQ(a.passed, b.passed);
  EXPECT_EQ(a.cases, 300);
  EXPECT_EQ(a.passed, a.cases);
}
