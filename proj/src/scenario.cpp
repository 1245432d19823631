#include "ofsmpc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

const json& need(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double to_real(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  return j.get<double>();
}

long to_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError(what + ": expected an integer");
  return j.get<long>();
}

Vec to_vec(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_real(j[i], what);
  return v;
}

// Matrices are arrays of rows; a bare number is accepted for 1x1.
Mat to_mat(const json& j, const std::string& what) {
  if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected an array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(what + ": rows must be non-empty arrays");
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(what + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = to_real(j[r][c], what);
    }
  }
  return m;
}

HPolytope to_poly(const json& j, const std::string& what) {
  if (j.contains("lower") || j.contains("upper")) {
    reject_unknown(j, what, {"lower", "upper"});
    const Vec lo = to_vec(need(j, what, "lower"), what + ".lower");
    const Vec hi = to_vec(need(j, what, "upper"), what + ".upper");
    if (lo.size() != hi.size()) throw ConfigError(what + ": lower/upper sizes differ");
    if ((hi.array() <= lo.array()).any()) throw ConfigError(what + ": lower must be below upper");
    return HPolytope::box(lo, hi);
  }
  reject_unknown(j, what, {"H", "h"});
  HPolytope p{to_mat(need(j, what, "H"), what + ".H"), to_vec(need(j, what, "h"), what + ".h")};
  if (p.H.rows() != p.h.size()) throw ConfigError(what + ": H and h row counts differ");
  return p;
}

json from_mat(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json from_vec(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json from_poly(const HPolytope& p) { return json{{"H", from_mat(p.H)}, {"h", from_vec(p.h)}}; }

}  // namespace

double p_f_from_task_success(double target, int T) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("target_task_success must be in (0,1)");
  if (T < 2) throw ConfigError("target_task_success needs T >= 2");
  return 1.0 - std::pow(target, 1.0 / (T - 1));
}

void Scenario::validate() const {
  try {
    model.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  const auto nx = model.nx();
  const auto nu = model.nu();
  if (x_set.dim() != nx) throw ConfigError("constraints.X: dimension differs from the state");
  if (u_set.dim() != nu) throw ConfigError("constraints.U: dimension differs from the input");
  try {
    x_set.validate();
    u_set.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("constraints: ") + e.what());
  }
  if (!x_set.contains(Vec::Zero(nx), 0.0) || !u_set.contains(Vec::Zero(nu), 0.0)) {
    throw ConfigError("constraints: X and U must contain the origin");
  }
  if (!(p_x > 0.0 && p_x < 1.0)) throw ConfigError("constraints.p_x must be in (0,1)");
  if (!(p_f > 0.0 && p_f < 1.0)) throw ConfigError("constraints.p_f must be in (0,1)");
  if (horizon < 1) throw ConfigError("mpc.N must be >= 1");
  if (Q_lqr.rows() != nx || Q_lqr.cols() != nx) throw ConfigError("mpc.Q_LQR: wrong dimension");
  if (R_lqr.rows() != nu || R_lqr.cols() != nu) throw ConfigError("mpc.R_LQR: wrong dimension");
  if (!is_symmetric(Q_lqr) || min_eigenvalue(Q_lqr) < -1e-12) throw ConfigError("mpc.Q_LQR must be symmetric PSD");
  if (!is_symmetric(R_lqr) || min_eigenvalue(R_lqr) <= 0.0) throw ConfigError("mpc.R_LQR must be symmetric PD");
  if (budget_split != "uniform") throw ConfigError("mpc.budget_split: only 'uniform' is supported");
  if (n_runs < 1) throw ConfigError("mc.n_runs must be >= 1");
  if (workers < 0) throw ConfigError("mc.workers must be >= 0");
  if (rpi_max_iter < 1 || qp_max_iter < 1) throw ConfigError("tolerances: iteration caps must be >= 1");
}

Scenario load_scenario(std::istream& is) {
  json root;
  try {
    root = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  reject_unknown(root, "scenario", {"system", "constraints", "mpc", "mc", "tolerances"});
  Scenario s;

  const json& sys = need(root, "scenario", "system");
  reject_unknown(sys, "system", {"A", "B", "C", "Q", "R", "mu0", "Sigma0", "T"});
  s.model.A = to_mat(need(sys, "system", "A"), "system.A");
  s.model.B = to_mat(need(sys, "system", "B"), "system.B");
  s.model.C = to_mat(need(sys, "system", "C"), "system.C");
  s.model.Qw = to_mat(need(sys, "system", "Q"), "system.Q");
  s.model.Rv = to_mat(need(sys, "system", "R"), "system.R");
  s.model.mu0 = to_vec(need(sys, "system", "mu0"), "system.mu0");
  s.model.Sigma0 = to_mat(need(sys, "system", "Sigma0"), "system.Sigma0");
  s.model.T = static_cast<int>(to_int(need(sys, "system", "T"), "system.T"));

  const json& con = need(root, "scenario", "constraints");
  reject_unknown(con, "constraints", {"X", "U", "p_x", "p_f", "target_task_success"});
  s.x_set = to_poly(need(con, "constraints", "X"), "constraints.X");
  s.u_set = to_poly(need(con, "constraints", "U"), "constraints.U");
  s.p_x = to_real(need(con, "constraints", "p_x"), "constraints.p_x");
  const bool has_pf = con.contains("p_f");
  const bool has_target = con.contains("target_task_success");
  if (has_pf == has_target) {
    throw ConfigError("constraints: give exactly one of p_f and target_task_success");
  }
  if (has_pf) {
    s.p_f = to_real(con.at("p_f"), "constraints.p_f");
  } else {
    s.target_task_success = to_real(con.at("target_task_success"), "constraints.target_task_success");
    s.p_f = p_f_from_task_success(*s.target_task_success, s.model.T);
  }

  const json& mpc = need(root, "scenario", "mpc");
  reject_unknown(mpc, "mpc", {"N", "Q_LQR", "R_LQR", "bound_method", "budget_split", "zero_disturbance_set"});
  s.horizon = static_cast<int>(to_int(need(mpc, "mpc", "N"), "mpc.N"));
  s.Q_lqr = to_mat(need(mpc, "mpc", "Q_LQR"), "mpc.Q_LQR");
  s.R_lqr = to_mat(need(mpc, "mpc", "R_LQR"), "mpc.R_LQR");
  if (mpc.contains("bound_method")) {
    if (!mpc.at("bound_method").is_string()) throw ConfigError("mpc.bound_method: expected a string");
    try {
      s.bound_method = bound_method_from_string(mpc.at("bound_method").get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(std::string("mpc.bound_method: ") + e.what());
    }
  }
  if (mpc.contains("budget_split")) {
    if (!mpc.at("budget_split").is_string()) throw ConfigError("mpc.budget_split: expected a string");
    s.budget_split = mpc.at("budget_split").get<std::string>();
  }
  if (mpc.contains("zero_disturbance_set")) {
    if (!mpc.at("zero_disturbance_set").is_boolean()) throw ConfigError("mpc.zero_disturbance_set: expected a boolean");
    s.zero_disturbance_set = mpc.at("zero_disturbance_set").get<bool>();
  }

  if (root.contains("mc")) {
    const json& mc = root.at("mc");
    reject_unknown(mc, "mc", {"n_runs", "base_seed", "workers"});
    if (mc.contains("n_runs")) s.n_runs = to_int(mc.at("n_runs"), "mc.n_runs");
    if (mc.contains("base_seed")) {
      const long seed = to_int(mc.at("base_seed"), "mc.base_seed");
      if (seed < 0) throw ConfigError("mc.base_seed must be >= 0");
      s.base_seed = static_cast<std::uint64_t>(seed);
    }
    if (mc.contains("workers")) s.workers = static_cast<int>(to_int(mc.at("workers"), "mc.workers"));
  }
  if (root.contains("tolerances")) {
    const json& tol = root.at("tolerances");
    reject_unknown(tol, "tolerances", {"rpi_max_iter", "qp_max_iter"});
    if (tol.contains("rpi_max_iter")) s.rpi_max_iter = static_cast<int>(to_int(tol.at("rpi_max_iter"), "tolerances.rpi_max_iter"));
    if (tol.contains("qp_max_iter")) s.qp_max_iter = static_cast<int>(to_int(tol.at("qp_max_iter"), "tolerances.qp_max_iter"));
  }

  s.validate();
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return load_scenario(in);
}

std::string emit_scenario(const Scenario& s) {
  json root;
  root["system"] = {{"A", from_mat(s.model.A)},   {"B", from_mat(s.model.B)},
                    {"C", from_mat(s.model.C)},   {"Q", from_mat(s.model.Qw)},
                    {"R", from_mat(s.model.Rv)},  {"mu0", from_vec(s.model.mu0)},
                    {"Sigma0", from_mat(s.model.Sigma0)}, {"T", s.model.T}};
  json con = {{"X", from_poly(s.x_set)}, {"U", from_poly(s.u_set)}, {"p_x", s.p_x}};
  if (s.target_task_success) con["target_task_success"] = *s.target_task_success;
  else con["p_f"] = s.p_f;
  root["constraints"] = con;
  root["mpc"] = {{"N", s.horizon},
                 {"Q_LQR", from_mat(s.Q_lqr)},
                 {"R_LQR", from_mat(s.R_lqr)},
                 {"budget_split", s.budget_split},
                 {"zero_disturbance_set", s.zero_disturbance_set}};
  if (s.bound_method) root["mpc"]["bound_method"] = to_string(*s.bound_method);
  root["mc"] = {{"n_runs", s.n_runs}, {"base_seed", s.base_seed}, {"workers", s.workers}};
  root["tolerances"] = {{"rpi_max_iter", s.rpi_max_iter}, {"qp_max_iter", s.qp_max_iter}};
  return root.dump(2) + "\n";
}

}  // namespace ofsmpc
