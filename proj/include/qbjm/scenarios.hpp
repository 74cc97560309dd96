#pragma once

// Named pipelines that reproduce each published number, plus the manifest
// they produce. Everything here is deterministic: fixed probe schedules and
// no randomness, so two runs with the same overrides give identical numbers.

#include <charconv>
#include <chrono>
#include <limits>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qbjm/bell.hpp"
#include "qbjm/channel.hpp"
#include "qbjm/config.hpp"
#include "qbjm/errors.hpp"
#include "qbjm/io.hpp"
#include "qbjm/jm.hpp"
#include "qbjm/quantum.hpp"
#include "qbjm/trine_split.hpp"

namespace qbjm {

class UnknownScenario : public Error {
 public:
  using Error::Error;
};

class InvalidOverride : public Error {
 public:
  using Error::Error;
};

struct NamedNumber {
  std::string name;
  double value = 0.0;
  std::string op;  // operation that produced the value
};

struct ScenarioCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ScenarioResult {
  std::string scenario_id;
  std::string inputs_digest;
  std::vector<NamedNumber> numbers;
  std::vector<ScenarioCheck> checks;
  json certificates = json::object();
  std::int64_t runtime_ms = 0;
  std::uint64_t seed = 0;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  const NamedNumber* number(const std::string& name) const {
    for (const auto& n : numbers)
      if (n.name == name) return &n;
    return nullptr;
  }
};

using Overrides = std::map<std::string, std::string>;

inline json to_json(const ScenarioResult& r) {
  json numbers = json::array();
  for (const auto& n : r.numbers) numbers.push_back({{"name", n.name}, {"value", n.value}, {"op", n.op}});
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"scenario_id", r.scenario_id}, {"inputs_digest", r.inputs_digest}, {"seed", r.seed},
          {"numbers", std::move(numbers)},  {"checks", std::move(checks)},    {"certificates", r.certificates},
          {"runtime_ms", r.runtime_ms},     {"ok", r.ok()}};
}

inline std::string to_csv(const ScenarioResult& r, bool header = true) {
  std::string out = header ? "scenario_id,name,value\n" : "";
  for (const auto& n : r.numbers) out += r.scenario_id + "," + n.name + "," + format_double(n.value) + "\n";
  return out;
}

namespace detail {

// Parameters a scenario accepts, with defaults and admissible ranges.
struct Param {
  double value;
  double min;
  double max;
};

class ScenarioContext {
 public:
  ScenarioContext(std::string id, std::map<std::string, Param> params, const Overrides& overrides)
      : params_(std::move(params)) {
    result.scenario_id = std::move(id);
    for (const auto& [key, text] : overrides) {
      auto it = params_.find(key);
      if (it == params_.end()) throw InvalidOverride(result.scenario_id + ": unknown override '" + key + "'");
      double v = 0.0;
      const char* first = text.data();
      const char* last = first + text.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw InvalidOverride(result.scenario_id + ": override '" + key + "' is not a number: '" + text + "'");
      if (v < it->second.min || v > it->second.max)
        throw InvalidOverride(result.scenario_id + ": override '" + key + "' outside [" +
                              format_double(it->second.min) + ", " + format_double(it->second.max) + "]");
      it->second.value = v;
    }
    inputs_["scenario_id"] = result.scenario_id;
    for (const auto& [key, p] : params_) inputs_["params"][key] = p.value;
  }

  double param(const std::string& key) const { return params_.at(key).value; }

  void add_input(const std::string& key, json value) { inputs_["data"][key] = std::move(value); }

  void number(std::string name, double value, std::string op) {
    result.numbers.push_back({std::move(name), value, std::move(op)});
  }

  void check(std::string name, bool passed, std::string detail) {
    result.checks.push_back({std::move(name), passed, std::move(detail)});
  }

  void check_within(const std::string& name, double value, double target, double tol) {
    check(name, std::abs(value - target) <= tol,
          format_double(value) + " vs " + format_double(target) + " +- " + format_double(tol));
  }

  std::string digest() const { return digest_hex(dump17(inputs_)); }

  ScenarioResult finish() {
    result.inputs_digest = digest();
    return std::move(result);
  }

  ScenarioResult result;

 private:
  std::map<std::string, Param> params_;
  json inputs_ = json::object();
};

inline std::size_t budget_param(const ScenarioContext& ctx) {
  return static_cast<std::size_t>(ctx.param("budget"));
}

inline void jm_scenario(ScenarioContext& ctx, const Assemblage& m, double target, double lo, double hi) {
  ctx.add_input("assemblage", to_json(m));
  const RobustnessInterval r = jm_robustness(m, ctx.param("tol"), budget_param(ctx));
  ctx.number("eta_lo", r.eta_lo, "jm_robustness");
  ctx.number("eta_hi", r.eta_hi, "jm_robustness");
  ctx.number("probes", static_cast<double>(r.probes), "jm_robustness");
  ctx.number("target", target, "closed_form");
  const ParentCheck pc = check_parent(depolarize(m, r.eta_lo), r.certificate);
  ctx.number("certificate_min_eigenvalue", pc.min_eigenvalue, "check_parent");
  ctx.check("certificate-verifies", pc.ok, "parent re-verified at eta_lo");
  ctx.check("eta_lo-in-range", r.eta_lo >= lo && r.eta_lo <= hi,
            format_double(r.eta_lo) + " in [" + format_double(lo) + ", " + format_double(hi) + "]");
  json cert = to_json(r.certificate);
  cert["eta"] = r.eta_lo;
  ctx.result.certificates["jm"] = std::move(cert);
}

inline void eig_scenario(ScenarioContext& ctx, const BellInequality& ineq, const Assemblage& m, std::size_t k,
                         double target, double quantum_max) {
  ctx.add_input("assemblage", to_json(m));
  ctx.add_input("inequality", to_json(ineq));
  const double top = max_eigenvalue(bell_operator(ineq, m));
  ctx.number("local_bound", ineq.local_bound, "vertex_maximum");
  ctx.number("max_eigenvalue", top, "bell_operator");
  ctx.check_within("max-eigenvalue", top, quantum_max, 1e-9);
  const auto eta = eig_threshold(ineq, m, k);
  if (!eta) {
    ctx.check("violation-at-eta-1", false, "no eigenvalue above the local bound");
    return;
  }
  ctx.number("eta_threshold", *eta, "eig_threshold");
  ctx.check_within("eta_threshold", *eta, target, 1e-3);
  // Monotone bracket against the JM floor.
  ctx.check("above-jm-floor", *eta > ctx.param("jm_floor"), "threshold exceeds the JM visibility");
}

inline Assemblage trine_two_inputs() {
  const std::size_t keep[] = {0, 1};
  return restrict_inputs(trine(), keep);
}

using Pipeline = std::function<ScenarioResult(const Overrides&)>;

struct Entry {
  std::string id;
  std::string description;
  Pipeline run;
};

inline Param eta_param(double v) { return {v, 0.0, 1.0}; }
inline Param tol_param(double v) { return {v, 1e-5, 0.1}; }
inline Param budget_param_default() {
  return {static_cast<double>(kTolerances.dykstra_budget), 1.0, 1e7};
}

inline const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"pauli-jm", "JM robustness of the Pauli X/Z pair (1/sqrt 2)",
       [](const Overrides& o) {
         ScenarioContext ctx("pauli-jm", {{"tol", tol_param(1e-3)}, {"budget", budget_param_default()}}, o);
         jm_scenario(ctx, pauli_pair(), 1.0 / std::sqrt(2.0), 0.7061, 0.7081);
         return ctx.finish();
       }},
      {"trine-jm", "JM robustness of the trine (2/3)",
       [](const Overrides& o) {
         ScenarioContext ctx("trine-jm", {{"tol", tol_param(1e-3)}, {"budget", budget_param_default()}}, o);
         jm_scenario(ctx, trine(), 2.0 / 3.0, 2.0 / 3.0 - 1e-3, 2.0 / 3.0 + 1e-3);
         return ctx.finish();
       }},
      {"pauli-b2", "CHSH eigenvalue threshold for the Pauli pair, k=2 (~0.8409)",
       [](const Overrides& o) {
         ScenarioContext ctx("pauli-b2", {{"jm_floor", eta_param(1.0 / std::sqrt(2.0))}}, o);
         eig_scenario(ctx, chsh(), pauli_pair(), 2, 0.8409, 2.0 * std::sqrt(2.0));
         return ctx.finish();
       }},
      {"pauli-b3", "Mermin eigenvalue threshold for the Pauli pair, k=3 (~0.7938)",
       [](const Overrides& o) {
         ScenarioContext ctx("pauli-b3", {{"jm_floor", eta_param(1.0 / std::sqrt(2.0))}}, o);
         eig_scenario(ctx, mermin(), pauli_pair(), 3, 0.7938, 4.0);
         return ctx.finish();
       }},
      {"trine-b2", "CHSH eigenvalue threshold on two trine inputs, k=2 (~0.8694)",
       [](const Overrides& o) {
         ScenarioContext ctx("trine-b2", {{"jm_floor", eta_param(2.0 / 3.0)}}, o);
         eig_scenario(ctx, chsh(), trine_two_inputs(), 2, 0.8694, std::sqrt(7.0));
         return ctx.finish();
       }},
      {"trine-i3322", "No member of the I3322 relabeling orbit is violated by the trine at the CHSH threshold",
       [](const Overrides& o) {
         ScenarioContext ctx("trine-i3322", {{"eta", eta_param(std::sqrt(2.0 / std::sqrt(7.0)))}}, o);
         const double eta = ctx.param("eta");
         const BellInequality base = i3322();
         ctx.add_input("assemblage", to_json(trine()));
         ctx.add_input("inequality", to_json(base));
         const Assemblage noisy = depolarize(trine(), eta);
         const auto orbit = relabelings(base);
         double worst = -std::numeric_limits<double>::infinity();
         for (const auto& ineq : orbit)
           worst = std::max(worst, max_eigenvalue(bell_operator(ineq, noisy)) - ineq.local_bound);
         ctx.number("eta", eta, "override");
         ctx.number("orbit_size", static_cast<double>(orbit.size()), "relabelings");
         ctx.number("local_bound", base.local_bound, "vertex_maximum");
         ctx.number("max_excess", worst, "bell_operator");
         ctx.check("no-violation", worst <= -1e-6, "max eigenvalue minus bound = " + format_double(worst));
         return ctx.finish();
       }},
      {"trine-ghzy-lp", "LP nonlocality of GHZ_Y measured with noisy trines (eta = 0.8007)",
       [](const Overrides& o) {
         ScenarioContext ctx("trine-ghzy-lp", {{"eta", eta_param(0.8007)}}, o);
         const double eta = ctx.param("eta");
         const DensityMatrix rho = ghz_y();
         ctx.add_input("state", to_json(rho));
         ctx.add_input("assemblage", to_json(trine()));
         const Behavior b = behavior_from_state(rho, depolarize(trine(), eta));
         const LocalityVerdict v = is_local(b);
         ctx.number("eta", eta, "override");
         ctx.number("lp_objective", v.lp_objective, "is_local");
         ctx.number("pivots", static_cast<double>(v.pivots), "is_local");
         ctx.result.certificates["locality"] = to_json(v);
         if (v.local()) {
           ctx.check("dual-certificate", false, "behavior is local at this eta (primal certificate)");
           ctx.check("primal-verifies", verify_primal(b, v.primal()), "primal re-verified");
         } else {
           ctx.number("dual_value", v.dual().value, "is_local");
           ctx.number("dual_vertex_max", v.dual().vertex_max, "is_local");
           ctx.number("violation_gap", v.dual().value - v.dual().vertex_max, "is_local");
           ctx.check("dual-certificate", verify_dual(b, v.dual()), "separating functional re-verified");
         }
         return ctx.finish();
       }},
      {"appendix-e", "Convex split of the noisy trine into noiseless and JM parts (p ~ 1e-2)",
       [](const Overrides& o) {
         ScenarioContext ctx("appendix-e", {{"eta", {0.67, kTrineJMVisibility, 1.0}}}, o);
         const double eta = ctx.param("eta");
         ctx.add_input("assemblage", to_json(trine()));
         const TrineSplit s = split_trine(eta);
         const double w = tripartite_weight(s.p);
         ctx.number("eta_star", eta, "override");
         ctx.number("p", s.p, "split_trine");
         ctx.number("tripartite_weight", w, "tripartite_weight");
         ctx.number("residual", s.residual, "split_residual");
         ctx.check("residual", s.residual <= 1e-12, format_double(s.residual));
         const double p_ref = (eta - 2.0 / 3.0) * 3.0;
         ctx.check_within("p", s.p, p_ref, 1e-15);
         ctx.check_within("tripartite_weight", w, p_ref * p_ref * p_ref, 1e-18);
         return ctx.finish();
       }},
      {"depol-eb", "Entanglement-breaking boundary of the qubit depolarizing channel (1/3)",
       [](const Overrides& o) {
         ScenarioContext ctx("depol-eb", {{"tol", {1e-9, 1e-15, 1e-2}}}, o);
         const double eta = depolarizing_eb_boundary(ctx.param("tol"));
         ctx.number("eta_boundary", eta, "depolarizing_eb_boundary");
         // Closed form: smallest eigenvalue of the partially transposed Choi matrix.
         ctx.number("closed_form_min_eig", (1.0 - 3.0 * eta) / 4.0, "closed_form");
         ctx.check_within("boundary", eta, 1.0 / 3.0, 1e-6);
         return ctx.finish();
       }},
  };
  return entries;
}

}  // namespace detail

inline std::vector<std::pair<std::string, std::string>> scenario_ids() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : detail::registry()) out.emplace_back(e.id, e.description);
  return out;
}

inline ScenarioResult run_scenario(const std::string& id, const Overrides& overrides = {}, std::uint64_t seed = 0) {
  for (const auto& e : detail::registry()) {
    if (e.id != id) continue;
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioResult r = e.run(overrides);
    const auto t1 = std::chrono::steady_clock::now();
    r.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    r.seed = seed;
    return r;
  }
  throw UnknownScenario("unknown scenario '" + id + "'");
}

}  // namespace qbjm
