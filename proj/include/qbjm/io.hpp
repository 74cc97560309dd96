#pragma once

// JSON forms of the domain values. Complex numbers are [re, im]; matrices are
// arrays of rows. Loaders re-run every invariant and report the failing
// invariant by name.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbjm/bell.hpp"
#include "qbjm/channel.hpp"
#include "qbjm/errors.hpp"
#include "qbjm/jm.hpp"
#include "qbjm/linalg.hpp"
#include "qbjm/quantum.hpp"

namespace qbjm {

using json = nlohmann::json;

// --- matrices --------------------------------------------------------------

inline json to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ParseError("matrix rows must be non-empty arrays");
  std::vector<cplx> e;
  e.reserve(rows * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) throw ParseError("matrix rows have unequal length");
    for (const auto& v : row) e.push_back(complex_from_json(v));
  }
  return {rows, cols, std::move(e)};
}

// --- assemblages and states -----------------------------------------------

inline json to_json(const Assemblage& m) {
  json effects = json::array();
  for (std::size_t x = 0; x < m.n_x(); ++x) {
    json povm = json::array();
    for (std::size_t a = 0; a < m.n_a(); ++a) povm.push_back(to_json(m.effect(x, a)));
    effects.push_back(std::move(povm));
  }
  return {{"dim", m.dim()}, {"n_x", m.n_x()}, {"n_a", m.n_a()}, {"effects", std::move(effects)}};
}

inline Assemblage assemblage_from_json(const json& j) {
  try {
    const auto dim = j.at("dim").get<std::size_t>();
    const auto n_x = j.at("n_x").get<std::size_t>();
    const auto n_a = j.at("n_a").get<std::size_t>();
    const auto& eff = j.at("effects");
    if (!eff.is_array() || eff.size() != n_x) throw ParseError("effects must have n_x entries");
    std::vector<ComplexMatrix> effects;
    for (const auto& povm : eff) {
      if (!povm.is_array() || povm.size() != n_a) throw ParseError("each input must list n_a effects");
      for (const auto& e : povm) effects.push_back(matrix_from_json(e));
    }
    return {dim, n_x, n_a, std::move(effects)};
  } catch (const json::exception& e) {
    throw ParseError(std::string("assemblage: ") + e.what());
  }
}

inline json to_json(const DensityMatrix& rho) { return {{"dims", rho.dims()}, {"matrix", to_json(rho.matrix())}}; }

inline DensityMatrix state_from_json(const json& j) {
  try {
    return {j.at("dims").get<std::vector<std::size_t>>(), matrix_from_json(j.at("matrix"))};
  } catch (const json::exception& e) {
    throw ParseError(std::string("state: ") + e.what());
  }
}

// --- certificates -----------------------------------------------------------

inline json to_json(const JMCertificate& c) {
  json parent = json::array();
  for (const auto& g : c.parent) parent.push_back(to_json(g));
  return {{"assignments", c.assignments}, {"parent", std::move(parent)}};
}

inline JMCertificate certificate_from_json(const json& j) {
  try {
    JMCertificate c;
    c.assignments = j.at("assignments").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& g : j.at("parent")) c.parent.push_back(matrix_from_json(g));
    if (c.assignments.empty()) throw ParseError("certificate has no assignments");
    c.n_x = c.assignments.front().size();
    std::size_t n_a = 0;
    for (const auto& row : c.assignments)
      for (auto a : row) n_a = std::max(n_a, a + 1);
    c.n_a = n_a;
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("certificate: ") + e.what());
  }
}

// --- Bell objects ----------------------------------------------------------

inline json to_json(const Scenario& s) { return {{"N", s.parties}, {"n_x", s.inputs}, {"n_a", s.outcomes}}; }

inline Scenario scenario_from_json(const json& j) {
  return {j.at("N").get<std::size_t>(), j.at("n_x").get<std::size_t>(), j.at("n_a").get<std::size_t>()};
}

// Sparse coefficient list: only nonzero entries are written.
inline json to_json(const BellInequality& ineq) {
  const Scenario& s = ineq.scenario;
  json coeffs = json::array();
  std::vector<std::size_t> xs(s.parties), as(s.parties);
  for (std::size_t i = 0; i < ineq.coefficients.size(); ++i) {
    if (ineq.coefficients[i] == 0.0) continue;
    detail::to_digits(i / s.outcome_tuples(), s.inputs, xs);
    detail::to_digits(i % s.outcome_tuples(), s.outcomes, as);
    coeffs.push_back({{"x", xs}, {"a", as}, {"c", ineq.coefficients[i]}});
  }
  return {{"scenario", to_json(s)}, {"coefficients", std::move(coeffs)}, {"local_bound", ineq.local_bound},
          {"name", ineq.name}};
}

struct LoadedInequality {
  BellInequality inequality;            // local bound recomputed from vertices
  std::optional<double> advisory_bound;  // as stored in the file
};

inline LoadedInequality inequality_from_json(const json& j) {
  try {
    const Scenario s = scenario_from_json(j.at("scenario"));
    s.validate();
    std::vector<double> c(s.table_size(), 0.0);
    for (const auto& term : j.at("coefficients")) {
      const auto xs = term.at("x").get<std::vector<std::size_t>>();
      const auto as = term.at("a").get<std::vector<std::size_t>>();
      if (xs.size() != s.parties || as.size() != s.parties) throw ParseError("coefficient tuple length != N");
      for (auto x : xs)
        if (x >= s.inputs) throw ParseError("coefficient input out of range");
      for (auto a : as)
        if (a >= s.outcomes) throw ParseError("coefficient outcome out of range");
      c[detail::from_digits(xs, s.inputs) * s.outcome_tuples() + detail::from_digits(as, s.outcomes)] +=
          term.at("c").get<double>();
    }
    LoadedInequality out{make_inequality(s, std::move(c), j.value("name", std::string("unnamed"))), std::nullopt};
    if (j.contains("local_bound") && j["local_bound"].is_number()) out.advisory_bound = j["local_bound"].get<double>();
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("inequality: ") + e.what());
  }
}

inline json to_json(const Behavior& b) {
  return {{"scenario", to_json(b.scenario())},
          {"index_order", "x-outer-a-inner"},
          {"table", std::vector<double>(b.table().begin(), b.table().end())}};
}

inline Behavior behavior_from_json(const json& j) {
  try {
    if (j.value("index_order", std::string("x-outer-a-inner")) != "x-outer-a-inner")
      throw ParseError("unsupported index_order");
    return {scenario_from_json(j.at("scenario")), j.at("table").get<std::vector<double>>()};
  } catch (const json::exception& e) {
    throw ParseError(std::string("behavior: ") + e.what());
  }
}

inline json to_json(const LocalityVerdict& v) {
  json out{{"local", v.local()}, {"lp_objective", v.lp_objective}, {"pivots", v.pivots}};
  if (v.local()) {
    json weights = json::array();
    for (std::size_t i = 0; i < v.primal().weights.size(); ++i)
      if (v.primal().weights[i] != 0.0) weights.push_back({{"vertex", i}, {"weight", v.primal().weights[i]}});
    out["primal"] = {{"weights", std::move(weights)}};
  } else {
    out["dual"] = {{"functional", v.dual().functional},
                   {"vertex_max", v.dual().vertex_max},
                   {"value", v.dual().value}};
  }
  return out;
}

inline json to_json(const QubitMap& phi) {
  return {{"basis", "matrix-units-row-major"}, {"action", to_json(phi.action())}};
}

inline QubitMap qubit_map_from_json(const json& j) {
  try {
    if (j.at("basis").get<std::string>() != "matrix-units-row-major") throw ParseError("unsupported basis");
    return QubitMap(matrix_from_json(j.at("action")));
  } catch (const json::exception& e) {
    throw ParseError(std::string("qubit map: ") + e.what());
  }
}

// --- files -------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline Assemblage load_assemblage(const std::string& path) { return assemblage_from_json(read_json_file(path)); }
inline DensityMatrix load_state(const std::string& path) { return state_from_json(read_json_file(path)); }

// Accepts a single inequality object or an array of them.
inline std::vector<LoadedInequality> load_catalog(const std::string& path) {
  const json j = read_json_file(path);
  std::vector<LoadedInequality> out;
  if (j.is_array())
    for (const auto& e : j) out.push_back(inequality_from_json(e));
  else
    out.push_back(inequality_from_json(j));
  return out;
}

// --- deterministic text ------------------------------------------------------

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return v > 0 ? "\"inf\"" : (v < 0 ? "\"-inf\"" : "\"nan\"");
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// Compact JSON with every float written to 17 significant digits.
inline void dump17(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump17(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump17(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

inline std::string dump17(const json& j) {
  std::string out;
  dump17(j, out);
  return out;
}

// FNV-1a, 64 bit.
inline std::string digest_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qbjm
