// Command-line front end: runs registered scenarios and validates input files.
//
// Exit codes: 0 ok, 1 a check failed, 2 usage error, 3 bad input file,
// 4 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qbjm/io.hpp"
#include "qbjm/scenarios.hpp"

namespace {

enum Exit : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kInput = 3, kNumerical = 4 };

qbjm::Overrides parse_sets(const std::vector<std::string>& sets) {
  qbjm::Overrides out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw qbjm::InvalidOverride("--set expects key=value, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

int validate_files(const std::string& assemblage, const std::string& state, const std::string& catalog,
                   const std::string& qubit_map, std::ostream& out) {
  if (!assemblage.empty()) {
    const auto m = qbjm::load_assemblage(assemblage);
    out << "assemblage ok: dim=" << m.dim() << " n_x=" << m.n_x() << " n_a=" << m.n_a() << "\n";
  }
  if (!state.empty()) {
    const auto rho = qbjm::load_state(state);
    out << "state ok: parties=" << rho.parties() << " dim=" << rho.dim() << "\n";
  }
  int rc = kOk;
  if (!catalog.empty()) {
    for (const auto& e : qbjm::load_catalog(catalog)) {
      out << "inequality " << e.inequality.name << ": local_bound=" << qbjm::format_double(e.inequality.local_bound);
      if (e.advisory_bound) {
        const bool match = std::abs(*e.advisory_bound - e.inequality.local_bound) <= 1e-9;
        out << " stored=" << qbjm::format_double(*e.advisory_bound) << (match ? " (match)" : " (MISMATCH)");
        if (!match) rc = kCheckFailed;
      }
      out << "\n";
    }
  }
  if (!qubit_map.empty()) {
    const auto phi = qbjm::qubit_map_from_json(qbjm::read_json_file(qubit_map));
    const bool cp = qbjm::is_completely_positive(phi);
    const bool tp = qbjm::is_trace_preserving(phi);
    out << "qubit map: cp=" << cp << " tp=" << tp;
    if (cp && tp) out << " entanglement_breaking=" << qbjm::is_entanglement_breaking(phi);
    out << "\n";
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint measurability and Bell nonlocality of qubit measurements"};
  std::vector<std::string> scenarios;
  std::vector<std::string> sets;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  bool list = false;
  std::string assemblage_path, state_path, catalog_path, map_path;

  app.add_option("--scenario", scenarios, "scenario id (repeatable, or 'all')");
  app.add_option("--set", sets, "override key=value (eta, tol, budget, ...)");
  app.add_option("--out", out_path, "write output here instead of stdout");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", seed, "seed recorded in the manifest");
  app.add_flag("--list", list, "list registered scenarios");
  app.add_option("--check-assemblage", assemblage_path, "load and validate an assemblage JSON file");
  app.add_option("--check-state", state_path, "load and validate a density matrix JSON file");
  app.add_option("--check-catalog", catalog_path, "load an inequality catalog and recompute local bounds");
  app.add_option("--check-map", map_path, "load a qubit map and report CP/TP/EB");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (list) {
    for (const auto& [id, desc] : qbjm::scenario_ids()) std::cout << id << "\t" << desc << "\n";
    return kOk;
  }

  try {
    if (!assemblage_path.empty() || !state_path.empty() || !catalog_path.empty() || !map_path.empty())
      return validate_files(assemblage_path, state_path, catalog_path, map_path, std::cout);

    if (scenarios.empty()) {
      std::cerr << "nothing to do: pass --scenario, --list or a --check-* option\n";
      return kUsage;
    }
    if (scenarios.size() == 1 && scenarios[0] == "all") {
      scenarios.clear();
      for (const auto& [id, desc] : qbjm::scenario_ids()) scenarios.push_back(id);
    }
    const auto overrides = parse_sets(sets);

    std::vector<qbjm::ScenarioResult> results;
    for (const auto& id : scenarios) results.push_back(qbjm::run_scenario(id, overrides, seed));

    std::string text;
    if (format == "csv") {
      for (std::size_t i = 0; i < results.size(); ++i) text += qbjm::to_csv(results[i], i == 0);
    } else {
      qbjm::json doc = qbjm::json::array();
      for (const auto& r : results) doc.push_back(qbjm::to_json(r));
      text = qbjm::dump17(results.size() == 1 ? doc[0] : doc) + "\n";
    }
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) {
        std::cerr << "cannot write " << out_path << "\n";
        return kUsage;
      }
      f << text;
    }

    bool ok = true;
    for (const auto& r : results)
      for (const auto& c : r.checks)
        if (!c.passed) {
          ok = false;
          std::cerr << r.scenario_id << ": check '" << c.name << "' failed: " << c.detail << "\n";
        }
    return ok ? kOk : kCheckFailed;
  } catch (const qbjm::UnknownScenario& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const qbjm::InvalidOverride& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const qbjm::InvariantViolation& e) {
    std::cerr << "invariant '" << e.invariant() << "' violated: " << e.what() << "\n";
    return kInput;
  } catch (const qbjm::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInput;
  } catch (const qbjm::DimensionMismatch& e) {
    std::cerr << "dimension mismatch: " << e.what() << "\n";
    return kInput;
  } catch (const qbjm::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kInput;
  } catch (const qbjm::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}
