#pragma once

// Multipartite behaviors, the local polytope, and Bell operators.
//
// Table layout: p(a|x) for N parties lives at index xi * n_a^N + ai, where xi
// and ai are the input and outcome tuples read as mixed-radix numbers with
// party 0 most significant. Bell inequality coefficients use the same layout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qbjm/config.hpp"
#include "qbjm/errors.hpp"
#include "qbjm/jm.hpp"
#include "qbjm/linalg.hpp"
#include "qbjm/quantum.hpp"
#include "qbjm/simplex.hpp"

namespace qbjm {

struct Scenario {
  std::size_t parties = 0;
  std::size_t inputs = 0;
  std::size_t outcomes = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  std::size_t input_tuples() const { return ipow(inputs, parties); }
  std::size_t outcome_tuples() const { return ipow(outcomes, parties); }
  std::size_t table_size() const { return input_tuples() * outcome_tuples(); }
  std::size_t strategies_per_party() const { return ipow(outcomes, inputs); }

  // Number of deterministic local strategies, saturating at SIZE_MAX.
  std::size_t vertex_count() const {
    const double v = std::pow(static_cast<double>(outcomes), static_cast<double>(inputs * parties));
    if (v >= 1e18) return std::numeric_limits<std::size_t>::max();
    return ipow(outcomes, inputs * parties);
  }

  void validate() const {
    if (parties == 0 || inputs == 0 || outcomes == 0)
      throw InvariantViolation("scenario-positive", "parties, inputs and outcomes must be >= 1");
  }

  static std::size_t ipow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
  }
};

namespace detail {

inline void to_digits(std::size_t index, std::size_t base, std::span<std::size_t> digits) {
  for (std::size_t n = digits.size(); n-- > 0;) {
    digits[n] = index % base;
    index /= base;
  }
}

inline std::size_t from_digits(std::span<const std::size_t> digits, std::size_t base) {
  std::size_t v = 0;
  for (auto d : digits) v = v * base + d;
  return v;
}

}  // namespace detail

class Behavior {
 public:
  // Checked construction: nonnegativity, normalization and no-signaling.
  Behavior(Scenario s, std::vector<double> table, const Tolerances& tol = kTolerances)
      : scenario_(s), table_(std::move(table)) {
    check_shape();
    validate(tol);
  }

  // Shape-checked only; used for raw tables such as signaling counterexamples.
  static Behavior unchecked(Scenario s, std::vector<double> table) {
    Behavior b(s, std::move(table), Unchecked{});
    return b;
  }

  const Scenario& scenario() const noexcept { return scenario_; }
  std::span<const double> table() const noexcept { return table_; }
  double operator[](std::size_t i) const { return table_[i]; }

  double prob(std::span<const std::size_t> a, std::span<const std::size_t> x) const {
    const std::size_t xi = detail::from_digits(x, scenario_.inputs);
    const std::size_t ai = detail::from_digits(a, scenario_.outcomes);
    return table_[xi * scenario_.outcome_tuples() + ai];
  }

  // Largest deviation of a single-party-dropped marginal across that party's
  // inputs, restricted to `parties` (all parties when empty).
  double signaling(std::span<const std::size_t> parties = {}) const {
    const Scenario& s = scenario_;
    const std::size_t n_out = s.outcome_tuples();
    std::vector<std::size_t> xs(s.parties), as(s.parties);
    double worst = 0.0;
    for (std::size_t n = 0; n < s.parties; ++n) {
      if (!parties.empty() && std::find(parties.begin(), parties.end(), n) == parties.end()) continue;
      for (std::size_t xi = 0; xi < s.input_tuples(); ++xi) {
        detail::to_digits(xi, s.inputs, xs);
        if (xs[n] == 0) continue;
        auto ref_x = xs;
        ref_x[n] = 0;
        const std::size_t ref_xi = detail::from_digits(ref_x, s.inputs);
        for (std::size_t ai = 0; ai < n_out; ++ai) {
          detail::to_digits(ai, s.outcomes, as);
          if (as[n] != 0) continue;
          double here = 0.0, there = 0.0;
          for (std::size_t k = 0; k < s.outcomes; ++k) {
            as[n] = k;
            const std::size_t aj = detail::from_digits(as, s.outcomes);
            here += table_[xi * n_out + aj];
            there += table_[ref_xi * n_out + aj];
          }
          worst = std::max(worst, std::abs(here - there));
        }
      }
    }
    return worst;
  }

  void validate(const Tolerances& tol = kTolerances) const {
    const std::size_t n_out = scenario_.outcome_tuples();
    for (std::size_t xi = 0; xi < scenario_.input_tuples(); ++xi) {
      double sum = 0.0;
      for (std::size_t ai = 0; ai < n_out; ++ai) {
        const double v = table_[xi * n_out + ai];
        if (!(v >= -tol.behavior_nonneg))
          throw InvariantViolation("behavior-nonnegative", "entry " + std::to_string(xi * n_out + ai) + " = " +
                                                               std::to_string(v));
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol.behavior_norm)
        throw InvariantViolation("behavior-normalized", "input tuple " + std::to_string(xi) + " sums to " +
                                                            std::to_string(sum));
    }
    const double sig = signaling();
    if (sig > tol.no_signaling)
      throw InvariantViolation("no-signaling", "marginal deviation " + std::to_string(sig));
  }

 private:
  struct Unchecked {};
  Behavior(Scenario s, std::vector<double> table, Unchecked) : scenario_(s), table_(std::move(table)) {
    check_shape();
  }

  void check_shape() const {
    scenario_.validate();
    if (table_.size() != scenario_.table_size())
      throw DimensionMismatch("Behavior: table has " + std::to_string(table_.size()) + " entries, scenario needs " +
                              std::to_string(scenario_.table_size()));
  }

  Scenario scenario_;
  std::vector<double> table_;
};

// --- deterministic strategies -------------------------------------------

// Outcome of party n on input x under joint vertex v. Party 0's strategy is the
// most significant digit of v; within a strategy, input 0 is most significant.
inline std::vector<std::vector<std::size_t>> vertex_strategy(const Scenario& s, std::size_t v) {
  std::vector<std::size_t> per_party(s.parties);
  detail::to_digits(v, s.strategies_per_party(), per_party);
  std::vector<std::vector<std::size_t>> out(s.parties, std::vector<std::size_t>(s.inputs));
  for (std::size_t n = 0; n < s.parties; ++n) detail::to_digits(per_party[n], s.outcomes, out[n]);
  return out;
}

// For each input tuple, the table index carrying probability one.
inline std::vector<std::size_t> vertex_support(const Scenario& s, std::size_t v) {
  const auto strat = vertex_strategy(s, v);
  std::vector<std::size_t> xs(s.parties), as(s.parties);
  std::vector<std::size_t> out(s.input_tuples());
  for (std::size_t xi = 0; xi < out.size(); ++xi) {
    detail::to_digits(xi, s.inputs, xs);
    for (std::size_t n = 0; n < s.parties; ++n) as[n] = strat[n][xs[n]];
    out[xi] = xi * s.outcome_tuples() + detail::from_digits(as, s.outcomes);
  }
  return out;
}

inline void require_vertex_cap(const Scenario& s, std::size_t cap) {
  s.validate();
  if (s.vertex_count() > cap)
    throw DomainError("vertex count " + std::to_string(s.vertex_count()) + " exceeds cap " + std::to_string(cap));
}

inline std::vector<Behavior> enumerate_vertices(const Scenario& s, std::size_t cap = kTolerances.vertex_cap) {
  require_vertex_cap(s, cap);
  std::vector<Behavior> out;
  out.reserve(s.vertex_count());
  for (std::size_t v = 0; v < s.vertex_count(); ++v) {
    std::vector<double> table(s.table_size(), 0.0);
    for (auto i : vertex_support(s, v)) table[i] = 1.0;
    out.emplace_back(s, std::move(table));
  }
  return out;
}

// max over deterministic vertices of sum_i c_i p_i.
inline double vertex_maximum(const Scenario& s, std::span<const double> coefficients,
                             std::size_t cap = kTolerances.vertex_cap) {
  require_vertex_cap(s, cap);
  if (coefficients.size() != s.table_size()) throw DimensionMismatch("vertex_maximum: coefficient count");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < s.vertex_count(); ++v) {
    double val = 0.0;
    for (auto i : vertex_support(s, v)) val += coefficients[i];
    best = std::max(best, val);
  }
  return best;
}

// --- Bell inequalities ---------------------------------------------------

struct BellInequality {
  Scenario scenario;
  std::vector<double> coefficients;  // table layout
  double local_bound = 0.0;
  std::string name;
};

inline BellInequality make_inequality(const Scenario& s, std::vector<double> coefficients, std::string name) {
  if (coefficients.size() != s.table_size()) throw DimensionMismatch("make_inequality: coefficient count");
  for (double c : coefficients)
    if (!std::isfinite(c)) throw InvariantViolation("finite-coefficients", name);
  const double bound = vertex_maximum(s, coefficients);
  return {s, std::move(coefficients), bound, std::move(name)};
}

// sum_x weight(x) <prod_n (-1)^{a_n}>_x for dichotomic scenarios.
template <class F>
std::vector<double> correlator_coefficients(const Scenario& s, F weight) {
  if (s.outcomes != 2) throw DomainError("correlator form needs two outcomes");
  std::vector<double> c(s.table_size(), 0.0);
  std::vector<std::size_t> xs(s.parties), as(s.parties);
  for (std::size_t xi = 0; xi < s.input_tuples(); ++xi) {
    detail::to_digits(xi, s.inputs, xs);
    const double w = weight(std::span<const std::size_t>(xs));
    if (w == 0.0) continue;
    for (std::size_t ai = 0; ai < s.outcome_tuples(); ++ai) {
      detail::to_digits(ai, s.outcomes, as);
      std::size_t parity = 0;
      for (auto a : as) parity ^= a;
      c[xi * s.outcome_tuples() + ai] = parity ? -w : w;
    }
  }
  return c;
}

// E00 + E01 + E10 - E11 <= 2.
inline BellInequality chsh() {
  const Scenario s{2, 2, 2};
  return make_inequality(
      s, correlator_coefficients(s, [](std::span<const std::size_t> x) { return (x[0] & x[1]) ? -1.0 : 1.0; }),
      "CHSH");
}

// E000 - E011 - E101 - E110 <= 2: the Mermin class written for a pair of
// anticommuting observables on inputs 0 and 1.
inline BellInequality mermin() {
  const Scenario s{3, 2, 2};
  return make_inequality(s,
                         correlator_coefficients(s,
                                                 [](std::span<const std::size_t> x) {
                                                   const std::size_t ones = x[0] + x[1] + x[2];
                                                   if (ones == 0) return 1.0;
                                                   if (ones == 2) return -1.0;
                                                   return 0.0;
                                                 }),
                         "Mermin");
}

// Collins-Gisin I3322 <= 0, with single-party terms expanded on the other
// party's input 0:
//   -2 pA(0|0) - pA(0|1) - pB(0|0) + sum_{xy} g_{xy} p(00|xy),
//   g = [[1, 1, 1], [1, 1, -1], [1, -1, 0]].
inline BellInequality i3322() {
  const Scenario s{2, 3, 2};
  std::vector<double> c(s.table_size(), 0.0);
  auto at = [&](std::size_t a, std::size_t b, std::size_t x, std::size_t y) -> double& {
    return c[(x * 3 + y) * 4 + a * 2 + b];
  };
  const double g[3][3] = {{1, 1, 1}, {1, 1, -1}, {1, -1, 0}};
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) at(0, 0, x, y) += g[x][y];
  const double alice[3] = {-2, -1, 0};
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t b = 0; b < 2; ++b) at(0, b, x, 0) += alice[x];
  for (std::size_t a = 0; a < 2; ++a) at(a, 0, 0, 0) += -1.0;
  return make_inequality(s, std::move(c), "I3322");
}

// Adds a party whose input 0 is traced out: c'(a a', x x') = c(a, x) [x' = 0].
inline BellInequality lift_inequality(const BellInequality& ineq) {
  const Scenario& s = ineq.scenario;
  const Scenario t{s.parties + 1, s.inputs, s.outcomes};
  std::vector<double> c(t.table_size(), 0.0);
  for (std::size_t xi = 0; xi < s.input_tuples(); ++xi)
    for (std::size_t ai = 0; ai < s.outcome_tuples(); ++ai)
      for (std::size_t a = 0; a < s.outcomes; ++a) {
        const std::size_t txi = xi * s.inputs;  // new party on input 0
        const std::size_t tai = ai * s.outcomes + a;
        c[txi * t.outcome_tuples() + tai] = ineq.coefficients[xi * s.outcome_tuples() + ai];
      }
  return make_inequality(t, std::move(c), ineq.name + "+trivial");
}

inline double bell_value(const Behavior& b, const BellInequality& ineq) {
  if (!(b.scenario() == ineq.scenario)) throw DimensionMismatch("bell_value: scenario mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < ineq.coefficients.size(); ++i) v += ineq.coefficients[i] * b[i];
  return v;
}

struct RelabelOptions {
  bool inputs = true;
  bool outcomes = true;
  bool parties = true;
};

// Orbit of `ineq` under the chosen relabeling group, generated by adjacent
// transpositions and closed by breadth-first search. Members are distinct as
// coefficient vectors; the local bound is invariant and copied.
inline std::vector<BellInequality> relabelings(const BellInequality& ineq, RelabelOptions opts = {}) {
  const Scenario& s = ineq.scenario;
  const std::size_t size = s.table_size();
  const std::size_t n_out = s.outcome_tuples();
  std::vector<std::vector<std::size_t>> generators;

  auto make = [&](auto&& map_digits) {
    std::vector<std::size_t> perm(size);
    std::vector<std::size_t> xs(s.parties), as(s.parties);
    for (std::size_t i = 0; i < size; ++i) {
      detail::to_digits(i / n_out, s.inputs, xs);
      detail::to_digits(i % n_out, s.outcomes, as);
      map_digits(xs, as);
      perm[i] = detail::from_digits(xs, s.inputs) * n_out + detail::from_digits(as, s.outcomes);
    }
    generators.push_back(std::move(perm));
  };

  for (std::size_t n = 0; n < s.parties; ++n) {
    if (opts.inputs)
      for (std::size_t j = 0; j + 1 < s.inputs; ++j)
        make([&](auto& xs, auto&) {
          if (xs[n] == j) xs[n] = j + 1;
          else if (xs[n] == j + 1) xs[n] = j;
        });
    if (opts.outcomes)
      for (std::size_t x = 0; x < s.inputs; ++x)
        for (std::size_t k = 0; k + 1 < s.outcomes; ++k)
          make([&](auto& xs, auto& as) {
            if (xs[n] != x) return;
            if (as[n] == k) as[n] = k + 1;
            else if (as[n] == k + 1) as[n] = k;
          });
  }
  if (opts.parties)
    for (std::size_t n = 0; n + 1 < s.parties; ++n)
      make([&](auto& xs, auto& as) {
        std::swap(xs[n], xs[n + 1]);
        std::swap(as[n], as[n + 1]);
      });

  std::set<std::vector<double>> seen{ineq.coefficients};
  std::vector<std::vector<double>> frontier{ineq.coefficients};
  std::vector<BellInequality> orbit{ineq};
  while (!frontier.empty()) {
    std::vector<std::vector<double>> next;
    for (const auto& c : frontier)
      for (const auto& g : generators) {
        std::vector<double> d(size);
        for (std::size_t i = 0; i < size; ++i) d[i] = c[g[i]];
        if (seen.insert(d).second) {
          orbit.push_back({s, d, ineq.local_bound, ineq.name + "#" + std::to_string(orbit.size())});
          next.push_back(std::move(d));
        }
      }
    frontier = std::move(next);
  }
  return orbit;
}

// --- quantum behaviors and Bell operators -------------------------------

namespace detail {

inline Scenario common_scenario(std::span<const Assemblage> parties) {
  if (parties.empty()) throw DimensionMismatch("no assemblages given");
  const auto& first = parties.front();
  for (const auto& m : parties)
    if (m.n_x() != first.n_x() || m.n_a() != first.n_a())
      throw DimensionMismatch("assemblages must share input and outcome counts");
  return {parties.size(), first.n_x(), first.n_a()};
}

// Calls f(table_index, operator) for every (x, a) with the tensor product of
// the parties' effects.
template <class F>
void for_each_product_effect(std::span<const Assemblage> parties, std::span<const double> mask, F f) {
  const Scenario s = common_scenario(parties);
  std::vector<std::size_t> xs(s.parties), as(s.parties);
  std::vector<ComplexMatrix> factors(s.parties);
  for (std::size_t xi = 0; xi < s.input_tuples(); ++xi) {
    detail::to_digits(xi, s.inputs, xs);
    for (std::size_t ai = 0; ai < s.outcome_tuples(); ++ai) {
      const std::size_t idx = xi * s.outcome_tuples() + ai;
      if (!mask.empty() && mask[idx] == 0.0) continue;
      detail::to_digits(ai, s.outcomes, as);
      for (std::size_t n = 0; n < s.parties; ++n) factors[n] = parties[n].effect(xs[n], as[n]);
      f(idx, kron(factors));
    }
  }
}

}  // namespace detail

inline Behavior behavior_from_state(const DensityMatrix& rho, std::span<const Assemblage> parties,
                                    const Tolerances& tol = kTolerances) {
  if (parties.size() != rho.parties())
    throw DimensionMismatch("behavior_from_state: one assemblage per party required");
  for (std::size_t n = 0; n < parties.size(); ++n)
    if (parties[n].dim() != rho.dims()[n])
      throw DimensionMismatch("behavior_from_state: local dimension mismatch at party " + std::to_string(n));
  const Scenario s = detail::common_scenario(parties);
  std::vector<double> table(s.table_size());
  detail::for_each_product_effect(parties, {}, [&](std::size_t idx, const ComplexMatrix& k) {
    table[idx] = trace_product(rho.matrix(), k).real();
  });
  return {s, std::move(table), tol};
}

// Every party measures the same assemblage.
inline Behavior behavior_from_state(const DensityMatrix& rho, const Assemblage& m,
                                    const Tolerances& tol = kTolerances) {
  const std::vector<Assemblage> parties(rho.parties(), m);
  return behavior_from_state(rho, parties, tol);
}

inline ComplexMatrix bell_operator(const BellInequality& ineq, std::span<const Assemblage> parties) {
  const Scenario s = detail::common_scenario(parties);
  if (!(s == ineq.scenario)) throw DimensionMismatch("bell_operator: scenario mismatch");
  std::size_t dim = 1;
  for (const auto& m : parties) dim *= m.dim();
  std::vector<cplx> acc(dim * dim, cplx{0.0, 0.0});
  detail::for_each_product_effect(parties, ineq.coefficients, [&](std::size_t idx, const ComplexMatrix& k) {
    const double c = ineq.coefficients[idx];
    auto e = k.entries();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * e[i];
  });
  return hermitian_part(ComplexMatrix(dim, dim, std::move(acc)));
}

inline ComplexMatrix bell_operator(const BellInequality& ineq, const Assemblage& m) {
  const std::vector<Assemblage> parties(ineq.scenario.parties, m);
  return bell_operator(ineq, parties);
}

// --- local polytope membership -------------------------------------------

struct PrimalCertificate {
  std::vector<double> weights;  // one per vertex, in enumerate_vertices order
};

struct DualCertificate {
  std::vector<double> functional;  // table layout
  double vertex_max = 0.0;          // max over vertices of functional . v
  double value = 0.0;               // functional . p
};

struct LocalityVerdict {
  std::variant<PrimalCertificate, DualCertificate> certificate;
  double lp_objective = 0.0;
  std::size_t pivots = 0;

  bool local() const noexcept { return std::holds_alternative<PrimalCertificate>(certificate); }
  const PrimalCertificate& primal() const { return std::get<PrimalCertificate>(certificate); }
  const DualCertificate& dual() const { return std::get<DualCertificate>(certificate); }
};

inline bool verify_primal(const Behavior& b, const PrimalCertificate& cert, const Tolerances& tol = kTolerances) {
  const Scenario& s = b.scenario();
  if (cert.weights.size() != s.vertex_count()) return false;
  double total = 0.0;
  std::vector<double> mix(s.table_size(), 0.0);
  for (std::size_t v = 0; v < cert.weights.size(); ++v) {
    const double w = cert.weights[v];
    if (!(w >= -tol.primal_weight)) return false;
    total += w;
    if (w == 0.0) continue;
    for (auto i : vertex_support(s, v)) mix[i] += w;
  }
  if (std::abs(total - 1.0) > tol.primal_sum) return false;
  for (std::size_t i = 0; i < mix.size(); ++i)
    if (std::abs(mix[i] - b[i]) > tol.primal_reconstruct) return false;
  return true;
}

inline bool verify_dual(const Behavior& b, const DualCertificate& cert, const Tolerances& tol = kTolerances) {
  const Scenario& s = b.scenario();
  if (cert.functional.size() != s.table_size()) return false;
  double value = 0.0;
  for (std::size_t i = 0; i < cert.functional.size(); ++i) value += cert.functional[i] * b[i];
  const double vmax = vertex_maximum(s, cert.functional);
  return value > vmax + tol.dual_margin;
}

inline BellInequality to_inequality(const DualCertificate& cert, const Scenario& s, std::string name = "lp-dual") {
  return make_inequality(s, cert.functional, std::move(name));
}

namespace detail {

// Collins-Gisin coordinates: for every party subset S, inputs x_S and outcomes
// a_S with each a_n < n_a - 1, the marginal probability of a_S given x_S with
// the remaining parties summed at input 0. These are affinely independent on
// no-signaling behaviors; the empty subset is the normalization. Each
// coordinate is returned as the list of table indices it sums.
inline std::vector<std::vector<std::size_t>> collins_gisin_rows(const Scenario& s) {
  std::vector<std::vector<std::size_t>> rows;
  const std::size_t n_out = s.outcome_tuples();
  std::vector<std::size_t> xs(s.parties), as(s.parties);
  for (std::size_t mask = 0; mask < (std::size_t{1} << s.parties); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t n = 0; n < s.parties; ++n)
      if (mask >> (s.parties - 1 - n) & 1) members.push_back(n);
    const std::size_t k = members.size();
    const std::size_t n_xs = Scenario::ipow(s.inputs, k);
    const std::size_t n_as = Scenario::ipow(s.outcomes - 1, k);
    std::vector<std::size_t> sx(k), sa(k);
    for (std::size_t xsi = 0; xsi < n_xs; ++xsi) {
      to_digits(xsi, s.inputs, sx);
      for (std::size_t asi = 0; asi < n_as; ++asi) {
        to_digits(asi, s.outcomes - 1, sa);
        std::vector<std::size_t> row;
        std::fill(xs.begin(), xs.end(), 0);
        for (std::size_t j = 0; j < k; ++j) xs[members[j]] = sx[j];
        const std::size_t xi = from_digits(xs, s.inputs);
        for (std::size_t ai = 0; ai < n_out; ++ai) {
          to_digits(ai, s.outcomes, as);
          bool match = true;
          for (std::size_t j = 0; j < k && match; ++j) match = as[members[j]] == sa[j];
          if (match) row.push_back(xi * n_out + ai);
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace detail

// LP membership of b in the convex hull of deterministic vertices, posed in
// Collins-Gisin coordinates so the equality rows are independent. The dual
// multipliers are mapped back to a functional on the full table.
inline LocalityVerdict is_local(const Behavior& b, const Tolerances& tol = kTolerances) {
  const Scenario& s = b.scenario();
  require_vertex_cap(s, tol.vertex_cap);
  b.validate(tol);

  const auto cg = detail::collins_gisin_rows(s);
  const std::size_t rows = cg.size();
  const std::size_t cols = s.vertex_count();
  std::vector<double> a(rows * cols, 0.0);
  for (std::size_t v = 0; v < cols; ++v) {
    std::vector<char> hit(s.table_size(), 0);
    for (auto i : vertex_support(s, v)) hit[i] = 1;
    for (std::size_t k = 0; k < rows; ++k) {
      double sum = 0.0;
      for (auto i : cg[k]) sum += hit[i];
      a[k * cols + v] = sum;
    }
  }
  std::vector<double> rhs(rows, 0.0);
  for (std::size_t k = 0; k < rows; ++k)
    for (auto i : cg[k]) rhs[k] += b[i];

  // Both certificates are re-verified; a failed verification (rounding in a
  // long degenerate pivot sequence) is retried with a stricter pivot threshold.
  double last_objective = 0.0;
  for (const double pivot_tol : {tol.lp_pivot, tol.lp_pivot * 10.0, tol.lp_pivot * 100.0}) {
    PhaseOneResult lp;
    try {
      lp = phase_one(a, rows, cols, rhs, pivot_tol);
    } catch (const NumericalFailure&) {
      continue;
    }
    last_objective = lp.objective;
    LocalityVerdict verdict;
    verdict.lp_objective = lp.objective;
    verdict.pivots = lp.pivots;

    if (lp.objective <= tol.lp_local_objective) {
      PrimalCertificate cert{lp.primal};
      if (verify_primal(b, cert, tol)) {
        verdict.certificate = std::move(cert);
        return verdict;
      }
    }
    DualCertificate dual;
    dual.functional.assign(s.table_size(), 0.0);
    for (std::size_t k = 0; k < rows; ++k)
      for (auto i : cg[k]) dual.functional[i] += lp.duals[k];
    for (std::size_t i = 0; i < dual.functional.size(); ++i) dual.value += dual.functional[i] * b[i];
    dual.vertex_max = vertex_maximum(s, dual.functional);
    if (verify_dual(b, dual, tol)) {
      verdict.certificate = std::move(dual);
      return verdict;
    }
  }
  throw NumericalFailure("is_local: neither certificate verified (objective " + std::to_string(last_objective) + ")");
}

// --- marginals -----------------------------------------------------------

// Sums out the parties in `drop` at their reference input 0.
inline Behavior marginalize(const Behavior& b, std::span<const std::size_t> drop,
                            const Tolerances& tol = kTolerances) {
  const Scenario& s = b.scenario();
  std::vector<bool> dropped(s.parties, false);
  for (auto n : drop) {
    if (n >= s.parties) throw DimensionMismatch("marginalize: party out of range");
    dropped[n] = true;
  }
  const std::size_t kept = static_cast<std::size_t>(std::count(dropped.begin(), dropped.end(), false));
  if (kept == 0) throw DomainError("marginalize: cannot drop every party");
  const double sig = b.signaling(drop);
  if (sig > tol.no_signaling) throw InvariantViolation("no-signaling", "dropped party signals by " + std::to_string(sig));

  const Scenario t{kept, s.inputs, s.outcomes};
  std::vector<double> table(t.table_size(), 0.0);
  std::vector<std::size_t> xs(s.parties), as(s.parties), kx, ka;
  for (std::size_t xi = 0; xi < s.input_tuples(); ++xi) {
    detail::to_digits(xi, s.inputs, xs);
    bool reference = true;
    for (std::size_t n = 0; n < s.parties; ++n)
      if (dropped[n] && xs[n] != 0) reference = false;
    if (!reference) continue;
    for (std::size_t ai = 0; ai < s.outcome_tuples(); ++ai) {
      detail::to_digits(ai, s.outcomes, as);
      kx.clear();
      ka.clear();
      for (std::size_t n = 0; n < s.parties; ++n)
        if (!dropped[n]) {
          kx.push_back(xs[n]);
          ka.push_back(as[n]);
        }
      table[detail::from_digits(kx, t.inputs) * t.outcome_tuples() + detail::from_digits(ka, t.outcomes)] +=
          b[xi * s.outcome_tuples() + ai];
    }
  }
  return {t, std::move(table), tol};
}

// --- visibility thresholds -----------------------------------------------

inline double max_violation(const BellInequality& ineq, const Assemblage& m, double eta) {
  return max_eigenvalue(bell_operator(ineq, depolarize(m, eta))) - ineq.local_bound;
}

// Smallest eta at which the Bell operator of `ineq`, with depolarize(m, eta) at
// each of the k parties, has an eigenvalue above the local bound. The operator
// is rebuilt at every probe. nullopt when even eta = 1 gives no violation.
inline std::optional<double> eig_threshold(const BellInequality& ineq, const Assemblage& m, std::size_t k,
                                           const Tolerances& tol = kTolerances) {
  const Scenario& s = ineq.scenario;
  if (s.parties != k || s.inputs != m.n_x() || s.outcomes != m.n_a())
    throw DimensionMismatch("eig_threshold: inequality scenario does not match (k, n_x, n_a)");
  if (max_violation(ineq, m, 1.0) <= 0.0) return std::nullopt;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol.eig_threshold) {
    const double mid = 0.5 * (lo + hi);
    (max_violation(ineq, m, mid) > 0.0 ? hi : lo) = mid;
  }
  return hi;
}

// Smallest eta (to tol.lp_threshold) at which the k-party behavior of `rho`
// with depolarize(m, eta) everywhere is certified nonlocal by the LP.
inline std::optional<double> lp_threshold(const Assemblage& m, const DensityMatrix& rho,
                                          const Tolerances& tol = kTolerances) {
  auto nonlocal = [&](double eta) { return !is_local(behavior_from_state(rho, depolarize(m, eta), tol), tol).local(); };
  if (!nonlocal(1.0)) return std::nullopt;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol.lp_threshold) {
    const double mid = 0.5 * (lo + hi);
    (nonlocal(mid) ? hi : lo) = mid;
  }
  return hi;
}

struct VisibilityBounds {
  double lower = 0.0;                 // certified JM visibility
  std::optional<double> upper;        // best nonlocality threshold found
  std::string upper_source;           // inequality or state that produced `upper`
  RobustnessInterval jm;
};

// Brackets the k-partite Bell visibility: JM implies local, so eta_JM is a
// lower bound; any violated inequality or LP-certified state gives an upper
// bound. Catalog entries whose scenario does not match are skipped.
inline VisibilityBounds visibility_bounds(const Assemblage& m, std::size_t k, std::span<const BellInequality> catalog,
                                          std::span<const DensityMatrix> states, double jm_tolerance = 1e-3,
                                          const Tolerances& tol = kTolerances) {
  VisibilityBounds out;
  out.jm = jm_robustness(m, jm_tolerance, tol.dykstra_budget, tol);
  out.lower = out.jm.eta_lo;
  auto consider = [&](std::optional<double> eta, const std::string& source) {
    if (eta && (!out.upper || *eta < *out.upper)) {
      out.upper = eta;
      out.upper_source = source;
    }
  };
  for (const auto& ineq : catalog) {
    const Scenario& s = ineq.scenario;
    if (s.parties != k || s.inputs != m.n_x() || s.outcomes != m.n_a()) continue;
    consider(eig_threshold(ineq, m, k, tol), ineq.name);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].parties() != k) continue;
    consider(lp_threshold(m, states[i], tol), "state#" + std::to_string(i));
  }
  return out;
}

}  // namespace qbjm
