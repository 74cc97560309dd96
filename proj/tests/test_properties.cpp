#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "property_suites.hpp"
#include "qbjm/bell.hpp"
#include "qbjm/channel.hpp"
#include "qbjm/trine_split.hpp"
#include "test_util.hpp"

using namespace qbjm;

namespace {

void expect_suite(const props::SuiteResult& r, std::size_t min_cases) {
  EXPECT_GE(r.cases, min_cases);
  EXPECT_EQ(r.failures, 0u) << r.first_failure << " (worst " << r.worst << ")";
}

}  // namespace

TEST(Properties, BehaviorNormalizationAndNoSignaling) { expect_suite(props::behavior_consistency(120, 1001), 100); }

TEST(Properties, OperatorValueDuality) { expect_suite(props::operator_value_duality(120, 1002), 100); }

TEST(Properties, DepolarizingAdjointness) { expect_suite(props::depolarizing_adjointness(200, 1003), 100); }

TEST(Properties, CertificateSoundness) { expect_suite(props::certificate_soundness(120, 1004), 100); }

TEST(Properties, JmImpliesLocal) { expect_suite(props::jm_implies_local(100, 1005), 100); }

TEST(Properties, CertificateSoundnessSeesBothVerdicts) {
  // Guard against a suite that only ever exercises one branch.
  std::mt19937_64 g(1006);
  std::size_t local = 0, nonlocal = 0;
  for (int c = 0; c < 40; ++c) {
    const auto rho = random_pure_state({2, 2}, g);
    std::vector<Assemblage> ms{props::random_dichotomic_assemblage(2, 1.0, g),
                               props::random_dichotomic_assemblage(2, 1.0, g)};
    (is_local(behavior_from_state(rho, ms)).local() ? local : nonlocal)++;
  }
  EXPECT_GT(local, 0u);
  EXPECT_GT(nonlocal, 0u);
}

TEST(Properties, BruteVertexMaxMatchesLibrary) {
  std::mt19937_64 g(1007);
  std::normal_distribution<double> n(0.0, 1.0);
  for (const Scenario s : {Scenario{2, 2, 2}, Scenario{2, 3, 2}, Scenario{3, 2, 2}, Scenario{2, 2, 3}}) {
    std::vector<double> f(s.table_size());
    for (auto& v : f) v = n(g);
    EXPECT_NEAR(props::brute_vertex_max(s, f), vertex_maximum(s, f), 1e-12);
  }
}

TEST(Properties, DepolarizeComposition) {
  std::mt19937_64 g(1008);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 100; ++c) {
    const auto m = props::random_dichotomic_assemblage(3, 1.0, g);
    const double e1 = u(g), e2 = u(g);
    const auto lhs = depolarize(depolarize(m, e1), e2);
    const auto rhs = depolarize(m, e1 * e2);
    for (std::size_t i = 0; i < m.effects().size(); ++i)
      EXPECT_LE(max_abs_diff(lhs.effects()[i], rhs.effects()[i]), 1e-12);
  }
}

TEST(Properties, JacobiReconstruction) {
  std::mt19937_64 g(1009);
  for (int c = 0; c < 100; ++c) {
    const std::size_t d = 2 + c % 7;
    const auto a = random_hermitian(d, g);
    const auto ed = eigh(a);
    const auto rebuilt = ed.vectors * ComplexMatrix::diagonal(ed.values) * adjoint(ed.vectors);
    EXPECT_LE(frobenius_norm(rebuilt - a), 1e-9 * frobenius_norm(a));
  }
}

TEST(Properties, ChoiLinearity) {
  std::mt19937_64 g(1010);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 100; ++c) {
    const double t = u(g), e1 = u(g), e2 = u(g);
    const auto a = depolarizing_map(e1);
    const auto b = c % 2 ? transpose_map() : depolarizing_map(e2);
    const auto mixed = choi(combine(t, a, 1.0 - t, b));
    const auto expected = t * choi(a) + (1.0 - t) * choi(b);
    EXPECT_LE(max_abs_diff(mixed, expected), 1e-12);
  }
}

TEST(Properties, EntanglementBreakingImpliesCp) {
  std::mt19937_64 g(1011);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t eb = 0;
  for (int c = 0; c < 100; ++c) {
    // Mixtures of a depolarizing channel with a random unitary conjugation.
    const auto uu = eigh(random_hermitian(2, g)).vectors;
    const ComplexMatrix kraus[] = {uu};
    const auto unitary = kraus_map(kraus);
    const double w = u(g);
    const auto mix = combine(w, depolarizing_map(u(g) / 3.0), 1.0 - w, unitary);
    ASSERT_TRUE(is_trace_preserving(mix));
    if (is_entanglement_breaking(mix)) {
      ++eb;
      EXPECT_TRUE(is_completely_positive(mix));
    }
  }
  // Measure-and-prepare channels are always EB and CP.
  for (int c = 0; c < 100; ++c) {
    const auto p = random_qubit_dichotomic(g, 1.0);
    const auto s0 = random_density_matrix({2}, g).matrix(), s1 = random_density_matrix({2}, g).matrix();
    const auto mp = map_from_function([&](const ComplexMatrix& x) {
      return trace_product(p[0], x) * s0 + trace_product(p[1], x) * s1;
    });
    ASSERT_TRUE(is_entanglement_breaking(mp));
    ++eb;
    EXPECT_TRUE(is_completely_positive(mp));
  }
  EXPECT_GE(eb, 100u);
}

TEST(Properties, TrineSplitIdentity) {
  for (int c = 0; c <= 100; ++c) {
    const double eta = 2.0 / 3.0 + (1.0 / 3.0) * c / 100.0;
    const auto s = split_trine(std::min(eta, 1.0));
    EXPECT_LE(s.residual, 1e-12);
  }
}

TEST(Properties, MonotoneUpperBoundsUnderLifting) {
  const BellInequality k2[] = {chsh()};
  const BellInequality k3[] = {lift_inequality(chsh()), mermin()};
  for (const auto& m : {pauli_pair(), depolarize(pauli_pair(), 0.95)}) {
    const auto b2 = visibility_bounds(m, 2, k2, {});
    const auto b3 = visibility_bounds(m, 3, k3, {});
    ASSERT_TRUE(b2.upper && b3.upper);
    EXPECT_LE(*b3.upper, *b2.upper + 1e-12);
    EXPECT_LE(b2.lower, *b2.upper);
    EXPECT_LE(b3.lower, *b3.upper);
  }
}

TEST(Properties, PauliGapShrinksFromTwoToThreeParties) {
  const BellInequality k2[] = {chsh()};
  const BellInequality k3[] = {lift_inequality(chsh()), mermin()};
  const auto b2 = visibility_bounds(pauli_pair(), 2, k2, {});
  const auto b3 = visibility_bounds(pauli_pair(), 3, k3, {});
  ASSERT_TRUE(b2.upper && b3.upper);
  EXPECT_NEAR(b2.lower, 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(*b2.upper, 0.8409, 1e-3);
  EXPECT_NEAR(*b3.upper, 0.7937, 1e-3);
  EXPECT_LT(*b3.upper - b3.lower, *b2.upper - b2.lower);
}
