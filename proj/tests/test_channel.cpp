#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qbjm/channel.hpp"
#include "qbjm/errors.hpp"
#include "test_util.hpp"

using namespace qbjm;
using qbjm::test::near;

namespace {

// Sorted closed-form Choi spectrum of the depolarizing channel.
std::vector<double> depolarizing_choi_spectrum(double eta) {
  std::vector<double> v{(1.0 + 3.0 * eta) / 4.0, (1.0 - eta) / 4.0, (1.0 - eta) / 4.0, (1.0 - eta) / 4.0};
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// Werner-type state v |phi+><phi+| + (1 - v) I/4.
DensityMatrix werner(double v) {
  return {{2, 2}, v * max_entangled(2).matrix() + (1.0 - v) / 4.0 * ComplexMatrix::identity(4)};
}

}  // namespace

TEST(QubitMap, ApplyMatchesFunction) {
  auto g = test::rng(91);
  const auto x = test::random_matrix(2, 2, g);
  EXPECT_TRUE(near(identity_map().apply(x), x, 0.0));
  EXPECT_TRUE(near(transpose_map().apply(x), transpose(x), 0.0));
  EXPECT_TRUE(near(depolarizing_map(0.3).apply(x), depolarize_effect(x, 0.3), 1e-15));
  EXPECT_THROW(QubitMap(ComplexMatrix::identity(3)), DimensionMismatch);
}

TEST(Choi, IdentityIsMaximallyEntangled) {
  EXPECT_TRUE(near(choi(identity_map()), max_entangled(2).matrix(), 1e-15));
}

TEST(Choi, TransposeIsNotPositive) {
  // (1/2) * swap: eigenvalues +1/2 (x3) and -1/2.
  const auto ev = eigenvalues(choi(transpose_map()));
  EXPECT_NEAR(ev.back(), -0.5, 1e-12);
  EXPECT_NEAR(ev.front(), 0.5, 1e-12);
}

TEST(Choi, DepolarizingClosedForm) {
  for (double eta : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.9, 1.0}) {
    const auto ev = eigenvalues(choi(depolarizing_map(eta)));
    const auto oracle = depolarizing_choi_spectrum(eta);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], oracle[i], 1e-12) << eta;
  }
}

TEST(Choi, UnitTraceForCptpMaps) {
  auto g = test::rng(92);
  for (int t = 0; t < 10; ++t) {
    // Random Kraus pair normalized to sum K^dag K = I.
    const auto a = test::random_matrix(2, 2, g), b = test::random_matrix(2, 2, g);
    const auto s = adjoint(a) * a + adjoint(b) * b;
    const auto inv_sqrt = spectral_map(eigh(hermitian_part(s)), [](double v) { return 1.0 / std::sqrt(v); });
    const ComplexMatrix kraus[] = {a * inv_sqrt, b * inv_sqrt};
    const auto phi = kraus_map(kraus);
    EXPECT_TRUE(is_trace_preserving(phi));
    EXPECT_NEAR(trace(choi(phi)).real(), 1.0, 1e-12);
    EXPECT_TRUE(is_completely_positive(phi));
  }
}

TEST(Choi, RejectsNonHermiticityPreserving) {
  const auto phi = map_from_function([](const ComplexMatrix& x) { return cplx{0.0, 1.0} * x; });
  EXPECT_THROW(choi(phi), DomainError);
}

TEST(CompletelyPositive, Examples) {
  EXPECT_TRUE(is_completely_positive(identity_map()));
  EXPECT_FALSE(is_completely_positive(transpose_map()));
  EXPECT_TRUE(is_completely_positive(depolarizing_map(0.5)));
}

TEST(Ppt, Examples) {
  auto g = test::rng(93);
  const DensityMatrix parts[] = {random_density_matrix({2}, g), random_density_matrix({2}, g)};
  EXPECT_TRUE(is_ppt(product_state(parts)));
  EXPECT_FALSE(is_ppt(max_entangled(2)));
  // Partial transpose of the Werner state has smallest eigenvalue (1 - 3v)/4.
  EXPECT_TRUE(is_ppt(werner(1.0 / 3.0)));
  EXPECT_TRUE(is_ppt(werner(1.0 / 3.0 - 1e-6)));
  EXPECT_FALSE(is_ppt(werner(1.0 / 3.0 + 1e-6)));
  EXPECT_THROW(is_ppt(ghz_y()), DimensionMismatch);
}

TEST(EntanglementBreaking, Examples) {
  EXPECT_TRUE(is_entanglement_breaking(depolarizing_map(0.0)));
  EXPECT_FALSE(is_entanglement_breaking(identity_map()));
  for (double eta : {0.1, 0.3, 1.0 / 3.0 - 1e-9}) EXPECT_TRUE(is_entanglement_breaking(depolarizing_map(eta)));
  for (double eta : {1.0 / 3.0 + 1e-8, 0.4, 0.9}) EXPECT_FALSE(is_entanglement_breaking(depolarizing_map(eta)));
  EXPECT_THROW(is_entanglement_breaking(transpose_map()), DomainError);
}

TEST(EntanglementBreaking, BoundaryBisection) {
  EXPECT_NEAR(depolarizing_eb_boundary(), 1.0 / 3.0, 1e-6);
}

TEST(AnnihilationScreen, DepolarizingBelowAndAbove) {
  auto g = test::rng(94);
  EXPECT_TRUE(annihilation_screen(depolarizing_map(0.2), 50, g));
  // The identity leaves entangled inputs entangled; random two-qubit states are
  // often NPT, so a counterexample shows up quickly.
  EXPECT_FALSE(annihilation_screen(identity_map(), 200, g));
}
