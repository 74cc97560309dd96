#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qbjm/errors.hpp"
#include "qbjm/linalg.hpp"
#include "qbjm/quantum.hpp"
#include "test_util.hpp"

using namespace qbjm;
using qbjm::test::near;
using qbjm::test::random_matrix;

TEST(Kron, IdentityTimesIdentity) { EXPECT_EQ(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)), ComplexMatrix::identity(4)); }

TEST(Kron, ZZIsDiagonal) {
  const double d[] = {1, -1, -1, 1};
  EXPECT_EQ(kron(pauli::Z(), pauli::Z()), ComplexMatrix::diagonal(d));
}

TEST(Kron, MatchesIndexFormula) {
  auto g = test::rng(11);
  const auto a = random_matrix(2, 2, g);
  const auto b = random_matrix(2, 2, g);
  const auto k = kron(a, b);
  ASSERT_EQ(k.rows(), 4u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t s = 0; s < 2; ++s) EXPECT_EQ(k(i * 2 + r, j * 2 + s), a(i, j) * b(r, s));
}

TEST(Kron, RectangularShapes) {
  auto g = test::rng(12);
  const auto k = kron(random_matrix(2, 3, g), random_matrix(1, 2, g));
  EXPECT_EQ(k.rows(), 2u);
  EXPECT_EQ(k.cols(), 6u);
}

TEST(Kron, AssociativeExactly) {
  auto g = test::rng(13);
  const auto a = random_matrix(2, 2, g), b = random_matrix(2, 2, g), c = random_matrix(2, 2, g);
  const ComplexMatrix fs[] = {a, b, c};
  const auto left = kron(kron(a, b), c);
  EXPECT_EQ(kron(fs), left);
  EXPECT_TRUE(near(kron(a, kron(b, c)), left, 1e-14));
}

TEST(PartialTrace, ProductState) {
  auto g = test::rng(21);
  const auto rho = random_density_matrix({2}, g).matrix();
  const auto sigma = random_density_matrix({3}, g).matrix();
  const std::size_t dims[] = {2, 3}, keep[] = {0};
  EXPECT_TRUE(near(partial_trace(kron(rho, sigma), dims, keep), trace(sigma) * rho, 1e-14));
}

TEST(PartialTrace, MaximallyEntangledMarginal) {
  const std::size_t dims[] = {2, 2}, keep[] = {1};
  EXPECT_TRUE(near(partial_trace(max_entangled(2).matrix(), dims, keep), 0.5 * ComplexMatrix::identity(2), 1e-15));
}

TEST(PartialTrace, MatchesQuadrupleLoop) {
  auto g = test::rng(22);
  const auto rho = random_density_matrix({2, 2}, g).matrix();
  const std::size_t dims[] = {2, 2}, first[] = {0}, second[] = {1};
  const auto ra = partial_trace(rho, dims, first);
  const auto rb = partial_trace(rho, dims, second);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      cplx sa = 0.0, sb = 0.0;
      for (std::size_t k = 0; k < 2; ++k) {
        sa += rho(i * 2 + k, j * 2 + k);
        sb += rho(k * 2 + i, k * 2 + j);
      }
      EXPECT_NEAR(std::abs(ra(i, j) - sa), 0.0, 1e-15);
      EXPECT_NEAR(std::abs(rb(i, j) - sb), 0.0, 1e-15);
    }
}

TEST(PartialTrace, PreservesTrace) {
  auto g = test::rng(23);
  for (int t = 0; t < 20; ++t) {
    const auto rho = random_density_matrix({2, 3, 2}, g).matrix();
    const std::size_t dims[] = {2, 3, 2}, keep[] = {2, 0};
    EXPECT_NEAR(std::abs(trace(partial_trace(rho, dims, keep)) - trace(rho)), 0.0, 1e-12);
  }
}

TEST(PartialTrace, RejectsBadDims) {
  const std::size_t dims[] = {2, 3}, keep[] = {0};
  EXPECT_THROW(partial_trace(ComplexMatrix::identity(4), dims, keep), DimensionMismatch);
  const std::size_t ok_dims[] = {2, 2}, bad_keep[] = {5};
  EXPECT_THROW(partial_trace(ComplexMatrix::identity(4), ok_dims, bad_keep), DimensionMismatch);
}

TEST(PartialTranspose, OfProductIsProductOfTranspose) {
  auto g = test::rng(24);
  const auto a = random_matrix(2, 2, g), b = random_matrix(3, 3, g);
  const std::size_t dims[] = {2, 3}, second[] = {1};
  EXPECT_EQ(partial_transpose(kron(a, b), dims, second), kron(a, transpose(b)));
}

TEST(Eigh, Identity) {
  for (double v : eigenvalues(ComplexMatrix::identity(4))) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Eigh, PauliChshOperator) {
  const auto z = pauli::Z(), x = pauli::X();
  const auto op = kron(z, z + x) + kron(x, z - x);
  EXPECT_NEAR(max_eigenvalue(op), 2.0 * std::sqrt(2.0), 1e-9);
}

TEST(Eigh, TrineChshOperator) {
  const auto t = trine();
  const auto a0 = observable(t, 0), a1 = observable(t, 1);
  const auto op = kron(a0, a0 + a1) + kron(a1, a0 - a1);
  EXPECT_NEAR(max_eigenvalue(op), std::sqrt(7.0), 1e-9);
}

TEST(Eigh, SortedDescendingAndOrthonormal) {
  auto g = test::rng(31);
  const auto a = random_hermitian(6, g);
  const auto ed = eigh(a);
  for (std::size_t i = 1; i < ed.values.size(); ++i) EXPECT_GE(ed.values[i - 1], ed.values[i]);
  EXPECT_TRUE(near(adjoint(ed.vectors) * ed.vectors, ComplexMatrix::identity(6), 1e-12));
}

TEST(Eigh, RejectsNonHermitian) {
  const ComplexMatrix a{{0.0, 1.0}, {0.0, 0.0}};
  EXPECT_THROW(eigh(a), DomainError);
  EXPECT_THROW(eigh(ComplexMatrix::zeros(2, 3)), DimensionMismatch);
}

TEST(Eigh, DegenerateSpectrum) {
  const double d[] = {2, 2, -1, -1};
  auto g = test::rng(32);
  // Conjugate by a random unitary (eigenvectors of a random Hermitian matrix).
  const auto u = eigh(random_hermitian(4, g)).vectors;
  const auto a = hermitian_part(u * ComplexMatrix::diagonal(d) * adjoint(u));
  const auto v = eigenvalues(a);
  EXPECT_NEAR(v[0], 2.0, 1e-12);
  EXPECT_NEAR(v[1], 2.0, 1e-12);
  EXPECT_NEAR(v[2], -1.0, 1e-12);
  EXPECT_NEAR(v[3], -1.0, 1e-12);
}

TEST(IsPsd, Examples) {
  EXPECT_TRUE(is_psd(ComplexMatrix::identity(2), 1e-9));
  EXPECT_FALSE(is_psd(pauli::Z(), 1e-9));
  auto g = test::rng(41);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_matrix(4, 4, g);
    EXPECT_TRUE(is_psd(hermitian_part(a * adjoint(a)), 1e-9));
  }
}

TEST(ProjectPsd, ClipsNegativeEigenvalues) {
  auto g = test::rng(42);
  const auto a = random_hermitian(4, g);
  const auto p = project_psd(a);
  EXPECT_GE(min_eigenvalue(p), -1e-12);
  EXPECT_TRUE(is_psd(p));
  // Idempotent on PSD input.
  EXPECT_TRUE(near(project_psd(p), p, 1e-12));
}

TEST(Matrix, ConstructorChecksSize) {
  EXPECT_THROW(ComplexMatrix(2, 2, std::vector<cplx>(3)), DimensionMismatch);
  EXPECT_THROW(ComplexMatrix::identity(2) + ComplexMatrix::identity(3), DimensionMismatch);
  EXPECT_THROW(ComplexMatrix::zeros(2, 3) * ComplexMatrix::zeros(2, 3), DimensionMismatch);
}
