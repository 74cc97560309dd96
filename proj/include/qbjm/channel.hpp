#pragma once

// Qubit linear maps, Choi matrices, and the two-qubit separability tests.
//
// Conventions: a QubitMap acts on vec(X) with vec(X)[2i + j] = X_ij (matrix
// units, row-major). The Choi matrix is (Phi (x) id)(|phi+><phi+|) with
// |phi+> = (|00> + |11>)/sqrt(2), i.e. J = (1/2) sum_ij Phi(E_ij) (x) E_ij,
// so Tr J = 1 for trace-preserving maps.
//
// Depolarizing reference: Phi_eta(X) = eta X + (1 - eta) Tr(X) I/2 has
// J = eta |phi+><phi+| + (1 - eta) I/4, eigenvalues (1 + 3 eta)/4 once and
// (1 - eta)/4 three times. Its partial transpose is eta F/2 + (1 - eta) I/4 with
// F the swap, so the smallest eigenvalue is (1 - 3 eta)/4: entanglement
// breaking exactly for eta <= 1/3.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "qbjm/config.hpp"
#include "qbjm/errors.hpp"
#include "qbjm/linalg.hpp"
#include "qbjm/quantum.hpp"

namespace qbjm {

class QubitMap {
 public:
  explicit QubitMap(ComplexMatrix action) : action_(std::move(action)) {
    if (action_.rows() != 4 || action_.cols() != 4) throw DimensionMismatch("QubitMap: action must be 4x4");
  }

  const ComplexMatrix& action() const noexcept { return action_; }

  ComplexMatrix apply(const ComplexMatrix& x) const {
    if (x.rows() != 2 || x.cols() != 2) throw DimensionMismatch("QubitMap::apply: input must be 2x2");
    const ComplexMatrix v(4, 1, std::vector<cplx>(x.entries().begin(), x.entries().end()));
    const ComplexMatrix out = action_ * v;
    return {2, 2, std::vector<cplx>(out.entries().begin(), out.entries().end())};
  }

 private:
  ComplexMatrix action_;
};

inline ComplexMatrix matrix_unit(std::size_t i, std::size_t j) {
  std::vector<cplx> e(4, cplx{0.0, 0.0});
  e[i * 2 + j] = 1.0;
  return {2, 2, std::move(e)};
}

// Builds the action matrix column by column from images of matrix units.
template <class F>
QubitMap map_from_function(F f) {
  std::vector<cplx> a(16);
  for (std::size_t col = 0; col < 4; ++col) {
    const ComplexMatrix image = f(matrix_unit(col / 2, col % 2));
    for (std::size_t row = 0; row < 4; ++row) a[row * 4 + col] = image.entries()[row];
  }
  return QubitMap(ComplexMatrix(4, 4, std::move(a)));
}

inline QubitMap identity_map() { return QubitMap(ComplexMatrix::identity(4)); }

inline QubitMap transpose_map() {
  return map_from_function([](const ComplexMatrix& x) { return transpose(x); });
}

inline QubitMap depolarizing_map(double eta) {
  return map_from_function([eta](const ComplexMatrix& x) { return depolarize_effect(x, eta); });
}

inline QubitMap kraus_map(std::span<const ComplexMatrix> kraus) {
  return map_from_function([&](const ComplexMatrix& x) {
    ComplexMatrix out = ComplexMatrix::zeros(2, 2);
    for (const auto& k : kraus) out = out + k * x * adjoint(k);
    return out;
  });
}

// Convex (or arbitrary linear) combination of maps.
inline QubitMap combine(double wa, const QubitMap& a, double wb, const QubitMap& b) {
  return QubitMap(wa * a.action() + wb * b.action());
}

// Images of the Hermitian basis E_ii, E_ij + E_ji, i(E_ij - E_ji) must be Hermitian.
inline bool is_hermiticity_preserving(const QubitMap& phi, double tol = 1e-10) {
  std::vector<ComplexMatrix> basis{matrix_unit(0, 0), matrix_unit(1, 1)};
  basis.push_back(matrix_unit(0, 1) + matrix_unit(1, 0));
  basis.push_back(cplx{0.0, 1.0} * (matrix_unit(0, 1) - matrix_unit(1, 0)));
  for (const auto& h : basis)
    if (!is_hermitian(phi.apply(h), tol)) return false;
  return true;
}

inline bool is_trace_preserving(const QubitMap& phi, double tol = kTolerances.psd) {
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const cplx expected = i == j ? 1.0 : 0.0;
      if (std::abs(trace(phi.apply(matrix_unit(i, j))) - expected) > tol) return false;
    }
  return true;
}

// Unit-trace Choi matrix (1/2) sum_ij Phi(E_ij) (x) E_ij.
inline ComplexMatrix choi(const QubitMap& phi) {
  if (!is_hermiticity_preserving(phi)) throw DomainError("choi: map is not Hermiticity-preserving");
  ComplexMatrix j = ComplexMatrix::zeros(4, 4);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) j = j + 0.5 * kron(phi.apply(matrix_unit(a, b)), matrix_unit(a, b));
  return hermitian_part(j);
}

inline bool is_completely_positive(const QubitMap& phi, double tol = kTolerances.psd) {
  return is_psd(choi(phi), tol);
}

inline bool is_ppt(const DensityMatrix& rho, double tol = kTolerances.psd) {
  if (rho.dims() != std::vector<std::size_t>{2, 2}) throw DimensionMismatch("is_ppt: expects a 2x2 state");
  const std::size_t dims[] = {2, 2};
  const std::size_t second[] = {1};
  return is_psd(hermitian_part(partial_transpose(rho.matrix(), dims, second)), tol);
}

inline bool is_entanglement_breaking(const QubitMap& phi, double tol = kTolerances.psd) {
  if (!is_trace_preserving(phi, tol) || !is_completely_positive(phi, tol))
    throw DomainError("is_entanglement_breaking: map is not CPTP");
  return is_ppt(DensityMatrix({2, 2}, choi(phi)), tol);
}

// Bisection for the largest eta at which the depolarizing channel is still
// entanglement breaking.
inline double depolarizing_eb_boundary(double tolerance = 1e-9) {
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (is_entanglement_breaking(depolarizing_map(mid)) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Necessary-condition screen for local entanglement annihilation: applies
// Phi (x) Phi to `samples` random two-qubit states and checks that every
// output is PPT. A false result is a counterexample; true proves nothing.
template <class Rng>
bool annihilation_screen(const QubitMap& phi, std::size_t samples, Rng& rng, double tol = kTolerances.psd) {
  for (std::size_t s = 0; s < samples; ++s) {
    const DensityMatrix rho = random_density_matrix({2, 2}, rng);
    ComplexMatrix out = ComplexMatrix::zeros(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const cplx c = rho.matrix()(i, j);
        if (c == cplx{0.0, 0.0}) continue;
        const ComplexMatrix left = phi.apply(matrix_unit(i / 2, j / 2));
        const ComplexMatrix right = phi.apply(matrix_unit(i % 2, j % 2));
        out = out + c * kron(left, right);
      }
    const std::size_t dims[] = {2, 2};
    const std::size_t second[] = {1};
    if (!is_psd(hermitian_part(partial_transpose(out, dims, second)), tol)) return false;
  }
  return true;
}

}  // namespace qbjm
