#pragma once

// POVMs, assemblages, states, and the canonical measurement families.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qbjm/config.hpp"
#include "qbjm/errors.hpp"
#include "qbjm/linalg.hpp"

namespace qbjm {

namespace pauli {

inline ComplexMatrix I() { return ComplexMatrix::identity(2); }
inline ComplexMatrix X() { return {{0.0, 1.0}, {1.0, 0.0}}; }
inline ComplexMatrix Y() { return {{0.0, cplx{0.0, -1.0}}, {cplx{0.0, 1.0}, 0.0}}; }
inline ComplexMatrix Z() { return {{1.0, 0.0}, {0.0, -1.0}}; }

// (I + n.sigma)/2 for a Bloch vector n.
inline ComplexMatrix bloch_projector(double nx, double ny, double nz) {
  return 0.5 * (I() + nx * X() + ny * Y() + nz * Z());
}

}  // namespace pauli

namespace detail {

inline void validate_povm(std::span<const ComplexMatrix> effects, std::size_t dim, const Tolerances& tol,
                          const std::string& where) {
  if (effects.empty()) throw InvariantViolation("povm-nonempty", where + ": no effects");
  ComplexMatrix sum = ComplexMatrix::zeros(dim, dim);
  for (std::size_t a = 0; a < effects.size(); ++a) {
    const auto& e = effects[a];
    if (e.rows() != dim || e.cols() != dim)
      throw DimensionMismatch(where + ": effect " + std::to_string(a) + " has wrong dimension");
    if (!is_hermitian(e, tol.hermitian))
      throw InvariantViolation("effect-hermitian", where + ": effect " + std::to_string(a));
    if (!is_psd(e, tol.psd))
      throw InvariantViolation("effect-psd", where + ": effect " + std::to_string(a) +
                                                 " min eigenvalue " + std::to_string(min_eigenvalue(e)));
    sum = sum + e;
  }
  const double dev = max_abs_diff(sum, ComplexMatrix::identity(dim));
  if (dev > tol.povm_sum)
    throw InvariantViolation("effects-sum-to-identity", where + ": deviation " + std::to_string(dev));
}

}  // namespace detail

class POVM {
 public:
  POVM(std::size_t dim, std::vector<ComplexMatrix> effects, const Tolerances& tol = kTolerances)
      : dim_(dim), effects_(std::move(effects)) {
    detail::validate_povm(effects_, dim_, tol, "POVM");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t outcomes() const noexcept { return effects_.size(); }
  const ComplexMatrix& effect(std::size_t a) const { return effects_.at(a); }
  std::span<const ComplexMatrix> effects() const noexcept { return effects_; }

 private:
  std::size_t dim_;
  std::vector<ComplexMatrix> effects_;
};

// A family {M_{a|x}} with a uniform number of outcomes per input. Effects are
// stored x-major: index x * n_a + a.
class Assemblage {
 public:
  Assemblage(std::size_t dim, std::size_t n_x, std::size_t n_a, std::vector<ComplexMatrix> effects,
             const Tolerances& tol = kTolerances)
      : dim_(dim), n_x_(n_x), n_a_(n_a), effects_(std::move(effects)) {
    if (dim_ == 0 || n_x_ == 0 || n_a_ == 0)
      throw InvariantViolation("assemblage-shape", "dim, n_x and n_a must be positive");
    if (effects_.size() != n_x_ * n_a_)
      throw InvariantViolation("assemblage-shape", "expected " + std::to_string(n_x_ * n_a_) +
                                                       " effects, got " + std::to_string(effects_.size()));
    for (std::size_t x = 0; x < n_x_; ++x)
      detail::validate_povm(std::span(effects_).subspan(x * n_a_, n_a_), dim_, tol,
                            "assemblage input " + std::to_string(x));
  }

  // Pads inputs with fewer outcomes by zero effects.
  static Assemblage from_ragged(std::size_t dim, const std::vector<std::vector<ComplexMatrix>>& povms,
                                const Tolerances& tol = kTolerances) {
    std::size_t n_a = 0;
    for (const auto& p : povms) n_a = std::max(n_a, p.size());
    std::vector<ComplexMatrix> effects;
    for (const auto& p : povms) {
      effects.insert(effects.end(), p.begin(), p.end());
      for (std::size_t a = p.size(); a < n_a; ++a) effects.push_back(ComplexMatrix::zeros(dim, dim));
    }
    return {dim, povms.size(), n_a, std::move(effects), tol};
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_x() const noexcept { return n_x_; }
  std::size_t n_a() const noexcept { return n_a_; }
  const ComplexMatrix& effect(std::size_t x, std::size_t a) const { return effects_.at(x * n_a_ + a); }
  std::span<const ComplexMatrix> effects() const noexcept { return effects_; }

  POVM povm(std::size_t x) const {
    return {dim_, std::vector<ComplexMatrix>(effects_.begin() + x * n_a_, effects_.begin() + (x + 1) * n_a_)};
  }

 private:
  std::size_t dim_, n_x_, n_a_;
  std::vector<ComplexMatrix> effects_;
};

class DensityMatrix {
 public:
  DensityMatrix(std::vector<std::size_t> dims, ComplexMatrix matrix, const Tolerances& tol = kTolerances)
      : dims_(std::move(dims)), matrix_(std::move(matrix)) {
    if (dims_.empty()) throw InvariantViolation("state-dims", "no local dimensions");
    if (!matrix_.is_square() || detail::product(dims_) != matrix_.rows())
      throw DimensionMismatch("DensityMatrix: dims do not match matrix size");
    if (!is_hermitian(matrix_, tol.hermitian))
      throw InvariantViolation("state-hermitian", "defect " + std::to_string(hermiticity_defect(matrix_)));
    const double tr_dev = std::abs(trace(matrix_) - 1.0);
    if (tr_dev > tol.trace) throw InvariantViolation("state-unit-trace", "deviation " + std::to_string(tr_dev));
    if (!is_psd(matrix_, tol.psd))
      throw InvariantViolation("state-psd", "min eigenvalue " + std::to_string(min_eigenvalue(matrix_)));
  }

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t parties() const noexcept { return dims_.size(); }
  std::size_t dim() const noexcept { return matrix_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }

 private:
  std::vector<std::size_t> dims_;
  ComplexMatrix matrix_;
};

// eta A + (1 - eta) Tr(A) I/d. Self-adjoint for the trace inner product.
inline ComplexMatrix depolarize_effect(const ComplexMatrix& a, double eta) {
  const std::size_t d = a.rows();
  const cplx t = trace(a);
  return eta * a + ((1.0 - eta) * t / static_cast<double>(d)) * ComplexMatrix::identity(d);
}

inline Assemblage depolarize(const Assemblage& m, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("depolarize: eta outside [0,1]");
  std::vector<ComplexMatrix> effects;
  effects.reserve(m.effects().size());
  for (const auto& e : m.effects()) effects.push_back(depolarize_effect(e, eta));
  return {m.dim(), m.n_x(), m.n_a(), std::move(effects)};
}

// Effects of Z and X eigenbases: |0><0|, |1><1|, |+><+|, |-><-|.
inline Assemblage pauli_pair() {
  return {2, 2, 2,
          {pauli::bloch_projector(0, 0, 1), pauli::bloch_projector(0, 0, -1), pauli::bloch_projector(1, 0, 0),
           pauli::bloch_projector(-1, 0, 0)}};
}

// Bloch vector of trine input x: cos(2 pi x/3) X + sin(2 pi x/3) Z.
inline std::array<double, 3> trine_direction(std::size_t x) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(x) / 3.0;
  return {std::cos(angle), 0.0, std::sin(angle)};
}

inline Assemblage trine() {
  std::vector<ComplexMatrix> effects;
  for (std::size_t x = 0; x < 3; ++x) {
    const auto v = trine_direction(x);
    effects.push_back(pauli::bloch_projector(v[0], v[1], v[2]));
    effects.push_back(pauli::bloch_projector(-v[0], -v[1], -v[2]));
  }
  return {2, 3, 2, std::move(effects)};
}

inline Assemblage restrict_inputs(const Assemblage& m, std::span<const std::size_t> inputs) {
  std::vector<ComplexMatrix> effects;
  for (auto x : inputs) {
    if (x >= m.n_x()) throw DomainError("restrict_inputs: input out of range");
    for (std::size_t a = 0; a < m.n_a(); ++a) effects.push_back(m.effect(x, a));
  }
  return {m.dim(), inputs.size(), m.n_a(), std::move(effects)};
}

inline ComplexMatrix observable(const POVM& p) {
  if (p.outcomes() != 2) throw DomainError("observable: POVM must have exactly two outcomes");
  return p.effect(0) - p.effect(1);
}

inline ComplexMatrix observable(const Assemblage& m, std::size_t x) { return observable(m.povm(x)); }

// (|+y+y+y> + |-y-y-y>)/sqrt(2) with |+-y> = (|0> +- i|1>)/sqrt(2).
inline DensityMatrix ghz_y() {
  const double r = 1.0 / std::sqrt(2.0);
  const std::array<cplx, 2> plus{r, cplx{0.0, r}};
  const std::array<cplx, 2> minus{r, cplx{0.0, -r}};
  std::vector<cplx> psi(8);
  for (std::size_t i = 0; i < 8; ++i) {
    const std::size_t b0 = (i >> 2) & 1, b1 = (i >> 1) & 1, b2 = i & 1;
    psi[i] = r * (plus[b0] * plus[b1] * plus[b2] + minus[b0] * minus[b1] * minus[b2]);
  }
  return {{2, 2, 2}, ComplexMatrix::projector(psi)};
}

// Unit-trace projector onto sum_i |ii>/sqrt(d).
inline DensityMatrix max_entangled(std::size_t d) {
  if (d < 2) throw DomainError("max_entangled: d must be >= 2");
  std::vector<cplx> psi(d * d, cplx{0.0, 0.0});
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) psi[i * d + i] = amp;
  return {{d, d}, ComplexMatrix::projector(psi)};
}

inline DensityMatrix product_state(std::span<const DensityMatrix> parts) {
  std::vector<std::size_t> dims;
  ComplexMatrix m = ComplexMatrix::identity(1);
  for (const auto& p : parts) {
    dims.insert(dims.end(), p.dims().begin(), p.dims().end());
    m = kron(m, p.matrix());
  }
  return {std::move(dims), std::move(m)};
}

inline DensityMatrix pure_state(std::vector<std::size_t> dims, std::span<const cplx> psi) {
  double n2 = 0.0;
  for (auto c : psi) n2 += std::norm(c);
  std::vector<cplx> unit(psi.begin(), psi.end());
  for (auto& c : unit) c /= std::sqrt(n2);
  return {std::move(dims), ComplexMatrix::projector(unit)};
}

// Hilbert-Schmidt random state: G G^dagger / Tr(G G^dagger) with Ginibre G.
template <class Rng>
DensityMatrix random_density_matrix(std::vector<std::size_t> dims, Rng& rng) {
  const std::size_t d = detail::product(dims);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cplx> g(d * d);
  for (auto& v : g) v = {normal(rng), normal(rng)};
  const ComplexMatrix gm(d, d, std::move(g));
  ComplexMatrix w = gm * adjoint(gm);
  w = (1.0 / trace(w).real()) * w;
  // Symmetrize away rounding so the Hermiticity check sees an exact adjoint pair.
  w = 0.5 * (w + adjoint(w));
  return {std::move(dims), std::move(w)};
}

template <class Rng>
DensityMatrix random_pure_state(std::vector<std::size_t> dims, Rng& rng) {
  const std::size_t d = detail::product(dims);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cplx> psi(d);
  for (auto& v : psi) v = {normal(rng), normal(rng)};
  return pure_state(std::move(dims), psi);
}

template <class Rng>
ComplexMatrix random_hermitian(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cplx> g(d * d);
  for (auto& v : g) v = {normal(rng), normal(rng)};
  const ComplexMatrix gm(d, d, std::move(g));
  return 0.5 * (gm + adjoint(gm));
}

// Random dichotomic qubit measurement {(I + r n.sigma)/2, (I - r n.sigma)/2}
// with sharpness r in [0,1].
template <class Rng>
std::vector<ComplexMatrix> random_qubit_dichotomic(Rng& rng, double sharpness = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double v[3] = {normal(rng), normal(rng), normal(rng)};
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  for (auto& c : v) c *= sharpness / n;
  return {pauli::bloch_projector(v[0], v[1], v[2]), pauli::bloch_projector(-v[0], -v[1], -v[2])};
}

}  // namespace qbjm
