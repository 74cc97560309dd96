#pragma once

// Dense complex linear algebra for small operators (dimension up to 2^6).
//
// ComplexMatrix is an immutable value: every operation returns a fresh matrix.
// Storage is row-major. The Hermitian eigensolver is a cyclic complex Jacobi
// iteration, which is exact enough for threshold tests at the 1e-9 level and
// needs no external LAPACK.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbjm/config.hpp"
#include "qbjm/errors.hpp"

namespace qbjm {

using cplx = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionMismatch("ComplexMatrix: entries length " + std::to_string(data_.size()) +
                              " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionMismatch("ComplexMatrix: ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }

  static ComplexMatrix identity(std::size_t n) {
    std::vector<cplx> e(n * n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
    return {n, n, std::move(e)};
  }

  static ComplexMatrix diagonal(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<cplx> e(n * n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = values[i];
    return {n, n, std::move(e)};
  }

  // |psi><psi|
  static ComplexMatrix projector(std::span<const cplx> psi) {
    const std::size_t n = psi.size();
    std::vector<cplx> e(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e[i * n + j] = psi[i] * std::conj(psi[j]);
    return {n, n, std::move(e)};
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const cplx> entries() const noexcept { return data_; }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

namespace detail {

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch(std::string(what) + ": shape mismatch");
}

template <class F>
ComplexMatrix zip(const ComplexMatrix& a, const ComplexMatrix& b, F f) {
  std::vector<cplx> e(a.entries().size());
  auto ea = a.entries();
  auto eb = b.entries();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = f(ea[i], eb[i]);
  return {a.rows(), a.cols(), std::move(e)};
}

inline std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace detail

inline ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require_same_shape(a, b, "operator+");
  return detail::zip(a, b, std::plus<>());
}

inline ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require_same_shape(a, b, "operator-");
  return detail::zip(a, b, std::minus<>());
}

inline ComplexMatrix operator*(cplx s, const ComplexMatrix& a) {
  std::vector<cplx> e(a.entries().begin(), a.entries().end());
  for (auto& v : e) v *= s;
  return {a.rows(), a.cols(), std::move(e)};
}

inline ComplexMatrix operator*(double s, const ComplexMatrix& a) { return cplx{s, 0.0} * a; }

inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
  const std::size_t n = a.rows(), m = b.cols(), k = a.cols();
  std::vector<cplx> e(n * m, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      const cplx ail = a(i, l);
      if (ail == cplx{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < m; ++j) e[i * m + j] += ail * b(l, j);
    }
  return {n, m, std::move(e)};
}

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
  std::vector<cplx> e(a.rows() * a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e[j * a.rows() + i] = std::conj(a(i, j));
  return {a.cols(), a.rows(), std::move(e)};
}

inline ComplexMatrix transpose(const ComplexMatrix& a) {
  std::vector<cplx> e(a.rows() * a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e[j * a.rows() + i] = a(i, j);
  return {a.cols(), a.rows(), std::move(e)};
}

inline cplx trace(const ComplexMatrix& a) {
  if (!a.is_square()) throw DimensionMismatch("trace: matrix not square");
  cplx t{0.0, 0.0};
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

// Tr(A B) without forming the product.
inline cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) throw DimensionMismatch("trace_product");
  cplx t{0.0, 0.0};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t += a(i, j) * b(j, i);
  return t;
}

inline double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& v : a.entries()) s += std::norm(v);
  return std::sqrt(s);
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t rb = b.rows(), cb = b.cols();
  const std::size_t rows = a.rows() * rb, cols = a.cols() * cb;
  std::vector<cplx> e(rows * cols);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      for (std::size_t k = 0; k < rb; ++k)
        for (std::size_t l = 0; l < cb; ++l) e[(i * rb + k) * cols + (j * cb + l)] = aij * b(k, l);
    }
  return {rows, cols, std::move(e)};
}

inline ComplexMatrix kron(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return ComplexMatrix::identity(1);
  ComplexMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

namespace detail {

// Splits a flat index into digits over `dims`, first factor most significant.
inline void split_index(std::size_t index, std::span<const std::size_t> dims,
                        std::span<std::size_t> digits) {
  for (std::size_t n = dims.size(); n-- > 0;) {
    digits[n] = index % dims[n];
    index /= dims[n];
  }
}

inline void check_factors(const ComplexMatrix& rho, std::span<const std::size_t> dims,
                          const char* what) {
  if (!rho.is_square() || detail::product(dims) != rho.rows())
    throw DimensionMismatch(std::string(what) + ": product of local dims != matrix dimension");
  for (auto d : dims)
    if (d == 0) throw DimensionMismatch(std::string(what) + ": zero local dimension");
}

}  // namespace detail

// Reduced operator on the factors listed in `keep` (order of `keep` is ignored;
// kept factors appear in their original order).
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const std::size_t> local_dims,
                                   std::span<const std::size_t> keep) {
  detail::check_factors(rho, local_dims, "partial_trace");
  const std::size_t n = local_dims.size();
  std::vector<bool> kept(n, false);
  for (auto k : keep) {
    if (k >= n) throw DimensionMismatch("partial_trace: keep index out of range");
    kept[k] = true;
  }
  std::vector<std::size_t> kept_dims;
  for (std::size_t i = 0; i < n; ++i)
    if (kept[i]) kept_dims.push_back(local_dims[i]);
  const std::size_t out_dim = detail::product(kept_dims);

  std::vector<cplx> e(out_dim * out_dim, cplx{0.0, 0.0});
  std::vector<std::size_t> di(n), dj(n);
  const std::size_t dim = rho.rows();
  for (std::size_t i = 0; i < dim; ++i) {
    detail::split_index(i, local_dims, di);
    for (std::size_t j = 0; j < dim; ++j) {
      detail::split_index(j, local_dims, dj);
      bool diagonal_in_traced = true;
      std::size_t ri = 0, rj = 0;
      for (std::size_t f = 0; f < n; ++f) {
        if (kept[f]) {
          ri = ri * local_dims[f] + di[f];
          rj = rj * local_dims[f] + dj[f];
        } else if (di[f] != dj[f]) {
          diagonal_in_traced = false;
          break;
        }
      }
      if (diagonal_in_traced) e[ri * out_dim + rj] += rho(i, j);
    }
  }
  return {out_dim, out_dim, std::move(e)};
}

// Transposes the factors listed in `parties`.
inline ComplexMatrix partial_transpose(const ComplexMatrix& rho, std::span<const std::size_t> local_dims,
                                       std::span<const std::size_t> parties) {
  detail::check_factors(rho, local_dims, "partial_transpose");
  const std::size_t n = local_dims.size();
  std::vector<bool> flip(n, false);
  for (auto p : parties) {
    if (p >= n) throw DimensionMismatch("partial_transpose: party out of range");
    flip[p] = true;
  }
  const std::size_t dim = rho.rows();
  std::vector<cplx> e(dim * dim);
  std::vector<std::size_t> di(n), dj(n);
  for (std::size_t i = 0; i < dim; ++i) {
    detail::split_index(i, local_dims, di);
    for (std::size_t j = 0; j < dim; ++j) {
      detail::split_index(j, local_dims, dj);
      std::size_t ti = 0, tj = 0;
      for (std::size_t f = 0; f < n; ++f) {
        const bool s = flip[f];
        ti = ti * local_dims[f] + (s ? dj[f] : di[f]);
        tj = tj * local_dims[f] + (s ? di[f] : dj[f]);
      }
      e[ti * dim + tj] = rho(i, j);
    }
  }
  return {dim, dim, std::move(e)};
}

inline double hermiticity_defect(const ComplexMatrix& a) {
  if (!a.is_square()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + adjoint(a)); }

inline bool is_hermitian(const ComplexMatrix& a, double tol = kTolerances.hermitian) {
  return hermiticity_defect(a) <= tol;
}

struct EigenDecomposition {
  std::vector<double> values;  // descending
  ComplexMatrix vectors;       // column i pairs with values[i]

  std::vector<cplx> vector(std::size_t i) const {
    std::vector<cplx> v(vectors.rows());
    for (std::size_t r = 0; r < v.size(); ++r) v[r] = vectors(r, i);
    return v;
  }
};

// Cyclic Jacobi for Hermitian matrices. Each rotation zeroes one off-diagonal
// pair through J = [[c, s e^{i phi}], [-s e^{-i phi}, c]]; sweeps continue until
// the off-diagonal Frobenius mass is <= jacobi_offdiag * ||A||_F.
inline EigenDecomposition eigh(const ComplexMatrix& a_in, const Tolerances& tol = kTolerances) {
  if (!a_in.is_square()) throw DimensionMismatch("eigh: matrix not square");
  if (!is_hermitian(a_in, tol.hermitian))
    throw DomainError("eigh: input is not Hermitian (defect " +
                      std::to_string(hermiticity_defect(a_in)) + ")");
  const std::size_t n = a_in.rows();

  std::vector<cplx> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 0.5 * (a_in(i, j) + std::conj(a_in(j, i)));
  std::vector<cplx> v(n * n, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double norm = frobenius_norm(a_in);
  const double target = tol.jacobi_offdiag * norm;
  auto off_mass = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a[i * n + j]);
    return std::sqrt(s);
  };

  std::size_t sweep = 0;
  for (; sweep < tol.jacobi_max_sweeps && off_mass() > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a[p * n + q];
        const double g = std::abs(apq);
        if (g == 0.0) continue;
        const cplx phase = apq / g;
        const double tau = (a[q * n + q].real() - a[p * n + p].real()) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx jpq = s * phase;
        const cplx jqp = -s * std::conj(phase);

        for (std::size_t k = 0; k < n; ++k) {  // A <- A J
          const cplx akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = akp * c + akq * jqp;
          a[k * n + q] = akp * jpq + akq * c;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- J^dagger A
          const cplx apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk + std::conj(jqp) * aqk;
          a[q * n + k] = std::conj(jpq) * apk + c * aqk;
        }
        a[p * n + q] = a[q * n + p] = 0.0;
        a[p * n + p] = a[p * n + p].real();
        a[q * n + q] = a[q * n + q].real();
        for (std::size_t k = 0; k < n; ++k) {  // V <- V J
          const cplx vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = vkp * c + vkq * jqp;
          v[k * n + q] = vkp * jpq + vkq * c;
        }
      }
    }
  }
  if (off_mass() > target)
    throw NumericalFailure("eigh: Jacobi did not converge in " + std::to_string(sweep) + " sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i * n + i].real() > a[j * n + j].real();
  });
  EigenDecomposition out;
  out.values.resize(n);
  std::vector<cplx> cols(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a[order[k] * n + order[k]].real();
    for (std::size_t r = 0; r < n; ++r) cols[r * n + k] = v[r * n + order[k]];
  }
  out.vectors = ComplexMatrix(n, n, std::move(cols));
  return out;
}

inline std::vector<double> eigenvalues(const ComplexMatrix& a, const Tolerances& tol = kTolerances) {
  return eigh(a, tol).values;
}

inline double max_eigenvalue(const ComplexMatrix& a) { return eigh(a).values.front(); }
inline double min_eigenvalue(const ComplexMatrix& a) { return eigh(a).values.back(); }

inline bool is_psd(const ComplexMatrix& a, double tol = kTolerances.psd) {
  return min_eigenvalue(a) >= -tol;
}

// V diag(f(lambda)) V^dagger.
template <class F>
ComplexMatrix spectral_map(const EigenDecomposition& ed, F f) {
  const std::size_t n = ed.values.size();
  std::vector<cplx> e(n * n, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const double w = f(ed.values[k]);
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = w * ed.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) e[i * n + j] += vik * std::conj(ed.vectors(j, k));
    }
  }
  return {n, n, std::move(e)};
}

// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped to zero).
inline ComplexMatrix project_psd(const ComplexMatrix& a) {
  return spectral_map(eigh(a), [](double l) { return l > 0.0 ? l : 0.0; });
}

}  // namespace qbjm
