#pragma once

// Dense phase-1 primal simplex with Bland's anti-cycling rule.
//
// Solves   min 1^T s   s.t.  A w + s = b,  w >= 0, s >= 0
// after flipping rows so that b >= 0. The optimum is zero iff {A w = b, w >= 0}
// is feasible. At termination the multipliers y = c_B^T B^{-1} satisfy
// y^T A_j <= 0 for every structural column and y^T b = objective, which is a
// Farkas certificate whenever the objective is positive.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qbjm/config.hpp"
#include "qbjm/errors.hpp"

namespace qbjm {

struct PhaseOneResult {
  double objective = 0.0;
  std::vector<double> primal;  // w, size n
  std::vector<double> duals;   // y, size m, in the sign convention of the unflipped rows
  std::size_t pivots = 0;
};

// `a` is row-major m x n.
inline PhaseOneResult phase_one(std::span<const double> a, std::size_t m, std::size_t n, std::span<const double> b,
                                double pivot_tol = kTolerances.lp_pivot) {
  if (a.size() != m * n || b.size() != m) throw DimensionMismatch("phase_one: shape mismatch");

  // Tableau columns: n structural, m artificial, 1 right-hand side.
  const std::size_t width = n + m + 1;
  std::vector<double> t(m * width, 0.0);
  std::vector<double> sign(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    sign[i] = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[i * width + j] = sign[i] * a[i * n + j];
    t[i * width + n + i] = 1.0;
    t[i * width + n + m] = sign[i] * b[i];
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  // Reduced costs r_j = c_j - c_B^T B^{-1} A_j; last entry holds -objective.
  std::vector<double> r(width, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      if (j >= n && j < n + m) continue;
      r[j] -= t[i * width + j];
    }

  PhaseOneResult out;
  const std::size_t max_pivots = 50 * (m + n) + 1000;
  while (true) {
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j)
      if (r[j] < -pivot_tol) {
        enter = j;
        break;
      }
    if (enter == width) break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double piv = t[i * width + enter];
      if (piv <= pivot_tol) continue;
      const double ratio = t[i * width + n + m] / piv;
      if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    // The phase-1 objective is bounded below by zero, so an unbounded
    // direction can only arise from rounding.
    if (leave == m) throw NumericalFailure("phase_one: unbounded ray in a bounded problem");

    double* prow = &t[leave * width];
    const double inv = 1.0 / prow[enter];
    for (std::size_t j = 0; j < width; ++j) prow[j] *= inv;
    prow[enter] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      double* row = &t[i * width];
      const double f = row[enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) row[j] -= f * prow[j];
      row[enter] = 0.0;
      // Basic values are nonnegative; rounding below zero is snapped back.
      if (row[width - 1] < 0.0 && row[width - 1] > -1e-12) row[width - 1] = 0.0;
    }
    const double f = r[enter];
    for (std::size_t j = 0; j < width; ++j) r[j] -= f * prow[j];
    r[enter] = 0.0;
    basis[leave] = enter;

    if (++out.pivots > max_pivots)
      throw NumericalFailure("phase_one: pivot limit " + std::to_string(max_pivots) + " exceeded");
  }

  out.primal.assign(n, 0.0);
  out.objective = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = t[i * width + n + m];
    if (basis[i] < n)
      out.primal[basis[i]] = v;
    else
      out.objective += v;
  }
  out.duals.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.duals[i] = sign[i] * (1.0 - r[n + i]);
  return out;
}

}  // namespace qbjm
