#pragma once

#include <cstddef>

namespace qbjm {

// Numerical tolerances shared by every module. Each operation takes its
// default from kTolerances; callers may pass an overridden copy.
struct Tolerances {
  double hermitian = 1e-12;       // max |A - A^dagger| entrywise
  double psd = 1e-9;              // min eigenvalue >= -psd
  double povm_sum = 1e-9;         // effects sum to identity
  double trace = 1e-9;            // unit trace of states
  double jacobi_offdiag = 1e-14;  // relative off-diagonal Frobenius mass
  std::size_t jacobi_max_sweeps = 100;

  double cert_psd = 1e-8;         // parent POVM effects
  double cert_eq = 1e-8;          // parent marginals and normalization
  double dykstra_residual = 1e-9;
  std::size_t dykstra_budget = 50000;

  double behavior_nonneg = 1e-10;
  double behavior_norm = 1e-9;
  double no_signaling = 1e-9;
  double primal_weight = 1e-10;
  double primal_sum = 1e-9;
  double primal_reconstruct = 1e-8;
  double dual_margin = 1e-9;
  double lp_pivot = 1e-9;
  double lp_local_objective = 1e-9;
  std::size_t vertex_cap = 100000;

  double eig_threshold = 1e-6;    // bisection half-width in eta
  double lp_threshold = 1e-4;
};

inline constexpr Tolerances kTolerances{};

}  // namespace qbjm
