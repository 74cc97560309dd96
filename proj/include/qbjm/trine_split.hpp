#pragma once

// Convex splitting of a noisy trine into the noiseless trine and the trine at
// the joint-measurability threshold 2/3:
//   T^{eta*} = p T + (1 - p) T^{2/3},   p = (eta* - 2/3) / (1 - 2/3).
// In a tripartite expansion only the p^3 term can carry nonlocality.

#include <cstddef>

#include "qbjm/errors.hpp"
#include "qbjm/linalg.hpp"
#include "qbjm/quantum.hpp"

namespace qbjm {

inline constexpr double kTrineJMVisibility = 2.0 / 3.0;

struct TrineSplit {
  double eta_star = 0.0;
  double p = 0.0;
  Assemblage noiseless;
  Assemblage compatible_part;  // depolarize(trine, 2/3)
  double residual = 0.0;       // max entry of |p T + (1-p) T^{2/3} - T^{eta*}|
};

inline double split_residual(double eta_star, double p, const Assemblage& noiseless, const Assemblage& compatible) {
  const Assemblage target = depolarize(noiseless, eta_star);
  double worst = 0.0;
  for (std::size_t x = 0; x < noiseless.n_x(); ++x)
    for (std::size_t a = 0; a < noiseless.n_a(); ++a) {
      const ComplexMatrix mix = p * noiseless.effect(x, a) + (1.0 - p) * compatible.effect(x, a);
      worst = std::max(worst, max_abs_diff(mix, target.effect(x, a)));
    }
  return worst;
}

inline TrineSplit split_trine(double eta_star) {
  if (!(eta_star >= kTrineJMVisibility && eta_star <= 1.0))
    throw DomainError("split_trine: eta_star must lie in [2/3, 1]");
  const double p = (eta_star - kTrineJMVisibility) / (1.0 - kTrineJMVisibility);
  TrineSplit out{eta_star, p, trine(), depolarize(trine(), kTrineJMVisibility), 0.0};
  out.residual = split_residual(eta_star, p, out.noiseless, out.compatible_part);
  if (out.residual > 1e-12)
    throw NumericalFailure("split_trine: operator identity residual " + std::to_string(out.residual));
  return out;
}

// Weight of the only term in the tripartite expansion that is not manifestly local.
inline double tripartite_weight(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("tripartite_weight: p outside [0,1]");
  return p * p * p;
}

}  // namespace qbjm
