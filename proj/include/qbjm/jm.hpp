#pragma once

// Joint measurability of finite assemblages.
//
// A parent POVM is indexed by deterministic assignments lambda: x -> a, so the
// marginal constraints sum_{lambda(x)=a} G_lambda = M_{a|x} are linear with 0/1
// coefficients. Feasibility is decided by Dykstra's alternating projections
// between that affine set and the product PSD cone. A returned certificate is
// always re-checked by verify_parent, so "found" is exact up to the stated
// tolerances while "not found" only means the sweep budget ran out.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbjm/config.hpp"
#include "qbjm/errors.hpp"
#include "qbjm/linalg.hpp"
#include "qbjm/quantum.hpp"

namespace qbjm {

struct JMCertificate {
  std::size_t n_x = 0;
  std::size_t n_a = 0;
  std::vector<std::vector<std::size_t>> assignments;  // assignments[lambda][x] = a
  std::vector<ComplexMatrix> parent;                  // parent[lambda]
};

struct RobustnessInterval {
  double eta_lo = 0.0;
  double eta_hi = 1.0;
  JMCertificate certificate;  // valid for depolarize(M, eta_lo)
  std::size_t probes = 0;
};

// Joint assignment table, first input most significant.
inline std::vector<std::vector<std::size_t>> deterministic_assignments(std::size_t n_x, std::size_t n_a) {
  std::size_t count = 1;
  for (std::size_t x = 0; x < n_x; ++x) count *= n_a;
  std::vector<std::vector<std::size_t>> out(count, std::vector<std::size_t>(n_x));
  for (std::size_t l = 0; l < count; ++l) {
    std::size_t rest = l;
    for (std::size_t x = n_x; x-- > 0;) {
      out[l][x] = rest % n_a;
      rest /= n_a;
    }
  }
  return out;
}

struct ParentCheck {
  bool ok = false;
  double min_eigenvalue = 0.0;
  double normalization_defect = 0.0;
  double marginal_defect = 0.0;
};

// Recomputes every certificate invariant from scratch.
inline ParentCheck check_parent(const Assemblage& m, const JMCertificate& cert,
                                const Tolerances& tol = kTolerances) {
  const auto expected = deterministic_assignments(m.n_x(), m.n_a());
  if (cert.n_x != m.n_x() || cert.n_a != m.n_a() || cert.parent.size() != expected.size() ||
      cert.assignments.size() != expected.size())
    throw DimensionMismatch("verify_parent: certificate shape does not match assemblage");
  for (const auto& g : cert.parent)
    if (g.rows() != m.dim() || g.cols() != m.dim())
      throw DimensionMismatch("verify_parent: parent effect dimension mismatch");
  for (const auto& row : cert.assignments)
    if (row.size() != m.n_x()) throw DimensionMismatch("verify_parent: assignment length mismatch");

  ParentCheck out;
  out.min_eigenvalue = INFINITY;
  ComplexMatrix total = ComplexMatrix::zeros(m.dim(), m.dim());
  for (const auto& g : cert.parent) {
    if (hermiticity_defect(g) > tol.cert_eq) {
      out.min_eigenvalue = -INFINITY;
      continue;
    }
    out.min_eigenvalue = std::min(out.min_eigenvalue, min_eigenvalue(g));
    total = total + g;
  }
  out.normalization_defect = max_abs_diff(total, ComplexMatrix::identity(m.dim()));
  for (std::size_t x = 0; x < m.n_x(); ++x)
    for (std::size_t a = 0; a < m.n_a(); ++a) {
      ComplexMatrix s = ComplexMatrix::zeros(m.dim(), m.dim());
      for (std::size_t l = 0; l < cert.parent.size(); ++l) {
        const auto lx = cert.assignments[l][x];
        if (lx >= m.n_a()) throw DimensionMismatch("verify_parent: assignment outcome out of range");
        if (lx == a) s = s + cert.parent[l];
      }
      out.marginal_defect = std::max(out.marginal_defect, max_abs_diff(s, m.effect(x, a)));
    }
  out.ok = out.min_eigenvalue >= -tol.cert_psd && out.normalization_defect <= tol.cert_eq &&
           out.marginal_defect <= tol.cert_eq;
  return out;
}

inline bool verify_parent(const Assemblage& m, const JMCertificate& cert, const Tolerances& tol = kTolerances) {
  return check_parent(m, cert, tol).ok;
}

// Parent of depolarize(m, 0): G_lambda = prod_x q(lambda(x)|x) I with
// q(a|x) = Tr(M_{a|x})/d.
inline JMCertificate white_noise_parent(const Assemblage& m) {
  JMCertificate cert{m.n_x(), m.n_a(), deterministic_assignments(m.n_x(), m.n_a()), {}};
  const double d = static_cast<double>(m.dim());
  for (const auto& lam : cert.assignments) {
    double w = 1.0;
    for (std::size_t x = 0; x < m.n_x(); ++x) w *= trace(m.effect(x, lam[x])).real() / d;
    cert.parent.push_back(w * ComplexMatrix::identity(m.dim()));
  }
  return cert;
}

// Given a parent for depolarize(m, eta_from), builds one for depolarize(m, eta_to)
// with eta_to <= eta_from by mixing in the white-noise parent.
inline JMCertificate mix_toward_noise(const JMCertificate& cert, const Assemblage& m, double eta_from,
                                      double eta_to) {
  if (!(eta_to >= 0.0 && eta_to <= eta_from && eta_from <= 1.0))
    throw DomainError("mix_toward_noise: need 0 <= eta_to <= eta_from <= 1");
  const JMCertificate noise = white_noise_parent(m);
  if (eta_from == 0.0) return noise;
  const double w = eta_to / eta_from;
  JMCertificate out{cert.n_x, cert.n_a, cert.assignments, {}};
  for (std::size_t l = 0; l < cert.parent.size(); ++l)
    out.parent.push_back(w * cert.parent[l] + (1.0 - w) * noise.parent[l]);
  return out;
}

// A parent with an arbitrary classical post-processing p(a|x,mu).
struct GeneralJMModel {
  std::vector<ComplexMatrix> parent;                         // G_mu
  std::vector<std::vector<std::vector<double>>> response;  // response[mu][x][a]
};

// Splits each G_mu over deterministic assignments:
// G'_lambda = sum_mu prod_x p(lambda(x)|x,mu) G_mu.
inline JMCertificate to_deterministic(const GeneralJMModel& model, std::size_t n_x, std::size_t n_a) {
  if (model.parent.empty() || model.parent.size() != model.response.size())
    throw DimensionMismatch("to_deterministic: parent/response size mismatch");
  const std::size_t d = model.parent.front().rows();
  JMCertificate out{n_x, n_a, deterministic_assignments(n_x, n_a), {}};
  for (const auto& lam : out.assignments) {
    ComplexMatrix g = ComplexMatrix::zeros(d, d);
    for (std::size_t mu = 0; mu < model.parent.size(); ++mu) {
      double w = 1.0;
      for (std::size_t x = 0; x < n_x; ++x) w *= model.response[mu].at(x).at(lam[x]);
      if (w != 0.0) g = g + w * model.parent[mu];
    }
    out.parent.push_back(std::move(g));
  }
  return out;
}

namespace detail {

// Orthogonal projector data for {g : C g = m} where C[(x,a), lambda] = [lambda(x) = a].
// The same real C acts on every matrix entry independently, so one
// pseudo-inverse serves all d^2 entries.
struct MarginalProjector {
  std::size_t n_lambda = 0;
  std::size_t n_constraints = 0;
  std::vector<double> c;      // n_constraints x n_lambda
  std::vector<double> c_pinv;  // n_lambda x n_constraints

  MarginalProjector(std::size_t n_x, std::size_t n_a) {
    const auto assignments = deterministic_assignments(n_x, n_a);
    n_lambda = assignments.size();
    n_constraints = n_x * n_a;
    c.assign(n_constraints * n_lambda, 0.0);
    for (std::size_t l = 0; l < n_lambda; ++l)
      for (std::size_t x = 0; x < n_x; ++x) c[(x * n_a + assignments[l][x]) * n_lambda + l] = 1.0;

    std::vector<cplx> gram(n_constraints * n_constraints, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n_constraints; ++i)
      for (std::size_t j = 0; j < n_constraints; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < n_lambda; ++l) s += c[i * n_lambda + l] * c[j * n_lambda + l];
        gram[i * n_constraints + j] = s;
      }
    const auto ed = eigh(ComplexMatrix(n_constraints, n_constraints, std::move(gram)));
    const double cutoff = 1e-10 * std::max(1.0, ed.values.front());
    const ComplexMatrix gram_pinv =
        spectral_map(ed, [cutoff](double v) { return v > cutoff ? 1.0 / v : 0.0; });

    c_pinv.assign(n_lambda * n_constraints, 0.0);
    for (std::size_t l = 0; l < n_lambda; ++l)
      for (std::size_t j = 0; j < n_constraints; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_constraints; ++i) s += c[i * n_lambda + l] * gram_pinv(i, j).real();
        c_pinv[l * n_constraints + j] = s;
      }
  }

  // g is lambda-major with d2 entries per parent effect; targets is
  // constraint-major with d2 entries per effect.
  void project(std::vector<cplx>& g, std::span<const cplx> targets, std::size_t d2) const {
    std::vector<cplx> residual(n_constraints);
    for (std::size_t e = 0; e < d2; ++e) {
      for (std::size_t i = 0; i < n_constraints; ++i) {
        cplx s = -targets[i * d2 + e];
        for (std::size_t l = 0; l < n_lambda; ++l)
          if (c[i * n_lambda + l] != 0.0) s += g[l * d2 + e];
        residual[i] = s;
      }
      for (std::size_t l = 0; l < n_lambda; ++l) {
        cplx s{0.0, 0.0};
        for (std::size_t i = 0; i < n_constraints; ++i) s += c_pinv[l * n_constraints + i] * residual[i];
        g[l * d2 + e] -= s;
      }
    }
  }
};

inline JMCertificate certificate_from_flat(const Assemblage& m, std::span<const cplx> g) {
  const std::size_t d = m.dim(), d2 = d * d;
  JMCertificate cert{m.n_x(), m.n_a(), deterministic_assignments(m.n_x(), m.n_a()), {}};
  for (std::size_t l = 0; l < cert.assignments.size(); ++l) {
    std::vector<cplx> e(g.begin() + l * d2, g.begin() + (l + 1) * d2);
    cert.parent.emplace_back(d, d, std::move(e));
  }
  return cert;
}

}  // namespace detail

// Searches for a parent POVM. Returns a certificate that has passed
// verify_parent, or nullopt when `budget` sweeps did not reach the residual.
inline std::optional<JMCertificate> jm_feasible(const Assemblage& m, std::size_t budget = kTolerances.dykstra_budget,
                                                const Tolerances& tol = kTolerances) {
  if (budget == 0) throw DomainError("jm_feasible: budget must be positive");
  if (m.n_x() == 1) {
    JMCertificate cert{1, m.n_a(), deterministic_assignments(1, m.n_a()), {}};
    for (std::size_t a = 0; a < m.n_a(); ++a) cert.parent.push_back(m.effect(0, a));
    return cert;
  }

  const std::size_t d = m.dim(), d2 = d * d;
  const detail::MarginalProjector proj(m.n_x(), m.n_a());
  std::vector<cplx> targets;
  targets.reserve(proj.n_constraints * d2);
  for (const auto& e : m.effects()) targets.insert(targets.end(), e.entries().begin(), e.entries().end());

  const std::size_t total = proj.n_lambda * d2;
  std::vector<cplx> x(total, cplx{0.0, 0.0});  // cone iterate
  std::vector<cplx> q(total, cplx{0.0, 0.0});  // Dykstra correction for the cone
  std::vector<cplx> y(total), z(total);

  for (std::size_t sweep = 0; sweep < budget; ++sweep) {
    y = x;
    proj.project(y, targets, d2);
    for (std::size_t i = 0; i < total; ++i) z[i] = y[i] + q[i];
    for (std::size_t l = 0; l < proj.n_lambda; ++l) {
      const ComplexMatrix block(d, d, std::vector<cplx>(z.begin() + l * d2, z.begin() + (l + 1) * d2));
      const ComplexMatrix clipped = project_psd(hermitian_part(block));
      std::copy(clipped.entries().begin(), clipped.entries().end(), x.begin() + l * d2);
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      q[i] = z[i] - x[i];
      residual += std::norm(x[i] - y[i]);
    }
    if (std::sqrt(residual) <= tol.dykstra_residual) {
      JMCertificate cert = detail::certificate_from_flat(m, y);
      if (verify_parent(m, cert, tol)) return cert;
    }
  }
  return std::nullopt;
}

// Bisection on eta in [0, 1]. Feasibility is monotone in eta (noisier is
// easier), so the certified set is an interval [0, eta_JM].
inline RobustnessInterval jm_robustness(const Assemblage& m, double tolerance = 1e-3,
                                        std::size_t budget = kTolerances.dykstra_budget,
                                        const Tolerances& tol = kTolerances) {
  if (!(tolerance >= 1e-5)) throw DomainError("jm_robustness: tolerance must be >= 1e-5");
  RobustnessInterval out;
  if (m.n_x() == 1) {
    out.eta_lo = out.eta_hi = 1.0;
    out.certificate = *jm_feasible(m, budget, tol);
    return out;
  }
  ++out.probes;
  if (auto cert = jm_feasible(m, budget, tol)) {
    out.eta_lo = out.eta_hi = 1.0;
    out.certificate = std::move(*cert);
    return out;
  }
  double lo = 0.0, hi = 1.0;
  JMCertificate best = white_noise_parent(m);
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    ++out.probes;
    if (auto cert = jm_feasible(depolarize(m, mid), budget, tol)) {
      lo = mid;
      best = std::move(*cert);
    } else {
      hi = mid;
    }
  }
  out.eta_lo = lo;
  out.eta_hi = hi;
  out.certificate = std::move(best);
  return out;
}

}  // namespace qbjm
