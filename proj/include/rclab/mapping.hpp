#pragma once

// RC(q, w, B) -> two-spin weights -> extended Ising (beta*, k, h).

#include <cmath>
#include <string>

#include "rclab/error.hpp"
#include "rclab/exact.hpp"

namespace rclab {

struct MappedModel {
  TwoSpinWeights two_spin;
  EIsingParams eising;
  double B0 = 0.0;
  double log_prefactor_per_vertex = 0.0;  // 1/2 log(psibar(+) psibar(-))
  double log_prefactor_per_edge = 0.0;    // B0
  /// q in (1, 2): formulas are finite but the rank-2 bounds are only known for q >= 2.
  bool outside_proven_range = false;
};

inline void check_mapping_q(double q) {
  require(std::isfinite(q) && q > 1.0 + 1e-12, ErrorKind::InvalidQ, "mapping needs q > 1, got " + std::to_string(q));
}

inline TwoSpinWeights rc_to_two_spin(double q, double w, double B) {
  check_mapping_q(q);
  require(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidParameter, "w must be >= 0");
  require(std::isfinite(B), ErrorKind::InvalidParameter, "B must be finite");
  TwoSpinWeights ws;
  ws.psi_pp = 1.0 + w;
  ws.psi_pm = 1.0;
  ws.psi_mm = 1.0 + w / (q - 1.0);
  ws.psibar_p = 1.0;
  ws.psibar_m = (q - 1.0) * std::exp(-B);
  return ws;
}

/// Generic two-spin -> Ising rewrite psi(s,s') = e^{B0} e^{beta* s s'} e^{k(s+s')},
/// psibar(s) = sqrt(psibar(+)psibar(-)) e^{h s}.
inline MappedModel two_spin_to_eising(const TwoSpinWeights& ws) {
  validate(ws);
  const double lpp = std::log(ws.psi_pp), lpm = std::log(ws.psi_pm), lmm = std::log(ws.psi_mm);
  MappedModel m;
  m.two_spin = ws;
  m.eising.h = 0.5 * (std::log(ws.psibar_p) - std::log(ws.psibar_m));
  m.eising.k = 0.25 * (lpp - lmm);
  m.eising.beta_star = 0.25 * (lpp + lmm - 2.0 * lpm);
  m.B0 = 0.25 * (lpp + 2.0 * lpm + lmm);
  m.log_prefactor_per_vertex = 0.5 * (std::log(ws.psibar_p) + std::log(ws.psibar_m));
  m.log_prefactor_per_edge = m.B0;
  return m;
}

/// Same parameters computed directly from (q, w, B) with log1p, which keeps
/// precision at small w and extreme B.
inline MappedModel rc_to_eising(double q, double w, double B) {
  MappedModel m;
  m.two_spin = rc_to_two_spin(q, w, B);
  const double a = std::log1p(w), b = std::log1p(w / (q - 1.0));
  m.eising.beta_star = 0.25 * (a + b);
  m.eising.k = 0.25 * (a - b);
  m.eising.h = 0.5 * (B - std::log(q - 1.0));
  m.B0 = m.eising.beta_star;
  m.log_prefactor_per_vertex = 0.5 * (std::log(q - 1.0) - B);
  m.log_prefactor_per_edge = m.eising.beta_star;
  m.outside_proven_range = q < 2.0;
  return m;
}

struct IdentityResiduals {
  double logZ2 = 0.0;
  double logZ_two_spin = 0.0;
  double logZ_eising = 0.0;
  double eising_residual = 0.0;    // |log Z2 - (n/2 log(e^-B (q-1)) + beta*|E| + log Z^eIsing)|
  double two_spin_residual = 0.0;  // |log Z2 - log Z(psi, psibar)|
};

inline IdentityResiduals assemble_identities(const Graph& g, double q, double w, double B) {
  const MappedModel m = rc_to_eising(q, w, B);
  IdentityResiduals r;
  r.logZ2 = rank2_partition(g, RCParams{q, w, B}).log;
  r.logZ_two_spin = two_spin_partition(g, m.two_spin).log;
  r.logZ_eising = eising_partition(g, m.eising).log;
  const double assembled =
      g.n() * m.log_prefactor_per_vertex + g.m() * m.log_prefactor_per_edge + r.logZ_eising;
  r.eising_residual = std::abs(r.logZ2 - assembled);
  r.two_spin_residual = std::abs(r.logZ2 - r.logZ_two_spin);
  return r;
}

}  // namespace rclab
