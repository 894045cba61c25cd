#pragma once

// Pressure of the Ising and random cluster models on locally tree-like
// d-regular graphs, the critical curve w_c(B), and a first-order probe.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rclab/error.hpp"
#include "rclab/mapping.hpp"

namespace rclab {

inline constexpr double kQuadratureTolerance = 1e-11;
inline constexpr int kVariationalGrid = 2000;  // grid intervals on [0, 1]
inline constexpr double kGoldenTolerance = 1e-12;
inline constexpr double kFirstOrderThreshold = 1e-3;

inline void check_degree(int d) {
  require(d >= 3, ErrorKind::InvalidParameter, "regular-graph formulas need d >= 3, got " + std::to_string(d));
}

/// f_b(s) = (b(1-2s) + sqrt(1 + (b^2-1)(1-2s)^2)) / (2(1-s)).
inline double f_b(double s, double b) {
  if (!(s >= 0.0 && s <= 0.5)) fail(ErrorKind::DomainError, "f_b needs s in [0, 1/2], got " + std::to_string(s));
  if (!(b > 0.0)) fail(ErrorKind::DomainError, "f_b needs b > 0");
  const double x = 1.0 - 2.0 * s;
  return (b * x + std::sqrt(1.0 + (b * b - 1.0) * x * x)) / (2.0 * (1.0 - s));
}

/// F_b(t) = int_0^{min(t, 1-t)} log f_b(s) ds, adaptive Gauss-Kronrod.
inline double F_b(double t, double b, double abs_tol = kQuadratureTolerance) {
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::DomainError, "F_b needs t in [0, 1], got " + std::to_string(t));
  if (!(b > 0.0)) fail(ErrorKind::DomainError, "F_b needs b > 0");
  const double upper = std::min(t, 1.0 - t);
  if (upper == 0.0 || b == 1.0) return 0.0;
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      [b](double s) { return std::log(f_b(s, b)); }, 0.0, upper, 15, abs_tol, &err);
  if (!(err <= abs_tol) || !std::isfinite(value))
    fail(ErrorKind::QuadratureFailure, "F_b error estimate " + std::to_string(err) + " above tolerance");
  return value;
}

/// F_b tabulated on the variational grid so the maximiser can evaluate
/// L(beta, t) = H(t) + d F_b(t) cheaply at arbitrary t.
class FbTable {
 public:
  FbTable(double b, double abs_tol = kQuadratureTolerance) : b_(b), cumulative_(kVariationalGrid / 2 + 1, 0.0) {
    if (!(b > 0.0)) fail(ErrorKind::DomainError, "F_b needs b > 0");
    if (b == 1.0) return;
    const int cells = kVariationalGrid / 2;
    double total_err = 0.0;
    for (int i = 0; i < cells; ++i) {
      double err = 0.0;
      const double piece = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          [b](double s) { return std::log(f_b(s, b)); }, node(i), node(i + 1), 0, 0.0, &err);
      total_err += err;
      cumulative_[i + 1] = cumulative_[i] + piece;
    }
    if (!(total_err <= abs_tol))
      fail(ErrorKind::QuadratureFailure, "tabulated F_b error estimate " + std::to_string(total_err));
  }

  double operator()(double t) const {
    const double s = std::min(t, 1.0 - t);
    if (b_ == 1.0 || s <= 0.0) return 0.0;
    const int cells = kVariationalGrid / 2;
    const int j = std::clamp(static_cast<int>(s * kVariationalGrid), 0, cells - 1);
    if (s == node(j)) return cumulative_[j];
    const double b = b_;
    const double tail = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [b](double u) { return std::log(f_b(u, b)); }, node(j), std::min(s, 0.5), 0, 0.0);
    return cumulative_[j] + tail;
  }

 private:
  static double node(int i) { return static_cast<double>(i) / kVariationalGrid; }
  double b_;
  std::vector<double> cumulative_;
};

inline double binary_entropy(double t) {
  auto xlx = [](double x) { return x <= 0.0 ? 0.0 : x * std::log(x); };
  return -xlx(t) - xlx(1.0 - t);
}

struct VariationalSolution {
  double t_star = 0.5;
  double t_plus = 0.5;   // maximiser on the t >= 1/2 branch when z = 0
  double t_minus = 0.5;  // 1 - t_plus when z = 0
  double value = 0.0;    // sup_t G(beta, z, t)
  double beta = 0.0;
  double z = 0.0;
};

namespace detail {

template <class F>
double golden_max(F&& f, double lo, double hi, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// sup over t in [0, 1] of G = H(t) + d F_b(t) + z(2t - 1), b = e^{-2 beta}.
/// Every local peak of a 2001-point grid is refined by golden section, since
/// G can be bimodal. At z = 0 the search is restricted to t >= 1/2.
inline VariationalSolution maximize_G(double beta, double z, int d, double abs_tol = kQuadratureTolerance) {
  require(std::isfinite(beta) && beta >= 0.0, ErrorKind::InvalidParameter, "beta must be >= 0");
  require(std::isfinite(z), ErrorKind::InvalidParameter, "z must be finite");
  check_degree(d);
  const FbTable F(std::exp(-2.0 * beta), abs_tol);
  auto G = [&](double t) { return binary_entropy(t) + d * F(t) + z * (2.0 * t - 1.0); };

  const int first = z == 0.0 ? kVariationalGrid / 2 : 0;
  std::vector<double> grid(kVariationalGrid + 1);
  for (int i = first; i <= kVariationalGrid; ++i) grid[i] = G(static_cast<double>(i) / kVariationalGrid);

  VariationalSolution sol;
  sol.beta = beta;
  sol.z = z;
  sol.value = -std::numeric_limits<double>::infinity();
  for (int i = first; i <= kVariationalGrid; ++i) {
    const bool left_ok = i == first || grid[i] >= grid[i - 1];
    const bool right_ok = i == kVariationalGrid || grid[i] > grid[i + 1];
    if (!left_ok || !right_ok) continue;
    const double lo = static_cast<double>(std::max(i - 1, first)) / kVariationalGrid;
    const double hi = static_cast<double>(std::min(i + 1, kVariationalGrid)) / kVariationalGrid;
    const double t = detail::golden_max(G, lo, hi, kGoldenTolerance);
    const double v = G(t);
    if (v > sol.value) {
      sol.value = v;
      sol.t_star = t;
    }
  }
  sol.t_plus = sol.t_minus = sol.t_star;
  if (z == 0.0) sol.t_minus = 1.0 - sol.t_plus;
  return sol;
}

/// phi^Ising(beta, z) = beta d / 2 + sup_t G(beta, z, t).
inline double phi_ising(double beta, double z, int d, double abs_tol = kQuadratureTolerance) {
  return 0.5 * beta * d + maximize_G(beta, z, d, abs_tol).value;
}

inline void check_regular_rc(double q, double w, double B, int d) {
  require(std::isfinite(q) && q >= 2.0, ErrorKind::InvalidQ, "regular-graph pressure needs q >= 2");
  require(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidParameter, "w must be >= 0");
  require(std::isfinite(B) && B >= 0.0, ErrorKind::InvalidParameter, "B must be >= 0");
  check_degree(d);
}

struct RegularPressure {
  double phi = 0.0;
  double beta_star = 0.0;
  double z = 0.0;  // B* = k d + h
  VariationalSolution ising;
};

inline RegularPressure rc_regular_pressure(double q, double w, double B, int d,
                                           double abs_tol = kQuadratureTolerance) {
  check_regular_rc(q, w, B, d);
  const MappedModel m = rc_to_eising(q, w, B);
  RegularPressure r;
  r.beta_star = m.eising.beta_star;
  r.z = m.eising.field(d);
  r.ising = maximize_G(r.beta_star, r.z, d, abs_tol);
  r.phi = 0.5 * r.beta_star * d + 0.5 * (std::log(q - 1.0) - B) + 0.5 * r.beta_star * d + r.ising.value;
  return r;
}

/// phi(w, B) = beta* d / 2 + 1/2 log(e^{-B}(q-1)) + phi^Ising(beta*, k d + h).
inline double phi_rc_regular(double q, double w, double B, int d, double abs_tol = kQuadratureTolerance) {
  return rc_regular_pressure(q, w, B, d, abs_tol).phi;
}

// ---------------------------------------------------------------------------
// Critical curve

/// l_{q,d}(x) = (x^{2/d} - 1) / (1 - x^{2/d}/(q-1)).
inline double ell_qd(double x, double q, int d) {
  require(std::isfinite(x) && x > 0.0, ErrorKind::DomainError, "ell_qd needs x > 0");
  require(std::isfinite(q) && q > 1.0, ErrorKind::InvalidQ, "ell_qd needs q > 1");
  check_degree(d);
  const double ym1 = std::expm1(2.0 / d * std::log(x));  // x^{2/d} - 1
  const double denom = ((q - 2.0) - ym1) / (q - 1.0);
  if (std::abs(denom) <= 1e-14 * (1.0 + std::abs(ym1)))
    fail(ErrorKind::Singularity, "ell_qd pole at x^{2/d} = q - 1");
  return ym1 / denom;
}

inline double g_of_w(double w, double q) { return (1.0 + w) * (1.0 + w / (q - 1.0)); }

/// w_c(B) = l_{q,d}((q-1) e^{-B}); the field z = k d + h vanishes on it.
inline double w_c(double B, double q, int d) {
  require(std::isfinite(B) && B >= 0.0, ErrorKind::InvalidParameter, "w_c needs B >= 0");
  require(std::isfinite(q) && q >= 2.0, ErrorKind::InvalidQ, "w_c needs q >= 2");
  if (q == 2.0) fail(ErrorKind::Singularity, "w_c is 0/0 at q = 2");
  return ell_qd((q - 1.0) * std::exp(-B), q, d);
}

inline double ising_beta_c(int d) {
  check_degree(d);
  return 0.5 * std::log(static_cast<double>(d) / (d - 2));
}

/// B_+ solves g(w_c(B)) = (d/(d-2))^2, bisected on [0, log(q-1)] where
/// w_c(log(q-1)) = 0.
inline double find_B_plus(double q, int d) {
  require(std::isfinite(q) && q > 2.0, ErrorKind::InvalidQ, "find_B_plus needs q > 2");
  check_degree(d);
  const double target = std::pow(static_cast<double>(d) / (d - 2), 2);
  auto h = [&](double B) { return g_of_w(w_c(B, q, d), q) - target; };
  double lo = 0.0, hi = std::log(q - 1.0);
  double h_lo = h(lo), h_hi = h(hi);
  if (!(h_lo > 0.0 && h_hi < 0.0)) fail(ErrorKind::RootNotBracketed, "g(w_c(B)) - (d/(d-2))^2 has no sign change");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double h_mid = h(mid);
    if (h_mid > 0.0) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
      h_hi = h_mid;
    }
  }
  return std::abs(h_lo) <= std::abs(h_hi) ? lo : hi;
}

struct OneSidedDerivatives {
  double phi = 0.0;
  double minus = 0.0, plus = 0.0;
};

/// One-sided derivatives of w -> phi_rc_regular at w, each from forward
/// (backward) differences with steps h and h/2 and one Richardson level.
/// Needs w >= step.
inline OneSidedDerivatives dphi_dw_one_sided(double q, double w, double B, int d, double step = 1e-4) {
  require(std::isfinite(step) && step > 0.0 && w >= step, ErrorKind::InvalidParameter,
          "one-sided derivatives need 0 < step <= w");
  auto phi = [&](double x) { return phi_rc_regular(q, x, B, d); };
  OneSidedDerivatives out;
  out.phi = phi(w);
  const double up1 = phi(w + step), up2 = phi(w + 0.5 * step);
  const double dn1 = phi(w - step), dn2 = phi(w - 0.5 * step);
  out.plus = 2.0 * (up2 - out.phi) / (0.5 * step) - (up1 - out.phi) / step;
  out.minus = 2.0 * (out.phi - dn2) / (0.5 * step) - (out.phi - dn1) / step;
  return out;
}

struct PhasePoint {
  double w = 0.0, B = 0.0;
  double phi = 0.0;
  double dphi_dw_minus = 0.0, dphi_dw_plus = 0.0;
  double gap = 0.0;  // dphi_dw_plus - dphi_dw_minus
  bool first_order = false;
  bool on_curve = false;    // w is w_c(B) rather than a clipped or limiting value
  double beta_star = 0.0;   // at w
  double t_gap = 0.0;       // 2 t_{beta*, 0+} - 1, the jump of d phi^Ising / dz
};

/// Probe for a kink in w -> phi_rc_regular at w_c(B). Where the curve does
/// not exist (q = 2, or w_c(B) <= 2 step) the probe runs at the nearest
/// admissible w: 2/(d-2) for q = 2, B = 0, otherwise max(w_c, 2 step).
inline PhasePoint transition_probe(double q, int d, double B, double step = 1e-4) {
  check_regular_rc(q, 0.0, B, d);
  require(std::isfinite(step) && step > 0.0, ErrorKind::InvalidParameter, "step must be > 0");
  PhasePoint p;
  p.B = B;
  double w0 = 0.0;
  if (q > 2.0) {
    w0 = w_c(B, q, d);
    p.on_curve = w0 > 2.0 * step;
  } else {
    w0 = B == 0.0 ? 2.0 / (d - 2) : 0.0;
  }
  w0 = std::max(w0, 2.0 * step);
  p.w = w0;
  const OneSidedDerivatives dd = dphi_dw_one_sided(q, w0, B, d, step);
  p.phi = dd.phi;
  p.dphi_dw_minus = dd.minus;
  p.dphi_dw_plus = dd.plus;
  p.gap = p.dphi_dw_plus - p.dphi_dw_minus;
  p.first_order = std::abs(p.gap) > kFirstOrderThreshold;
  p.beta_star = rc_to_eising(q, w0, B).eising.beta_star;
  p.t_gap = 2.0 * maximize_G(p.beta_star, 0.0, d).t_plus - 1.0;
  return p;
}

}  // namespace rclab
