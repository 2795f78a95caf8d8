#pragma once

// Local expansion of the circuit potential about its minimum and the
// resulting mode frequencies, anharmonicities and coupling rates.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "istq/circuit.hpp"
#include "istq/errors.hpp"
#include "istq/physconst.hpp"

namespace istq {

struct Minimum {
  double phi_q = 0.0;
  double phi_r = 0.0;
};

/// Warm start: a known minimum at a nearby bias.
struct WarmStart {
  FluxBias flux;
  Minimum minimum;
};

/// c[m][n] multiplies (phi_q - min_q)^m (phi_r - min_r)^n, m + n <= 4, GHz.
struct TaylorExpansion {
  Minimum minimum;
  double U0 = 0.0;
  std::array<std::array<double, 5>, 5> c{};
};

struct ModeQuantization {
  double E_C = 0.0;      // GHz
  double E_Cr = 0.0;     // GHz
  double EJq_eff = 0.0;  // 2 c20, GHz
  double EJr_eff = 0.0;  // 2 c02, GHz
  double omega_q = 0.0;  // GHz
  double omega_r = 0.0;  // GHz
  double lambda_q = 0.0;
  double lambda_r = 0.0;
  double Z0 = 0.0;       // resonator characteristic impedance, Ohm
  double eta = 0.0;      // EJr_eff / E_L(L) - 1
};

/// Coupling rates in MHz.
struct CouplingSet {
  double g_xx = 0.0;
  double g_zx = 0.0;
  double g_xz = 0.0;
  double g_zz = 0.0;
};

/// Perturbative anharmonicities in GHz.
struct Anharmonicities {
  double alpha_q = 0.0;
  double alpha_r = 0.0;
};

struct SpectrumPoint {
  FluxBias flux;
  double omega_r = 0.0;     // GHz
  double omega_q = 0.0;     // GHz
  double Delta = 0.0;       // omega_q + alpha_q, GHz
  double alpha_q = 0.0;     // GHz
  double alpha_r = 0.0;     // GHz
  double alpha_q_rel = 0.0; // alpha_q / (omega_q + alpha_q)
  double alpha_r_rel = 0.0; // alpha_r / (omega_r + alpha_r)
  CouplingSet g;
  double eta = 0.0;
  Minimum minimum;
  double lambda_q = 0.0;
  double lambda_r = 0.0;
  double Z0 = 0.0;
  double EJq_eff = 0.0;
  double E_C = 0.0;
};

namespace detail {

constexpr double kGradientTol = 1e-10;   // GHz / rad
constexpr double kStationaryTol = 1e-9;  // GHz / rad

struct NewtonResult {
  Minimum x;
  PartialTable d;
};

// Damped Newton on U with Armijo backtracking; falls back to steepest descent
// while the Hessian is indefinite.
inline NewtonResult newton_minimize(const CircuitModel& c, const FluxBias& f, Minimum x0) {
  Minimum x = x0;
  PartialTable d = partials(c, f, x.phi_q, x.phi_r);
  for (int it = 0; it < 200; ++it) {
    const double gq = d[1][0], gr = d[0][1];
    if (std::hypot(gq, gr) < kGradientTol) return {x, d};
    const double a = d[2][0], b = d[1][1], e = d[0][2];
    const double det = a * e - b * b;
    double sq, sr;
    const bool pd = a > 0.0 && det > 0.0;
    if (pd) {
      sq = -(e * gq - b * gr) / det;
      sr = -(a * gr - b * gq) / det;
    } else {
      const double scale = std::max({std::abs(a), std::abs(e), std::abs(b), 1e-12});
      sq = -gq / scale;
      sr = -gr / scale;
    }
    const double slope = gq * sq + gr * sr;
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      Minimum trial{x.phi_q + t * sq, x.phi_r + t * sr};
      PartialTable dt = partials(c, f, trial.phi_q, trial.phi_r);
      const bool small = pd && t * std::hypot(sq, sr) < 1e-6;
      const bool armijo = dt[0][0] <= d[0][0] + 1e-4 * t * slope;
      const bool flat = std::abs(dt[0][0] - d[0][0]) <= 1e-14 * (1.0 + std::abs(d[0][0])) &&
                        std::hypot(dt[1][0], dt[0][1]) < std::hypot(gq, gr);
      if (small || armijo || flat) {
        x = trial;
        d = dt;
        break;
      }
      t *= 0.5;
      if (ls == 59) throw ConvergenceError("find_minimum: line search failed");
    }
  }
  throw ConvergenceError("find_minimum: no convergence in 200 Newton iterations");
}

inline void require_single_well(const PartialTable& d, double phi_x) {
  const double det = d[2][0] * d[0][2] - d[1][1] * d[1][1];
  if (!(d[2][0] > 0.0 && det > 0.0)) {
    std::ostringstream os;
    os << "potential has no stable single-well minimum at phi_x = " << phi_x
       << " (Hessian not positive definite)";
    throw DoubleWellError(os.str(), phi_x);
  }
}

// A warm-started minimum can slide into one side of a split qubit well
// without its Hessian ever turning indefinite. Scan U along phi_q through the
// minimum and reject any other local minimum within +-pi.
inline void require_no_second_well(const CircuitModel& c, const FluxBias& f, const Minimum& x) {
  constexpr int kHalf = 63;
  constexpr double kStep = std::numbers::pi / kHalf;
  double prev2 = potential(c, f, x.phi_q - kHalf * kStep, x.phi_r);
  double prev = potential(c, f, x.phi_q - (kHalf - 1) * kStep, x.phi_r);
  for (int i = -kHalf + 2; i <= kHalf; ++i) {
    const double u = potential(c, f, x.phi_q + i * kStep, x.phi_r);
    const int at = i - 1;
    if (std::abs(at) > 2 && prev < prev2 && prev < u) {
      std::ostringstream os;
      os << "potential has a second qubit well near phi_q = " << x.phi_q + at * kStep << " at phi_x = " << f.phi_x;
      throw DoubleWellError(os.str(), f.phi_x);
    }
    prev2 = prev;
    prev = u;
  }
}

// Continuation from `from` to `to` in bounded flux steps.
inline Minimum continue_minimum(const CircuitModel& c, FluxBias from, const FluxBias& to, Minimum x,
                                double step) {
  auto walk = [&](double FluxBias::*field) {
    const double span = to.*field - from.*field;
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / step)));
    const double start = from.*field;
    for (int i = 1; i <= n; ++i) {
      from.*field = (i == n) ? to.*field : start + span * i / n;
      x = newton_minimize(c, from, x).x;
    }
  };
  walk(&FluxBias::phi_Xb);
  walk(&FluxBias::phi_x);
  return x;
}

}  // namespace detail

/// Global minimum of U at the given bias. Without a warm start the search
/// follows the minimum continuously from the nearest bias where the origin is
/// the minimum (phi_x a multiple of k pi, phi_Xb a multiple of pi).
inline Minimum find_minimum(const CircuitParams& p, const FluxBias& f,
                            std::optional<WarmStart> warm = std::nullopt) {
  validate(p);
  const auto c = detail::circuit_model(p);
  const double kpi = p.k * std::numbers::pi;
  const double step = kpi / 100.0;
  Minimum x;
  if (warm) {
    x = detail::continue_minimum(c, warm->flux, f, warm->minimum, step);
  } else {
    const FluxBias anchor{kpi * std::round(f.phi_x / kpi),
                          std::numbers::pi * std::round(f.phi_Xb / std::numbers::pi)};
    auto start = detail::newton_minimize(c, anchor, {0.0, 0.0});
    detail::require_single_well(start.d, anchor.phi_x);
    x = detail::continue_minimum(c, anchor, f, start.x, step);
  }
  auto fin = detail::newton_minimize(c, f, x);
  detail::require_single_well(fin.d, f.phi_x);
  detail::require_no_second_well(c, f, fin.x);
  return fin.x;
}

/// Taylor coefficients through fourth order about a stationary point.
inline TaylorExpansion taylor_expand(const CircuitParams& p, const FluxBias& f, const Minimum& at) {
  validate(p);
  const auto d = detail::partials(detail::circuit_model(p), f, at.phi_q, at.phi_r);
  if (std::abs(d[1][0]) > detail::kStationaryTol || std::abs(d[0][1]) > detail::kStationaryTol)
    throw DomainError("taylor_expand: expansion point is not stationary");
  detail::require_single_well(d, f.phi_x);
  if (!(d[0][2] > 0.0)) throw DoubleWellError("taylor_expand: resonator curvature is not positive", f.phi_x);

  static constexpr double fact[5] = {1.0, 1.0, 2.0, 6.0, 24.0};
  TaylorExpansion t;
  t.minimum = at;
  t.U0 = d[0][0];
  for (int m = 0; m <= 4; ++m)
    for (int n = 0; m + n <= 4; ++n) t.c[m][n] = d[m][n] / (fact[m] * fact[n]);
  t.c[0][0] = d[0][0];
  return t;
}

inline ModeQuantization quantize_modes(const TaylorExpansion& t, const CircuitParams& p) {
  const auto kin = kinetic_coefficients(p);
  ModeQuantization q;
  q.E_C = kin.E_C;
  q.E_Cr = kin.E_Cr;
  q.EJq_eff = 2.0 * t.c[2][0];
  q.EJr_eff = 2.0 * t.c[0][2];
  if (!(q.EJq_eff > 0.0 && q.EJr_eff > 0.0))
    throw DoubleWellError("quantize_modes: non-positive mode curvature", 0.0);
  q.omega_q = std::sqrt(8.0 * q.E_C * q.EJq_eff);
  q.omega_r = std::sqrt(8.0 * q.E_Cr * q.EJr_eff);
  q.lambda_q = std::pow(2.0 * q.E_C / q.EJq_eff, 0.25);
  q.lambda_r = std::pow(2.0 * q.E_Cr / q.EJr_eff, 0.25);
  // Effective resonator inductance (Phi0/2pi)^2 / (4 c02) in nH.
  const double l_eff = units::flux_energy_ghz_nh / (2.0 * q.EJr_eff);
  q.Z0 = 2.0 * std::sqrt(units::henry_from_nh(l_eff) / units::farad_from_ff(p.C));
  q.eta = q.EJr_eff / inductance_energy(p.L) - 1.0;
  return q;
}

inline CouplingSet extract_couplings(const TaylorExpansion& t, const ModeQuantization& q) {
  const double lq = q.lambda_q, lr = q.lambda_r;
  return {1e3 * t.c[1][1] * lq * lr, 1e3 * t.c[2][1] * lq * lq * lr, 1e3 * t.c[1][2] * lq * lr * lr,
          1e3 * t.c[2][2] * lq * lq * lr * lr};
}

inline Anharmonicities anharmonicities(const TaylorExpansion& t, const ModeQuantization& q) {
  return {12.0 * t.c[4][0] * std::pow(q.lambda_q, 4), 12.0 * t.c[0][4] * std::pow(q.lambda_r, 4)};
}

namespace detail {

inline SpectrumPoint assemble(const FluxBias& f, const Minimum& x, const ModeQuantization& q,
                              const CouplingSet& g, const Anharmonicities& a) {
  SpectrumPoint s;
  s.flux = f;
  s.omega_r = q.omega_r;
  s.omega_q = q.omega_q;
  s.alpha_q = a.alpha_q;
  s.alpha_r = a.alpha_r;
  s.Delta = q.omega_q + a.alpha_q;
  s.alpha_q_rel = a.alpha_q / s.Delta;
  s.alpha_r_rel = a.alpha_r / (q.omega_r + a.alpha_r);
  s.g = g;
  s.eta = q.eta;
  s.minimum = x;
  s.lambda_q = q.lambda_q;
  s.lambda_r = q.lambda_r;
  s.Z0 = q.Z0;
  s.EJq_eff = q.EJq_eff;
  s.E_C = q.E_C;
  return s;
}

}  // namespace detail

/// Full numerical pipeline at one bias point.
inline SpectrumPoint analyze_point(const CircuitParams& p, const FluxBias& f,
                                   std::optional<WarmStart> warm = std::nullopt) {
  const Minimum x = find_minimum(p, f, warm);
  const auto t = taylor_expand(p, f, x);
  const auto q = quantize_modes(t, p);
  return detail::assemble(f, x, q, extract_couplings(t, q), anharmonicities(t, q));
}

/// Closed-form expressions for the non-adapted circuits at phi_Xb in {0, pi}.
/// Branch-inductance asymmetry is not part of this model and is ignored.
inline SpectrumPoint closed_form_point(const CircuitParams& p, const FluxBias& f) {
  validate(p);
  if (p.variant == Variant::Adapted)
    throw UnsupportedVariantError("closed_form_point: no closed form for the adapted variant");
  const double cxb = std::cos(f.phi_Xb);
  if (std::abs(std::abs(cxb) - 1.0) > 1e-12)
    throw DomainError("closed_form_point: phi_Xb must be 0 or pi (mod 2 pi)");
  const double sgn = cxb > 0.0 ? 1.0 : -1.0;

  const double k = p.k;
  const double u = (f.phi_x + 2.0 * std::numbers::pi * p.m) / k;
  const double cu = std::cos(u), su = std::sin(u);
  const double el = inductance_energy(p.L);
  const double eta = p.E_Jsigma * p.L * cu / (2.0 * k * units::flux_energy_ghz_nh);
  const double ejq = sgn * p.E_Jq;
  const double estar = ejq + el * (1.0 + eta);
  const double ejr = el * (1.0 + eta);
  if (!(estar > 0.0) || !(ejr > 0.0))
    throw DoubleWellError("closed_form_point: non-positive mode curvature", f.phi_x);

  const auto kin = kinetic_coefficients(p);
  ModeQuantization q;
  q.E_C = kin.E_C;
  q.E_Cr = kin.E_Cr;
  q.EJq_eff = estar;
  q.EJr_eff = ejr;
  q.omega_q = std::sqrt(8.0 * q.E_C * estar);
  q.omega_r = std::sqrt(8.0 * q.E_Cr * ejr);
  q.lambda_q = std::pow(2.0 * q.E_C / estar, 0.25);
  q.lambda_r = std::pow(2.0 * q.E_Cr / ejr, 0.25);
  q.Z0 = 2.0 * std::sqrt(units::henry_from_nh(p.L) / (units::farad_from_ff(p.C) * (1.0 + eta)));
  q.eta = eta;

  Anharmonicities a;
  a.alpha_q = -q.E_C * (ejq + el * eta / (4.0 * k * k)) / estar;
  a.alpha_r = -q.E_Cr * eta / (4.0 * k * k * (1.0 + eta));

  const double lq = q.lambda_q, lr = q.lambda_r;
  const double es = p.E_Jsigma, ed = p.E_Jdelta();
  CouplingSet g;
  g.g_xx = 1e3 * ed * cu / (4.0 * k) * lq * lr;
  g.g_zz = -1e3 * es * cu / (64.0 * k * k * k) * lq * lq * lr * lr;
  g.g_zx = -1e3 * es * su / (16.0 * k * k) * lq * lq * lr;
  g.g_xz = -1e3 * ed * su / (16.0 * k * k) * lq * lr * lr;
  return detail::assemble(f, {0.0, 0.0}, q, g, a);
}

}  // namespace istq
