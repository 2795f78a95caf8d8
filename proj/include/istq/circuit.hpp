#pragma once

// Full qubit-resonator circuit: two coupling branches carrying the phases
// (phi_r +- phi_q)/2 plus the qubit junction, with kinetic coefficients and
// the fabrication/design feasibility checks.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "istq/branch.hpp"
#include "istq/errors.hpp"
#include "istq/physconst.hpp"

namespace istq {

enum class Variant { SingleJunction, Array, Adapted };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::SingleJunction: return "single";
    case Variant::Array: return "array";
    case Variant::Adapted: return "adapted";
  }
  return "?";
}

struct CircuitParams {
  Variant variant = Variant::SingleJunction;
  double E_Jq = 0.0;       // qubit junction, GHz
  double E_Jsigma = 0.0;   // E_J1 + E_J2 (per array junction), GHz
  double d = 0.0;          // (E_J1 - E_J2) / E_Jsigma
  double C = 0.0;          // resonator shunt capacitance, fF
  double C_q = 0.0;        // qubit shunt capacitance, fF
  double L = 0.0;          // shunt inductance per branch, nH
  std::optional<double> L_a;  // series inductance per branch, nH (Adapted)
  int k = 1;               // junctions per coupling array
  double deltaL = 0.0;     // (L1 - L2) / (L1 + L2)
  int m = 0;               // trapped flux quanta per array

  double E_J1() const { return E_Jsigma * (1.0 + d) / 2.0; }
  double E_J2() const { return E_Jsigma * (1.0 - d) / 2.0; }
  double E_Jdelta() const { return E_Jsigma * d; }
};

struct FluxBias {
  double phi_x = 0.0;   // reduced flux through each coupling loop, rad
  double phi_Xb = 0.0;  // reduced flux through the big qubit loop, rad
};

inline void validate(const CircuitParams& p) {
  auto fail = [](const std::string& msg) { throw DomainError("circuit: " + msg); };
  if (!(p.E_Jq >= 0.0) || !std::isfinite(p.E_Jq)) fail("E_Jq must be finite and >= 0");
  if (!(p.E_Jsigma >= 0.0) || !std::isfinite(p.E_Jsigma)) fail("E_Jsigma must be finite and >= 0");
  if (!(std::abs(p.d) < 1.0)) fail("junction asymmetry d must satisfy |d| < 1");
  if (!(p.C > 0.0)) fail("C must be positive");
  if (!(p.C_q >= 0.0)) fail("C_q must be >= 0");
  if (!(p.L > 0.0)) fail("L must be positive");
  if (p.k < 1) fail("k must be >= 1");
  if (!(std::abs(p.deltaL) < 1.0)) fail("deltaL must satisfy |deltaL| < 1");
  switch (p.variant) {
    case Variant::SingleJunction:
      if (p.k != 1) fail("single-junction variant requires k = 1");
      if (p.L_a) fail("single-junction variant has no series inductance");
      break;
    case Variant::Array:
      if (p.L_a) fail("array variant has no series inductance");
      break;
    case Variant::Adapted:
      if (!p.L_a || !(*p.L_a > 0.0)) fail("adapted variant requires L_a > 0");
      break;
  }
}

/// The two coupling branches; deltaL splits the shunt inductance as L(1 +- deltaL).
inline std::pair<BranchSpec, BranchSpec> branch_specs(const CircuitParams& p) {
  const BranchKind kind = p.variant == Variant::Adapted ? BranchKind::SeriesInductance : BranchKind::Direct;
  const double la = p.L_a.value_or(0.0);
  return {BranchSpec{kind, p.E_J1(), p.k, p.L * (1.0 + p.deltaL), la, p.m},
          BranchSpec{kind, p.E_J2(), p.k, p.L * (1.0 - p.deltaL), la, p.m}};
}

/// Raw partial derivatives D[m][n] = d^(m+n) U / dphi_q^m dphi_r^n, m + n <= 4.
using PartialTable = std::array<std::array<double, 5>, 5>;

namespace detail {

struct CircuitModel {
  BranchModel b1, b2;
  double E_Jq = 0.0;
};

inline CircuitModel circuit_model(const CircuitParams& p, double k_real) {
  auto [s1, s2] = branch_specs(p);
  auto m1 = model_of(s1), m2 = model_of(s2);
  m1.k = m2.k = k_real;
  return {m1, m2, p.E_Jq};
}

inline CircuitModel circuit_model(const CircuitParams& p) {
  return circuit_model(p, static_cast<double>(p.k));
}

// Series-inductance branches are written with (phi_d - phi_x); flipping the
// loop flux makes every variant share the convention of the Direct branch.
inline double branch_flux(const BranchModel& b, double phi_x) {
  return b.kind == BranchKind::SeriesInductance ? -phi_x : phi_x;
}

inline PartialTable partials(const CircuitModel& c, const FluxBias& f, double q, double r) {
  const BranchJet j1 = jet(c.b1, 0.5 * (r + q), branch_flux(c.b1, f.phi_x));
  const BranchJet j2 = jet(c.b2, 0.5 * (r - q), branch_flux(c.b2, f.phi_x));
  const double s = std::sin(q + f.phi_Xb), co = std::cos(q + f.phi_Xb);
  const std::array<double, 5> qubit = {-c.E_Jq * co, c.E_Jq * s, c.E_Jq * co, -c.E_Jq * s, -c.E_Jq * co};

  PartialTable d{};
  for (int m = 0; m <= 4; ++m) {
    for (int n = 0; m + n <= 4; ++n) {
      const double w = std::ldexp(1.0, -(m + n));
      const double sign2 = (m % 2 == 0) ? 1.0 : -1.0;
      d[m][n] = w * (j1[m + n] + sign2 * j2[m + n]);
      if (n == 0) d[m][n] += qubit[m];
    }
  }
  return d;
}

inline double potential(const CircuitModel& c, const FluxBias& f, double q, double r) {
  const double u1 = jet(c.b1, 0.5 * (r + q), branch_flux(c.b1, f.phi_x))[0];
  const double u2 = jet(c.b2, 0.5 * (r - q), branch_flux(c.b2, f.phi_x))[0];
  return u1 + u2 - c.E_Jq * std::cos(q + f.phi_Xb);
}

}  // namespace detail

/// Two-mode potential energy U(phi_q, phi_r) in GHz.
inline double potential(const CircuitParams& p, const FluxBias& f, double phi_q, double phi_r) {
  validate(p);
  return detail::potential(detail::circuit_model(p), f, phi_q, phi_r);
}

/// Partial derivatives of U at (phi_q, phi_r) assembled from the branch jets.
inline PartialTable potential_partials(const CircuitParams& p, const FluxBias& f, double phi_q,
                                       double phi_r) {
  validate(p);
  return detail::partials(detail::circuit_model(p), f, phi_q, phi_r);
}

struct KineticCoefficients {
  double E_C = 0.0;   // qubit charging energy e^2/(2 C_q + C), GHz
  double C_r = 0.0;   // resonator mode capacitance, fF
  double E_Cr = 0.0;  // e^2 / C_r, GHz
};

inline KineticCoefficients kinetic_coefficients(const CircuitParams& p) {
  return {charging_energy(p.C_q, p.C), p.C, capacitive_energy(p.C)};
}

// ---------------------------------------------------------------------------
// Feasibility

struct Band {
  double f_lo = 6.0;  // GHz
  double f_hi = 8.0;  // GHz
};

struct FeasibilityReport {
  double L_max = std::numeric_limits<double>::quiet_NaN();   // nH
  double L_crit = std::numeric_limits<double>::quiet_NaN();  // nH (non-adapted)
  double k_crit = std::numeric_limits<double>::quiet_NaN();  // adapted only
  double invertibility_margin = std::numeric_limits<double>::infinity();
  double omega_r_max = std::numeric_limits<double>::quiet_NaN();  // GHz, at phi_x = 0
  double omega_r_min = std::numeric_limits<double>::quiet_NaN();  // GHz, at phi_x = k pi
  bool band_ok = false;
  bool double_well_ok = false;
  bool array_ok = true;
  std::vector<std::string> messages;

  bool ok() const { return band_ok && double_well_ok && array_ok && invertibility_margin > 0.0; }
};

namespace detail {

constexpr double kBandSlack = 1e-9;  // GHz

// Resonator-mode curvature d^2U/dphi_r^2 at the origin, which is stationary
// whenever phi_x is a multiple of k pi.
inline double resonator_curvature(const CircuitModel& c, double phi_x) {
  return partials(c, {phi_x, 0.0}, 0.0, 0.0)[0][2];
}

inline double qubit_curvature(const CircuitModel& c, double phi_x, double phi_Xb) {
  return partials(c, {phi_x, phi_Xb}, 0.0, 0.0)[2][0];
}

// omega_r^2 ratio between the flux extremes; independent of C.
inline double resonator_tuning_ratio(CircuitParams p, double l) {
  p.L = l;
  try {
    auto c = circuit_model(p);
    const double kpi = p.k * std::numbers::pi;
    const double hi = resonator_curvature(c, 0.0);
    const double lo = resonator_curvature(c, kpi);
    return hi > 0.0 ? lo / hi : -1.0;
  } catch (const InvertibilityError&) {
    return -1.0;
  }
}

inline double max_inductance(const CircuitParams& p, const Band& band) {
  const double rho = (band.f_lo / band.f_hi) * (band.f_lo / band.f_hi);
  double lo = 1e-6, hi = 1e4;
  if (resonator_tuning_ratio(p, hi) >= rho) return std::numeric_limits<double>::infinity();
  if (resonator_tuning_ratio(p, lo) < rho) return 0.0;
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    (resonator_tuning_ratio(p, mid) >= rho ? lo : hi) = mid;
  }
  return lo;
}

// Smallest L with E_L (1 + eta(L)) = E_Jq at the most negative eta. The
// self-consistency condition is linear in L and solved in closed form.
inline double critical_inductance(const CircuitParams& p) {
  if (p.E_Jq == 0.0) return std::numeric_limits<double>::infinity();
  const double a = units::flux_energy_ghz_nh / (2.0 * p.E_Jq);
  const double b = p.E_Jsigma / (2.0 * p.k * units::flux_energy_ghz_nh);
  return a / (1.0 + a * b);
}

// Smallest real junction count giving non-negative qubit curvature at
// phi_Xb = pi, phi_x = k pi.
inline double critical_junction_count(const CircuitParams& p) {
  auto curvature = [&](double k) {
    try {
      return qubit_curvature(circuit_model(p, k), k * std::numbers::pi, std::numbers::pi);
    } catch (const InvertibilityError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const auto probe = circuit_model(p, 1.0);
  const auto coef = coefficients(probe.b1);
  const auto coef2 = coefficients(probe.b2);
  // Below max(beta/gamma) one of the branches stops being invertible.
  double lo = std::max({coef.beta / coef.gamma, coef2.beta / coef2.gamma, 1e-6}) * (1.0 + 1e-9);
  if (curvature(lo) >= 0.0) return lo;
  double hi = std::max(2.0 * lo, 1.0);
  while (curvature(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e6) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (curvature(mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace detail

/// Frequency-band, double-well, invertibility and array-fabrication checks.
/// Violations are reported in the returned messages, never thrown.
inline FeasibilityReport feasibility_check(const CircuitParams& p, const Band& band,
                                           std::optional<double> E_Ci = std::nullopt) {
  if (!(band.f_lo < band.f_hi)) throw DomainError("feasibility_check: band requires f_lo < f_hi");
  validate(p);
  FeasibilityReport rep;
  auto note = [&](const std::string& s) { rep.messages.push_back(s); };
  std::ostringstream os;

  if (p.variant == Variant::Adapted) {
    auto [s1, s2] = branch_specs(p);
    rep.invertibility_margin = std::min(invertibility_margin(s1), invertibility_margin(s2));
    if (!(rep.invertibility_margin > 0.0)) note("invertibility: k*gamma/beta <= 1, potential is multi-valued");
  }

  rep.L_max = detail::max_inductance(p, band);

  if (rep.invertibility_margin > 0.0) {
    const auto model = detail::circuit_model(p);
    const double ec_r = capacitive_energy(p.C);
    const double hi = detail::resonator_curvature(model, 0.0);
    const double lo = detail::resonator_curvature(model, p.k * std::numbers::pi);
    rep.omega_r_max = hi > 0.0 ? std::sqrt(8.0 * ec_r * hi) : std::numeric_limits<double>::quiet_NaN();
    rep.omega_r_min = lo > 0.0 ? std::sqrt(8.0 * ec_r * lo) : std::numeric_limits<double>::quiet_NaN();
    rep.band_ok = rep.omega_r_max <= band.f_hi + detail::kBandSlack &&
                  rep.omega_r_min >= band.f_lo - detail::kBandSlack;
    if (!rep.band_ok) {
      os.str("");
      os << "band: omega_r/2pi spans [" << rep.omega_r_min << ", " << rep.omega_r_max
         << "] GHz, outside [" << band.f_lo << ", " << band.f_hi << "]";
      note(os.str());
    }
  } else {
    note("band: not evaluated for a non-invertible branch");
  }

  if (p.variant == Variant::Adapted) {
    rep.k_crit = detail::critical_junction_count(p);
    rep.double_well_ok = p.k > rep.k_crit;
    if (!rep.double_well_ok) {
      os.str("");
      os << "double_well: k = " << p.k << " is not above k_crit = " << rep.k_crit;
      note(os.str());
    }
  } else {
    rep.L_crit = detail::critical_inductance(p);
    rep.double_well_ok = p.L < rep.L_crit;
    if (!rep.double_well_ok) {
      os.str("");
      os << "double_well: L = " << p.L << " nH is not below L_crit = " << rep.L_crit << " nH";
      note(os.str());
    }
  }

  if (E_Ci) {
    const double eji = p.E_Jsigma / 2.0;
    const double plasma = std::sqrt(8.0 * *E_Ci * eji);
    if (!(plasma > 20.0)) {
      os.str("");
      os << "array: junction plasma frequency " << plasma << " GHz is not above 20 GHz";
      note(os.str());
      rep.array_ok = false;
    }
    if (!(eji / *E_Ci >= 100.0)) {
      os.str("");
      os << "array: E_Ji/E_Ci = " << eji / *E_Ci << " is below 100 (phase slips)";
      note(os.str());
      rep.array_ok = false;
    }
  }
  return rep;
}

}  // namespace istq
