#pragma once

// Physical constants and the lab-unit <-> internal-unit conversions.
//
// Internal units: energies are E/h in GHz, inductances in nH, capacitances
// in fF, phases in radians. Couplings are reported as g/2pi in MHz.

#include <numbers>

#include "istq/errors.hpp"

namespace istq {

struct PhysConstants {
  static constexpr double h = 6.62607015e-34;     // J s
  static constexpr double e = 1.602176634e-19;    // C
  static constexpr double hbar = h / (2.0 * std::numbers::pi);
  static constexpr double Phi0 = h / (2.0 * e);   // Wb
};

namespace units {

constexpr double GHz = 1e9;
constexpr double nH = 1e-9;
constexpr double fF = 1e-15;

constexpr double joule_from_ghz(double ghz) { return ghz * GHz * PhysConstants::h; }
constexpr double ghz_from_joule(double j) { return j / (GHz * PhysConstants::h); }
constexpr double henry_from_nh(double l) { return l * nH; }
constexpr double nh_from_henry(double l) { return l / nH; }
constexpr double farad_from_ff(double c) { return c * fF; }
constexpr double ff_from_farad(double c) { return c / fF; }

/// (Phi0/2pi)^2 / h in GHz nH. Multiplying a phase^2 by this and dividing by
/// an inductance in nH gives an energy in GHz.
constexpr double flux_energy_ghz_nh =
    (PhysConstants::Phi0 / (2.0 * std::numbers::pi)) *
    (PhysConstants::Phi0 / (2.0 * std::numbers::pi)) / PhysConstants::h / GHz / nH;

/// e^2 / h in GHz fF.
constexpr double charge_energy_ghz_ff =
    PhysConstants::e * PhysConstants::e / PhysConstants::h / GHz / fF;

}  // namespace units

/// E_L = (Phi0/2pi)^2 / (2 L), in GHz.
inline double inductance_energy(double l_nh) {
  if (!(l_nh > 0.0)) throw DomainError("inductance_energy: L must be positive");
  return units::flux_energy_ghz_nh / (2.0 * l_nh);
}

/// Qubit charging energy E_C = e^2 / (2 C_q + C), in GHz.
inline double charging_energy(double c_q_ff, double c_ff) {
  const double total = 2.0 * c_q_ff + c_ff;
  if (!(total > 0.0)) throw DomainError("charging_energy: 2 C_q + C must be positive");
  return units::charge_energy_ghz_ff / total;
}

/// e^2 / C for a single capacitance, in GHz.
inline double capacitive_energy(double c_ff) {
  if (!(c_ff > 0.0)) throw DomainError("capacitive_energy: C must be positive");
  return units::charge_energy_ghz_ff / c_ff;
}

/// Capacitance (fF) whose e^2/C equals the given energy (GHz).
inline double capacitance_from_energy(double e_ghz) {
  if (!(e_ghz > 0.0)) throw DomainError("capacitance_from_energy: energy must be positive");
  return units::charge_energy_ghz_ff / e_ghz;
}

}  // namespace istq
