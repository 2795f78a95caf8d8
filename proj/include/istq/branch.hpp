#pragma once

// One coupling branch of the circuit: a k-junction array shunted by an
// inductance L (Direct), or the same pair placed behind a series inductance
// L_a (SeriesInductance). Energies are functions of the total branch phase.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "istq/errors.hpp"
#include "istq/physconst.hpp"

namespace istq {

enum class BranchKind { Direct, SeriesInductance };

struct BranchSpec {
  BranchKind kind = BranchKind::Direct;
  double E_J = 0.0;  // Josephson energy of each array junction, GHz
  int k = 1;         // junctions in the array
  double L = 0.0;    // shunt inductance, nH
  double L_a = 0.0;  // series inductance, nH (SeriesInductance only)
  int m = 0;         // flux quanta trapped in the array, fixed per analysis
};

struct BranchCoefficients {
  double beta = 0.0;   // screening parameter (2pi/Phi0)^2 L_a E_J
  double gamma = 1.0;  // 1 + L_a / L
};

/// Energy and its first four derivatives with respect to the branch phase.
using BranchJet = std::array<double, 5>;

namespace detail {

// Junction count is real-valued here so the critical array size can be
// located by bisection; BranchSpec itself only admits integer k.
struct BranchModel {
  BranchKind kind = BranchKind::Direct;
  double E_J = 0.0;
  double k = 1.0;
  double L = 0.0;
  double L_a = 0.0;
  double m = 0.0;
};

inline BranchModel model_of(const BranchSpec& s) {
  return {s.kind, s.E_J, static_cast<double>(s.k), s.L, s.L_a, static_cast<double>(s.m)};
}

inline BranchCoefficients coefficients(const BranchModel& b) {
  if (b.kind == BranchKind::Direct) return {0.0, 1.0};
  return {b.L_a * b.E_J / units::flux_energy_ghz_nh, 1.0 + b.L_a / b.L};
}

inline double margin(const BranchModel& b) {
  if (b.kind == BranchKind::Direct) return std::numeric_limits<double>::infinity();
  const auto c = coefficients(b);
  if (c.beta == 0.0) return std::numeric_limits<double>::infinity();
  return b.k * c.gamma / c.beta - 1.0;
}

inline void require_invertible(const BranchModel& b) {
  const double mg = margin(b);
  if (!(mg > 0.0)) {
    std::ostringstream os;
    os << "series-inductance branch is not invertible: k*gamma/beta = " << mg + 1.0
       << " <= 1";
    throw InvertibilityError(os.str(), mg + 1.0);
  }
}

// Solves gamma*x + beta*sin((x - phi_x + 2 pi m)/k) = phi for x. The left side
// is strictly increasing when k*gamma/beta > 1, and |beta sin| <= beta pins
// the root inside [(phi - beta)/gamma, (phi + beta)/gamma].
inline double invert(const BranchModel& b, double phi, double phi_x) {
  require_invertible(b);
  const auto c = coefficients(b);
  const double shift = phi_x - 2.0 * std::numbers::pi * b.m;
  auto forward = [&](double x) { return c.gamma * x + c.beta * std::sin((x - shift) / b.k) - phi; };
  auto slope = [&](double x) { return c.gamma + c.beta / b.k * std::cos((x - shift) / b.k); };

  double lo = (phi - c.beta) / c.gamma;
  double hi = (phi + c.beta) / c.gamma;
  double x = phi / c.gamma;
  for (int it = 0; it < 100; ++it) {
    const double g = forward(x);
    if (g == 0.0) return x;
    if (g > 0.0) hi = x; else lo = x;
    double next = x - g / slope(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 1e-15 * (1.0 + std::abs(x)) || hi - lo <= 1e-15 * (1.0 + std::abs(x))) return x;
  }
  throw ConvergenceError("invert_branch_phase: no convergence in 100 iterations");
}

inline BranchJet jet(const BranchModel& b, double phi, double phi_x) {
  if (b.kind == BranchKind::Direct) {
    const double u = (phi + phi_x + 2.0 * std::numbers::pi * b.m) / b.k;
    const double el = units::flux_energy_ghz_nh / (2.0 * b.L);
    const double s = std::sin(u), co = std::cos(u);
    return {-b.k * b.E_J * co + el * phi * phi,
            b.E_J * s + 2.0 * el * phi,
            b.E_J / b.k * co + 2.0 * el,
            -b.E_J / (b.k * b.k) * s,
            -b.E_J / (b.k * b.k * b.k) * co};
  }

  const auto c = coefficients(b);
  const double ela = units::flux_energy_ghz_nh / (2.0 * b.L_a);
  const double el2 = units::flux_energy_ghz_nh / b.L;  // 2 E_L
  const double pd = invert(b, phi, phi_x);
  const double s = (pd - phi_x + 2.0 * std::numbers::pi * b.m) / b.k;
  const double sn = std::sin(s), cs = std::cos(s);
  // Derivatives of the forward map phi(phi_d).
  const double g1 = c.gamma + c.beta / b.k * cs;
  const double g2 = -c.beta / (b.k * b.k) * sn;
  // 2 E_La times g2 and g3, written without E_La so tiny L_a stays exact.
  const double eg2 = -b.E_J / (b.k * b.k) * sn;
  const double eg3 = -b.E_J / (b.k * b.k * b.k) * cs;
  // phi - phi_d from the forward map rather than by subtraction.
  const double drop = (c.gamma - 1.0) * pd + c.beta * sn;
  // Force balance on the internal node gives dU/dphi = 2 E_La (phi - phi_d).
  return {ela * drop * drop + 0.5 * el2 * pd * pd - b.k * b.E_J * cs,
          el2 * pd + b.E_J * sn,
          (el2 + b.E_J / b.k * cs) / g1,
          eg2 / (g1 * g1 * g1),
          -(3.0 * g2 * eg2 - g1 * eg3) / std::pow(g1, 5)};
}

}  // namespace detail

inline void validate(const BranchSpec& s) {
  if (s.k < 1) throw DomainError("branch: k must be >= 1");
  if (!(s.E_J >= 0.0) || !std::isfinite(s.E_J)) throw DomainError("branch: E_J must be finite and >= 0");
  if (!(s.L > 0.0)) throw DomainError("branch: L must be positive");
  if (s.kind == BranchKind::SeriesInductance && !(s.L_a > 0.0 && std::isfinite(s.L_a)))
    throw DomainError("branch: series inductance L_a must be positive");
}

inline BranchCoefficients branch_coefficients(const BranchSpec& s) {
  return detail::coefficients(detail::model_of(s));
}

/// k*gamma/beta - 1; positive iff the series branch has a single-valued potential.
/// Direct branches have no internal phase and report +infinity.
inline double invertibility_margin(const BranchSpec& s) {
  validate(s);
  return detail::margin(detail::model_of(s));
}

/// Internal array phase phi_d for total branch phase phi.
inline double invert_branch_phase(const BranchSpec& s, double phi, double phi_x) {
  validate(s);
  if (s.kind == BranchKind::Direct) return phi;
  return detail::invert(detail::model_of(s), phi, phi_x);
}

inline double branch_energy(const BranchSpec& s, double phi, double phi_x) {
  validate(s);
  return detail::jet(detail::model_of(s), phi, phi_x)[0];
}

/// Element n is d^n U / d phi^n for n = 0..max_order (element 0 is U itself).
inline std::vector<double> branch_derivatives(const BranchSpec& s, double phi, double phi_x,
                                              int max_order = 4) {
  if (max_order < 0 || max_order > 4) throw DomainError("branch_derivatives: max_order must be in [0, 4]");
  validate(s);
  const auto j = detail::jet(detail::model_of(s), phi, phi_x);
  return {j.begin(), j.begin() + max_order + 1};
}

}  // namespace istq
