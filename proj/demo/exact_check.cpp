// Compares perturbative anharmonicities and the dispersive shift against
// exact diagonalization for the second built-in parameter set.

#include <cstdio>
#include <numbers>

#include "istq/istq.hpp"

int main() {
  using namespace istq;
  const CircuitParams p = presets::table(2);
  const double kpi = p.k * std::numbers::pi;

  std::printf("%9s %12s %12s %12s %12s %11s\n", "phi_x/kpi", "a_q pert", "a_q exact", "w_r pert", "w_r exact",
              "chi MHz");
  for (double mu : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto s = solve_oracle(p, {mu * kpi, 0.0});
    std::printf("%9.2f %12.5f %12.5f %12.5f %12.5f %11.4f\n", mu, s.point.alpha_q, exact_qubit_anharmonicity(s),
                s.point.omega_r + s.point.alpha_r, exact_resonator_frequency(s), dispersive_shift(s));
  }

  const auto d = longitudinal_displacement(p, {kpi / 2, 0.0});
  std::printf("\nresonator displacement at k pi/2: %.4g rad (estimate %.4g rad)\n", d.measured, d.predicted);
}
