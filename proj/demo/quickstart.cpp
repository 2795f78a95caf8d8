// Spectrum and couplings of the first built-in parameter set at a few biases.

#include <cstdio>
#include <numbers>

#include "istq/istq.hpp"

int main() {
  using namespace istq;
  const CircuitParams p = presets::table(1);
  const double kpi = p.k * std::numbers::pi;

  std::printf("%8s %8s %9s %9s %9s %9s %9s %9s\n", "phi_x/kpi", "phi_Xb", "w_r GHz", "Delta GHz", "g_xx MHz",
              "g_zx MHz", "g_zz MHz", "a_q/D %");
  for (double xb : {0.0, std::numbers::pi})
    for (double mu : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto s = analyze_point(p, {mu * kpi, xb});
      std::printf("%8.2f %8s %9.4f %9.4f %9.3f %9.3f %9.3f %9.3f\n", mu, xb == 0.0 ? "0" : "pi", s.omega_r, s.Delta,
                  s.g.g_xx, s.g.g_zx, s.g.g_zz, 100 * s.alpha_q_rel);
    }

  const auto r = feasibility_check(p, Band{});
  std::printf("\nL_max = %.3f nH, L_crit = %.3f nH, band %s\n", r.L_max, r.L_crit, r.band_ok ? "ok" : "violated");
}
