#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fd.hpp"
#include "istq/fluxsweep.hpp"
#include "istq/presets.hpp"
#include "istq/quantizer.hpp"
#include "istq/search.hpp"

using namespace istq;
using istq_test::fd_derivative;

namespace {
constexpr double kPi = std::numbers::pi;

// Zooming brute-force scan for the lowest point of U in a box.
Minimum grid_scan(const CircuitParams& p, const FluxBias& f, double half) {
  double cq = 0.0, cr = 0.0;
  for (int level = 0; level < 8; ++level) {
    double best = 1e300, bq = cq, br = cr;
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j) {
        const double q = cq + half * i / 20.0, r = cr + half * j / 20.0;
        const double u = potential(p, f, q, r);
        if (u < best) {
          best = u;
          bq = q;
          br = r;
        }
      }
    cq = bq;
    cr = br;
    half /= 10.0;
  }
  return {cq, cr};
}

void expect_rel(double a, double b, double rel, const char* what) {
  EXPECT_NEAR(a, b, rel * std::max(std::abs(a), std::abs(b)) + 1e-12) << what;
}
}  // namespace

TEST(Quantizer, MinimumAtSymmetricFluxes) {
  const auto p = presets::single_junction();
  for (const FluxBias f : {FluxBias{0, 0}, FluxBias{kPi, 0}, FluxBias{0, kPi}}) {
    const auto m = find_minimum(p, f);
    EXPECT_NEAR(m.phi_q, 0.0, 1e-12);
    EXPECT_NEAR(m.phi_r, 0.0, 1e-12);
  }
}

TEST(Quantizer, MinimumAtQuarterFluxMatchesGridScan) {
  const auto p = presets::single_junction();
  const FluxBias f{kPi / 2, 0};
  const auto m = find_minimum(p, f);
  const auto g = grid_scan(p, f, 1.0);
  EXPECT_GT(std::abs(m.phi_r), 1e-3);
  EXPECT_NEAR(m.phi_q, g.phi_q, 1e-6);
  EXPECT_NEAR(m.phi_r, g.phi_r, 1e-6);
  const auto d = potential_partials(p, f, m.phi_q, m.phi_r);
  EXPECT_LT(std::hypot(d[1][0], d[0][1]), 1e-10);
}

TEST(Quantizer, WarmStartReachesSameMinimum) {
  const auto p = presets::junction_array();
  const FluxBias f{0.4 * p.k * kPi, 0};
  const FluxBias near{0.38 * p.k * kPi, 0};
  const auto cold = find_minimum(p, f);
  const auto warm = find_minimum(p, f, WarmStart{near, find_minimum(p, near)});
  EXPECT_NEAR(cold.phi_q, warm.phi_q, 1e-10);
  EXPECT_NEAR(cold.phi_r, warm.phi_r, 1e-10);
}

TEST(Quantizer, DoubleWellThrows) {
  auto p = presets::single_junction();
  p.L = 7.0;
  EXPECT_THROW(find_minimum(p, {kPi, kPi}), DoubleWellError);
  try {
    find_minimum(p, {kPi, kPi});
  } catch (const DoubleWellError& e) {
    EXPECT_NEAR(e.phi_x(), kPi, 1e-12);
  }
}

TEST(Quantizer, TaylorExamplesAtZeroFlux) {
  const auto p = presets::single_junction();
  const auto t = taylor_expand(p, {0, 0}, find_minimum(p, {0, 0}));
  EXPECT_NEAR(2 * t.c[2][0], 33.15, 0.05);
  EXPECT_NEAR(t.c[1][1], 0.4, 1e-10);
  EXPECT_NEAR(t.U0, -30.0, 1e-12);
  EXPECT_THROW(taylor_expand(p, {kPi / 2, 0}, {0, 0}), DomainError);
}

TEST(Quantizer, OddQubitCoefficientsVanishWhenSymmetric) {
  for (auto p : {presets::single_junction(), presets::junction_array(), presets::adapted()}) {
    p.d = 0.0;
    for (double xb : {0.0, kPi})
      for (double mu : {0.0, 0.3, 0.7}) {
        const FluxBias f{mu * p.k * kPi, xb};
        const auto t = taylor_expand(p, f, find_minimum(p, f));
        for (int m = 1; m <= 3; m += 2)
          for (int n = 0; m + n <= 4; ++n) EXPECT_NEAR(t.c[m][n], 0.0, 1e-10) << m << n;
      }
  }
}

TEST(Quantizer, TaylorMatchesFiniteDifferences) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> mu(0.0, 1.0), pick(-1.0, 1.0);
  const CircuitParams bases[] = {presets::single_junction(), presets::junction_array(), presets::adapted()};
  for (int trial = 0; trial < 12; ++trial) {
    CircuitParams p = bases[trial % 3];
    p.E_Jq *= 1.0 + 0.1 * pick(rng);
    p.E_Jsigma *= 1.0 + 0.1 * pick(rng);
    p.d = 0.1 * pick(rng);
    p.deltaL = 0.02 * pick(rng);
    const FluxBias f{mu(rng) * p.k * kPi, trial % 2 ? kPi : 0.0};
    const auto x = find_minimum(p, f);
    const auto t = taylor_expand(p, f, x);
    const double scale = p.E_Jq + p.E_Jsigma;

    // Second order straight from U.
    auto u = [&](double q, double r) { return potential(p, f, q, r); };
    auto d2q = [&](double h) { return (u(x.phi_q + h, x.phi_r) - 2 * t.U0 + u(x.phi_q - h, x.phi_r)) / (h * h); };
    auto d2r = [&](double h) { return (u(x.phi_q, x.phi_r + h) - 2 * t.U0 + u(x.phi_q, x.phi_r - h)) / (h * h); };
    const double fq = (16 * d2q(5e-4) - d2q(1e-3)) / 15, fr = (16 * d2r(5e-4) - d2r(1e-3)) / 15;
    EXPECT_NEAR(2 * t.c[2][0], fq, 1e-6 * (std::abs(fq) + 1e-3 * scale));
    EXPECT_NEAR(2 * t.c[0][2], fr, 1e-6 * (std::abs(fr) + 1e-3 * scale));

    // Higher orders one step at a time from the analytic partial below.
    static constexpr double fact[5] = {1, 1, 2, 6, 24};
    for (int m = 0; m <= 4; ++m)
      for (int n = 0; m + n <= 4; ++n) {
        if (m + n < 2) continue;
        const bool along_q = m > 0;
        const int lm = along_q ? m - 1 : m, ln = along_q ? n : n - 1;
        auto lower = [&](double s) {
          const double q = along_q ? s : x.phi_q, r = along_q ? x.phi_r : s;
          return potential_partials(p, f, q, r)[lm][ln];
        };
        const double fd = fd_derivative(lower, along_q ? x.phi_q : x.phi_r) / (fact[m] * fact[n]);
        EXPECT_NEAR(t.c[m][n], fd, 1e-6 * (std::abs(fd) + 1e-3 * scale)) << "c" << m << n << " trial " << trial;
      }
  }
}

TEST(Quantizer, ModesAtZeroFlux) {
  const auto p = presets::single_junction();
  const auto s = analyze_point(p, {0, 0});
  EXPECT_NEAR(s.omega_q, 6.36, 0.01);
  EXPECT_NEAR(s.omega_r, 7.94, 0.01);
  EXPECT_NEAR(s.EJq_eff, 33.15, 0.05);
  EXPECT_NEAR(s.eta, 0.2755, 0.001);
  EXPECT_NEAR(s.lambda_q, 0.3097, 5e-4);
  EXPECT_NEAR(s.lambda_r, 0.4138, 5e-4);
}

TEST(Quantizer, ImpedanceAtQuarterFlux) {
  const auto p = presets::single_junction();
  const auto s = closed_form_point(p, {kPi / 2, 0});
  EXPECT_NEAR(s.eta, 0.0, 1e-15);
  EXPECT_NEAR(s.Z0, 397.0, 1.0);
  EXPECT_NEAR(s.lambda_r, 0.440, 0.002);
  const double lr = 2 * kPi / PhysConstants::Phi0 * std::sqrt(PhysConstants::hbar * s.Z0 / 2);
  EXPECT_NEAR(s.lambda_r, lr, 1e-10);
  // Same relation holds for the numerical pipeline.
  const auto n = analyze_point(p, {kPi / 2, 0});
  EXPECT_NEAR(n.lambda_r, 2 * kPi / PhysConstants::Phi0 * std::sqrt(PhysConstants::hbar * n.Z0 / 2), 1e-10);
}

TEST(Quantizer, CouplingExamples) {
  const auto p = presets::single_junction();
  EXPECT_NEAR(closed_form_point(p, {0, 0}).g.g_xx, 51.0, 1.0);
  EXPECT_NEAR(std::abs(closed_form_point(p, {kPi / 2, 0}).g.g_zx), 57.0, 1.5);
  for (const auto& q : {presets::single_junction(), presets::junction_array(), presets::adapted()})
    for (double xb : {0.0, kPi}) {
      const auto s = analyze_point(q, {0, xb});
      EXPECT_NEAR(s.g.g_zx, 0.0, 1e-9);
      EXPECT_NEAR(s.g.g_xz, 0.0, 1e-9);
    }
}

TEST(Quantizer, AnharmonicityExamples) {
  const auto p = presets::single_junction();
  const auto s = analyze_point(p, {0, 0});
  EXPECT_NEAR(1e3 * s.alpha_q, -51.8, 0.5);
  EXPECT_NEAR(100 * s.alpha_q_rel, -0.8, 0.05);
  for (const auto& q : {presets::single_junction(), presets::junction_array()})
    EXPECT_NEAR(closed_form_point(q, {q.k * kPi / 2, 0}).alpha_r, 0.0, 1e-15);
  double peak = -1.0;
  for (int i = 0; i <= 50; ++i) peak = std::max(peak, analyze_point(p, {kPi * i / 50.0, kPi}).alpha_q_rel);
  EXPECT_GT(peak, 0.0);
}

TEST(Quantizer, PiBiasQubitFrequency) {
  const auto p = presets::single_junction();
  const auto s = analyze_point(p, {kPi, kPi});
  EXPECT_GE(s.Delta, 2.5);
  EXPECT_LE(s.Delta, 4.0);
  const auto c = closed_form_point(p, {0, kPi});
  const double el = inductance_energy(p.L);
  EXPECT_NEAR(c.omega_q, std::sqrt(8 * c.E_C * (el * (1 + c.eta) - p.E_Jq)), 1e-12);
}

TEST(Quantizer, AdaptedZeroFluxResonator) {
  EXPECT_NEAR(analyze_point(presets::adapted(), {0, 0}).omega_r, 8.0, 0.15);
}

TEST(Quantizer, ClosedFormMatchesNumericAtSymmetricFlux) {
  for (const auto& p : {presets::single_junction(), presets::junction_array()})
    for (double mu : {0.0, 1.0})
      for (double xb : {0.0, kPi}) {
        const FluxBias f{mu * p.k * kPi, xb};
        const auto n = analyze_point(p, f);
        const auto c = closed_form_point(p, f);
        const double r = 1e-6;
        expect_rel(n.omega_r, c.omega_r, r, "omega_r");
        expect_rel(n.omega_q, c.omega_q, r, "omega_q");
        expect_rel(n.Delta, c.Delta, r, "Delta");
        expect_rel(n.alpha_q, c.alpha_q, r, "alpha_q");
        expect_rel(n.alpha_r, c.alpha_r, r, "alpha_r");
        expect_rel(n.g.g_xx, c.g.g_xx, r, "g_xx");
        expect_rel(n.g.g_zz, c.g.g_zz, r, "g_zz");
        EXPECT_NEAR(n.g.g_zx, c.g.g_zx, 1e-9);
        EXPECT_NEAR(n.g.g_xz, c.g.g_xz, 1e-9);
        expect_rel(n.eta, c.eta, r, "eta");
        expect_rel(n.lambda_q, c.lambda_q, r, "lambda_q");
        expect_rel(n.lambda_r, c.lambda_r, r, "lambda_r");
        expect_rel(n.Z0, c.Z0, r, "Z0");
      }
}

TEST(Quantizer, ClosedFormRejectsUnsupportedInputs) {
  EXPECT_THROW(closed_form_point(presets::adapted(), {0, 0}), UnsupportedVariantError);
  EXPECT_THROW(closed_form_point(presets::single_junction(), {0, 1.0}), DomainError);
}

TEST(Quantizer, ParitySelectionWithoutAsymmetry) {
  for (auto p : {presets::single_junction(), presets::junction_array(), presets::adapted()}) {
    p.d = 0.0;
    for (double mu : {0.1, 0.45, 0.8}) {
      const auto s = analyze_point(p, {mu * p.k * kPi, 0});
      EXPECT_NEAR(s.g.g_xx, 0.0, 1e-9);
      EXPECT_NEAR(s.g.g_xz, 0.0, 1e-9);
    }
  }
}

TEST(Quantizer, LongitudinalCouplingFlatInAsymmetry) {
  for (auto p : {presets::single_junction(), presets::junction_array(), presets::adapted()}) {
    const double dd = 0.01;
    const FluxBias f{0.5 * p.k * kPi, 0};
    p.d = 0.0;
    const double g0 = analyze_point(p, f).g.g_zx;
    p.d = dd;
    const double gp = analyze_point(p, f).g.g_zx;
    p.d = -dd;
    const double gm = analyze_point(p, f).g.g_zx;
    EXPECT_LT(std::abs(gp - gm) / (2 * dd), 1e-3 * std::abs(g0) / dd);
  }
}

TEST(Quantizer, RelativeAnharmonicityAboveThreshold) {
  for (int n = 1; n <= 3; ++n) {
    const auto p = presets::table(n);
    for (double xb : {0.0, kPi}) {
      const auto t = sweep(p, xb, SweepGrid{101});
      for (const auto& r : t.rows) EXPECT_GE(std::abs(r.alpha_q_rel), kMinRelativeAnharmonicity) << n << " " << xb;
    }
  }
}
