#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "istq/fluxsweep.hpp"
#include "istq/presets.hpp"

using namespace istq;

namespace {
constexpr double kPi = std::numbers::pi;

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("istq_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

template <class F>
int extrema(const SweepTable& t, F get) {
  int n = 0;
  for (std::size_t i = 1; i + 1 < t.rows.size(); ++i) {
    const double a = get(t.rows[i - 1]), b = get(t.rows[i]), c = get(t.rows[i + 1]);
    if ((b - a) * (c - b) < 0) ++n;
  }
  return n;
}
}  // namespace

TEST(FluxSweep, GridCoversZeroToKPi) {
  const auto p = presets::junction_array();
  const auto t = sweep(p, 0.0, SweepGrid{11});
  ASSERT_EQ(t.rows.size(), 11u);
  EXPECT_EQ(t.rows.front().flux.phi_x, 0.0);
  EXPECT_EQ(t.rows.back().flux.phi_x, p.k * kPi);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GT(t.rows[i].flux.phi_x, t.rows[i - 1].flux.phi_x);
  for (const auto& r : t.rows) EXPECT_EQ(r.flux.phi_Xb, 0.0);
  EXPECT_EQ(t.version, kVersion);
  EXPECT_THROW(sweep(p, 0.0, SweepGrid{0}), DomainError);
  EXPECT_THROW(sweep(p, 0.0, SweepGrid{5, 1.0, 0.5}), DomainError);
}

TEST(FluxSweep, SinglePointEqualsAnalyzePoint) {
  const auto p = presets::single_junction();
  const auto t = sweep(p, 0.0, SweepGrid{1, 0.0, 0.0});
  const auto s = analyze_point(p, {0, 0});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].omega_r, s.omega_r);
  EXPECT_EQ(t.rows[0].Delta, s.Delta);
  EXPECT_EQ(t.rows[0].g.g_xx, s.g.g_xx);
}

TEST(FluxSweep, FeaturesTable1) {
  const auto f = extract_features(sweep(presets::single_junction(), 0.0));
  EXPECT_NEAR(f.g_zx_max, 53, 5.3);
  EXPECT_NEAR(f.g_xx_max, 49, 4.9);
  EXPECT_NEAR(f.g_zz_max, 5, 1.0);
  EXPECT_NEAR(f.g_xz_max, 6, 1.2);
  ASSERT_TRUE(f.gxx_zero_flux);
  EXPECT_GT(*f.gxx_zero_flux, 0.0);
  EXPECT_LT(*f.gxx_zero_flux, kPi);
  EXPECT_GT(f.g_zx_max_flux, 0.0);
  EXPECT_LT(f.g_zx_max_flux, kPi);
}

TEST(FluxSweep, FeaturesTable3) {
  const auto f = extract_features(sweep(presets::adapted(), 0.0));
  EXPECT_NEAR(f.g_zx_max, 10, 1.0);
  EXPECT_NEAR(f.g_xx_max, 9, 0.9);
}

TEST(FluxSweep, ClosedFormCrossingAtHalfPeriod) {
  for (const auto& p : {presets::single_junction(), presets::junction_array()}) {
    const auto t = sweep(p, 0.0, SweepGrid{200}, SweepOptions{Model::ClosedForm});
    const auto f = extract_features(t);
    ASSERT_TRUE(f.gxx_zero_flux);
    EXPECT_NEAR(*f.gxx_zero_flux, p.k * kPi / 2, 1e-9);
  }
}

TEST(FluxSweep, ZeroCrossingRefinedToMicroradian) {
  const auto p = presets::single_junction();
  const auto t = sweep(p, 0.0, SweepGrid{41});
  const auto f = extract_features(t);
  ASSERT_TRUE(f.gxx_zero_flux);
  EXPECT_LT(std::abs(analyze_point(p, {*f.gxx_zero_flux, 0}).g.g_xx), 1e-4);
  const auto coarse = extract_features(t, false);
  EXPECT_NEAR(*coarse.gxx_zero_flux, *f.gxx_zero_flux, kPi / 40);
}

TEST(FluxSweep, QuadratureStructure) {
  for (const auto& p : {presets::single_junction(), presets::junction_array()}) {
    const auto t = sweep(p, 0.0, SweepGrid{101});
    EXPECT_EQ(extrema(t, [](const SpectrumPoint& s) { return s.g.g_zx; }), 1);
    EXPECT_EQ(extrema(t, [](const SpectrumPoint& s) { return s.g.g_xx; }), 0);
    int crossings = 0;
    for (std::size_t i = 1; i < t.rows.size(); ++i)
      if (t.rows[i].g.g_xx * t.rows[i - 1].g.g_xx < 0) ++crossings;
    EXPECT_EQ(crossings, 1);
  }
}

TEST(FluxSweep, AsymmetryZeroOffsetReproducesSymmetric) {
  const auto p = presets::single_junction();
  const auto sym = sweep(p, 0.0, SweepGrid{51});
  const auto a = asymmetric_gxx(p, 0.0, sym);
  EXPECT_EQ(a.g_asym, 0.0);
  for (std::size_t i = 0; i < sym.rows.size(); ++i) EXPECT_EQ(a.total[i], sym.rows[i].g.g_xx);
  EXPECT_EQ(a.crossing, a.symmetric_crossing);
  EXPECT_THROW(asymmetric_gxx(p, 1.0, sym), DomainError);
}

TEST(FluxSweep, AsymmetryShiftsCrossing) {
  const auto p = presets::single_junction();
  const auto sym = sweep(p, 0.0, SweepGrid{201}, SweepOptions{Model::ClosedForm});
  const auto a = asymmetric_gxx(p, 0.01, sym);
  ASSERT_TRUE(a.crossing);
  ASSERT_TRUE(a.shift());
  EXPECT_GT(std::abs(*a.shift()), 0.01);
  EXPECT_NEAR(*a.symmetric_crossing, kPi / 2, 1e-9);

  auto doubled = p;
  doubled.d *= 2;
  const auto b = asymmetric_gxx(doubled, 0.01, sweep(doubled, 0.0, SweepGrid{201}, SweepOptions{Model::ClosedForm}));
  ASSERT_TRUE(b.shift());
  EXPECT_LT(std::abs(*b.shift()), std::abs(*a.shift()));

  const auto num = asymmetric_gxx(p, 0.01, sweep(p, 0.0, SweepGrid{101}));
  EXPECT_TRUE(num.crossing);
  EXPECT_NE(*num.crossing, *num.symmetric_crossing);
}

TEST(FluxSweep, CsvHeaderOnlyForEmptyTable) {
  SweepTable t;
  const auto path = temp_path("empty.csv");
  write_table(t, path);
  EXPECT_EQ(slurp(path), std::string(kCsvHeader) + "\n");
  EXPECT_TRUE(read_table(path, presets::single_junction()).rows.empty());
  std::filesystem::remove(path);
}

TEST(FluxSweep, CsvThreeRowsFourLines) {
  const auto t = sweep(presets::single_junction(), 0.0, SweepGrid{3});
  const auto path = temp_path("three.csv");
  write_table(t, path);
  std::istringstream in(slurp(path));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], kCsvHeader);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 13);
  std::filesystem::remove(path);
}

TEST(FluxSweep, CsvRoundTripIsBitExact) {
  const auto p = presets::junction_array();
  const auto t = sweep(p, kPi, SweepGrid{17});
  const auto path = temp_path("roundtrip.csv");
  write_table(t, path);
  const auto back = read_table(path, p);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  EXPECT_EQ(back.phi_Xb, kPi);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto &a = t.rows[i], &b = back.rows[i];
    EXPECT_EQ(a.flux.phi_x, b.flux.phi_x);
    EXPECT_EQ(a.omega_r, b.omega_r);
    EXPECT_EQ(a.Delta, b.Delta);
    EXPECT_EQ(a.omega_q, b.omega_q);
    EXPECT_EQ(a.alpha_q_rel, b.alpha_q_rel);
    EXPECT_EQ(a.alpha_r_rel, b.alpha_r_rel);
    EXPECT_EQ(a.g.g_xx, b.g.g_xx);
    EXPECT_EQ(a.g.g_zx, b.g.g_zx);
    EXPECT_EQ(a.g.g_xz, b.g.g_xz);
    EXPECT_EQ(a.g.g_zz, b.g.g_zz);
    EXPECT_EQ(a.eta, b.eta);
    EXPECT_EQ(a.minimum.phi_q, b.minimum.phi_q);
    EXPECT_EQ(a.minimum.phi_r, b.minimum.phi_r);
  }
  EXPECT_EQ(to_csv(back.rows), to_csv(t.rows));
  std::filesystem::remove(path);
}

TEST(FluxSweep, CsvErrorsCarryPath) {
  const std::string bad = "/nonexistent_dir_istq/out.csv";
  try {
    write_table(SweepTable{}, bad);
    FAIL() << "expected an I/O error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(bad), std::string::npos);
  }
  const auto path = temp_path("garbage.csv");
  std::ofstream(path) << kCsvHeader << "\n1,2,x\n";
  try {
    read_table(path, presets::single_junction());
    FAIL() << "expected a parse error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(from_csv("wrong,header\n"), ConfigError);
}

TEST(FluxSweep, MirrorSymmetry) {
  for (const auto& p : {presets::single_junction(), presets::junction_array(), presets::adapted()}) {
    const double kpi = p.k * kPi;
    const auto t = sweep(p, 0.0, SweepGrid{41, -kpi, kpi});
    const std::size_t n = t.rows.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto &a = t.rows[i], &b = t.rows[n - 1 - i];
      EXPECT_NEAR(a.omega_r, b.omega_r, 1e-9);
      EXPECT_NEAR(a.g.g_zx, -b.g.g_zx, 1e-9);
      EXPECT_NEAR(a.g.g_xx, b.g.g_xx, 1e-9);
    }
  }
}

TEST(FluxSweep, LongitudinalCouplingVanishesAtEndpoints) {
  for (int n = 1; n <= 3; ++n)
    for (double xb : {0.0, kPi}) {
      const auto t = sweep(presets::table(n), xb, SweepGrid{21});
      EXPECT_NEAR(t.rows.front().g.g_zx, 0.0, 1e-9);
      EXPECT_NEAR(t.rows.back().g.g_zx, 0.0, 1e-9);
    }
}

TEST(FluxSweep, BigLoopBiasBoostsLongitudinalCoupling) {
  for (int n = 1; n <= 3; ++n) {
    const auto p = presets::table(n);
    const double g0 = extract_features(sweep(p, 0.0)).g_zx_max;
    const double gpi = extract_features(sweep(p, kPi)).g_zx_max;
    EXPECT_GE(gpi / g0, 1.5) << "table " << n;
    EXPECT_LE(gpi / g0, 2.5) << "table " << n;
  }
}

TEST(FluxSweep, ParasiticLongitudinalRatio) {
  const double expected[] = {0.11, 0.04, 0.04};
  for (int n = 1; n <= 3; ++n) {
    const auto f = extract_features(sweep(presets::table(n), 0.0));
    EXPECT_NEAR(f.g_xz_max / f.g_zx_max, expected[n - 1], 0.04) << "table " << n;
  }
}

TEST(FluxSweep, ChunkedMatchesSequential) {
  const auto p = presets::junction_array();
  const auto a = sweep(p, 0.0, SweepGrid{61});
  const auto b = sweep(p, 0.0, SweepGrid{61}, SweepOptions{Model::Numerical, 4});
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_NEAR(a.rows[i].omega_r, b.rows[i].omega_r, 1e-10);
    EXPECT_NEAR(a.rows[i].g.g_zx, b.rows[i].g.g_zx, 1e-8);
    EXPECT_NEAR(a.rows[i].minimum.phi_r, b.rows[i].minimum.phi_r, 1e-10);
  }
}

TEST(FluxSweep, DoubleWellReportsFlux) {
  auto p = presets::single_junction();
  p.L = 7.0;
  try {
    sweep(p, kPi, SweepGrid{21});
    FAIL() << "expected DoubleWellError";
  } catch (const DoubleWellError& e) {
    EXPECT_GE(e.phi_x(), 0.0);
    EXPECT_LE(e.phi_x(), kPi + 1e-12);
  }
}
