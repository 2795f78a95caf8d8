#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "istq/presets.hpp"
#include "istq/search.hpp"

using namespace istq;

namespace {
SearchSpace small_box(int count) {
  auto s = SearchSpace::around(presets::single_junction(), 0.05, count);
  s.points = 101;
  return s;
}
}  // namespace

TEST(Search, FixCapacitanceReproducesTables) {
  EXPECT_NEAR(*fix_capacitance(presets::single_junction(), Band{}), 114.0, 0.03 * 114.0);
  EXPECT_NEAR(*fix_capacitance(presets::junction_array(), Band{}), 102.0, 0.03 * 102.0);
  EXPECT_NEAR(*fix_capacitance(presets::adapted(), Band{}), 65.0, 0.05 * 65.0);
}

TEST(Search, FixCapacitancePlacesTopOfBand) {
  for (int n = 1; n <= 3; ++n) {
    auto p = presets::table(n);
    p.C = *fix_capacitance(p, Band{});
    EXPECT_NEAR(feasibility_check(p, Band{}).omega_r_max, 8.0, 1e-9);
  }
}

TEST(Search, FixCapacitanceRejectsWideTuning) {
  auto p = presets::single_junction();
  p.L = 6.0;  // tunes past the bottom of the band once the top is pinned
  EXPECT_FALSE(fix_capacitance(p, Band{}).has_value());
}

TEST(Search, DeterministicForFixedSeed) {
  auto s = small_box(3);
  s.lhs_samples = 6;
  s.seed = 42;
  const auto a = search(s);
  const auto b = search(s);
  EXPECT_EQ(a.seed, 42u);
  ASSERT_EQ(a.ranked.size(), b.ranked.size());
  for (std::size_t i = 0; i < a.ranked.size(); ++i) {
    EXPECT_EQ(a.ranked[i].objective, b.ranked[i].objective);
    EXPECT_EQ(a.ranked[i].params.L, b.ranked[i].params.L);
    EXPECT_EQ(a.ranked[i].params.E_Jq, b.ranked[i].params.E_Jq);
  }
  EXPECT_EQ(candidates_csv(a), candidates_csv(b));
  EXPECT_EQ(a.evaluated, 27u + 6u);
}

TEST(Search, DifferentSeedsSampleDifferently) {
  auto s = small_box(1);
  s.E_Jq = {9.5, 10.5, 1};
  s.lhs_samples = 4;
  s.seed = 1;
  const auto a = detail::lhs_params(s);
  s.seed = 2;
  const auto b = detail::lhs_params(s);
  ASSERT_EQ(a.size(), 4u);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) differ |= a[i].L != b[i].L;
  EXPECT_TRUE(differ);
}

TEST(Search, InfeasibleSlabNamesDoubleWell) {
  auto s = small_box(3);
  s.E_Jq = ParamRange::fixed(10.0);
  s.L = {5.6, 6.0, 3};
  ASSERT_LT(feasibility_check(presets::single_junction(), Band{}).L_crit, 5.6);
  try {
    search(s);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    const auto& b = e.binding_constraints();
    EXPECT_NE(std::find(b.begin(), b.end(), "double_well"), b.end());
    EXPECT_NE(std::string(e.what()).find("double_well"), std::string::npos);
  }
}

TEST(Search, DegenerateTable3Point) {
  const auto p = presets::adapted();
  auto s = SearchSpace::around(p, 0.0, 1);
  const auto r = search(s);
  ASSERT_EQ(r.ranked.size(), 1u);
  const auto& f = *r.best.features;
  EXPECT_NEAR(f.g_zx_max, 10, 1.0);
  EXPECT_NEAR(f.g_xx_max, 9, 0.9);
  EXPECT_NEAR(r.best.params.C, 65, 0.05 * 65);
  ASSERT_TRUE(r.best_features_pi);
  EXPECT_GT(r.best_features_pi->g_zx_max, f.g_zx_max);
}

TEST(Search, EnlargingSpaceNeverLowersBest) {
  const auto a = search(small_box(3));
  const auto b = search(small_box(5));  // contains every point of the 3-grid
  EXPECT_GE(b.best.objective, a.best.objective);
  EXPECT_GT(b.evaluated, a.evaluated);
}

TEST(Search, RankedCandidatesRevalidate) {
  auto s = small_box(3);
  const auto r = search(s);
  ASSERT_FALSE(r.ranked.empty());
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    const auto& c = r.ranked[i];
    const auto rep = feasibility_check(c.params, s.band, s.E_Ci);
    EXPECT_TRUE(rep.band_ok);
    EXPECT_TRUE(rep.double_well_ok);
    EXPECT_TRUE(rep.array_ok);
    ASSERT_TRUE(c.features);
    EXPECT_GE(c.features->separation_min, s.separation);
    EXPECT_GE(std::min(std::abs(c.features->alpha_q_rel.min), std::abs(c.features->alpha_q_rel.max)),
              kMinRelativeAnharmonicity);
    if (i) EXPECT_GE(r.ranked[i - 1].objective, c.objective);
  }
  // Objective is reproducible from sweep + features.
  const auto f = extract_features(sweep(r.best.params, 0.0, SweepGrid{s.points}));
  EXPECT_NEAR(f.g_zx_max, r.best.objective, 1e-9);
}

TEST(Search, AsymmetryTuningBalancesCouplings) {
  auto s = small_box(1);
  s.tune_d = true;
  const auto r = search(s);
  ASSERT_TRUE(r.tuned);
  ASSERT_TRUE(r.tuned->features);
  EXPECT_NEAR(r.tuned->features->g_xx_max / r.tuned->features->g_zx_max, 1.0, 0.01);
  EXPECT_NEAR(r.tuned->objective, r.best.objective, 0.02 * r.best.objective);
}

TEST(Search, CandidateCsvHasOneLinePerRanked) {
  const auto r = search(small_box(3));
  const auto csv = candidates_csv(r);
  EXPECT_EQ(csv.rfind(kCandidateCsvHeader, 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.ranked.size() + 1);
}

TEST(Search, ValidationErrors) {
  auto s = small_box(3);
  s.points = 2;
  EXPECT_THROW(search(s), DomainError);
  s = small_box(3);
  s.L = {5.0, 4.0, 3};
  EXPECT_THROW(search(s), DomainError);
}
