#pragma once

// Side-by-side comparison of the preset circuits against their published
// figures of merit, each line with its own tolerance.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "istq/circuit.hpp"
#include "istq/fluxsweep.hpp"
#include "istq/presets.hpp"

namespace istq::reference {

struct Line {
  std::string name;
  std::string measured;
  std::string expected;
  bool pass = false;
};

struct Report {
  int table = 0;
  std::vector<Line> lines;
  bool all_pass() const {
    for (const auto& l : lines)
      if (!l.pass) return false;
    return true;
  }
};

namespace detail {

inline std::string fmt(double v, const char* unit = "") {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g%s", v, unit);
  return buf;
}

inline Line relative(const std::string& name, double measured, double ref, double rel, const char* unit) {
  char exp[96];
  std::snprintf(exp, sizeof exp, "%g%s +- %g%%", ref, unit, rel * 100.0);
  return {name, fmt(measured, unit), exp, std::abs(measured - ref) <= rel * std::abs(ref)};
}

inline Line absolute(const std::string& name, double measured, double ref, double tol, const char* unit) {
  char exp[96];
  std::snprintf(exp, sizeof exp, "%g%s +- %g%s", ref, unit, tol, unit);
  return {name, fmt(measured, unit), exp, std::abs(measured - ref) <= tol};
}

inline Line interval(const std::string& name, double lo, double hi, double ref_lo, double ref_hi, double scale,
                     const char* unit) {
  char exp[96];
  std::snprintf(exp, sizeof exp, "within [%g, %g]%s", ref_lo * scale, ref_hi * scale, unit);
  return {name, "[" + fmt(lo * scale) + ", " + fmt(hi * scale) + "]" + unit, exp, lo >= ref_lo && hi <= ref_hi};
}

inline Line at_most(const std::string& name, double measured, double bound, double scale, const char* unit) {
  char exp[96];
  std::snprintf(exp, sizeof exp, "<= %g%s", bound * scale, unit);
  return {name, fmt(measured * scale, unit), exp, measured <= bound};
}

inline double abs_min(const Range& r) { return r.min > 0 ? r.min : (r.max < 0 ? -r.max : 0.0); }
inline double abs_max(const Range& r) { return std::max(std::abs(r.min), std::abs(r.max)); }

struct Targets {
  double g_zx, g_xx, g_zz, g_xz;
  double g_rel_big, g_rel_small;
  double wr_lo, wr_hi, wr_tol;
  double D_lo, D_hi, D_tol;
  double aq_lo, aq_hi;  // bounds on |alpha_q_rel|
  double ar_max;        // bound on max |alpha_r_rel|
};

inline Targets targets(int n) {
  switch (n) {
    case 1: return {53, 49, 5, 6, 0.10, 0.25, 6.2, 8.0, 0.15, 5.4, 6.4, 0.15, 0.007, 0.012, 0.006};
    case 2: return {6, 13, 0.07, 0.2, 0.15, 0.50, 6.0, 8.0, 0.15, 5.3, 6.3, 0.15, 0.008, 0.016, 0.0001};
    default: return {10, 9, 0.06, 0.5, 0.15, 0.50, 6.0, 8.0, 0.15, 4.8, 5.8, 0.20, 0.010, 0.022, 0.0003};
  }
}

}  // namespace detail

/// Runs the preset's phi_Xb = 0 sweep and feasibility check and compares.
inline Report compare_table(int n, int points = 201) {
  using namespace detail;
  const CircuitParams p = presets::table(n);
  const auto t = sweep(p, 0.0, SweepGrid{points});
  const auto f = extract_features(t);
  const auto rep = feasibility_check(p, Band{});
  const auto tg = targets(n);

  Report r;
  r.table = n;
  auto& L = r.lines;
  L.push_back(relative("g_zx_max", f.g_zx_max, tg.g_zx, tg.g_rel_big, " MHz"));
  L.push_back(relative("g_xx_max", f.g_xx_max, tg.g_xx, tg.g_rel_big, " MHz"));
  L.push_back(relative("g_zz_max", f.g_zz_max, tg.g_zz, tg.g_rel_small, " MHz"));
  L.push_back(relative("g_xz_max", f.g_xz_max, tg.g_xz, tg.g_rel_small, " MHz"));
  L.push_back(absolute("omega_r_min", f.omega_r.min, tg.wr_lo, tg.wr_tol, " GHz"));
  L.push_back(absolute("omega_r_max", f.omega_r.max, tg.wr_hi, tg.wr_tol, " GHz"));
  L.push_back(absolute("Delta_min", f.Delta.min, tg.D_lo, tg.D_tol, " GHz"));
  L.push_back(absolute("Delta_max", f.Delta.max, tg.D_hi, tg.D_tol, " GHz"));
  L.push_back(interval("|alpha_q_rel|", abs_min(f.alpha_q_rel), abs_max(f.alpha_q_rel), tg.aq_lo, tg.aq_hi, 100.0, "%"));
  L.push_back(at_most("max |alpha_r_rel|", f.alpha_r_rel_max, tg.ar_max, 100.0, "%"));
  if (n == 1) {
    L.push_back(relative("L_max", rep.L_max, 4.9, 0.10, " nH"));
    L.push_back(relative("L_crit", rep.L_crit, 5.6, 0.10, " nH"));
  } else if (n == 2) {
    L.push_back(relative("L_max", rep.L_max, 5.0, 0.10, " nH"));
    L.push_back(relative("L_crit", rep.L_crit, 5.6, 0.10, " nH"));
  } else {
    L.push_back(relative("k_crit", rep.k_crit, 3.3, 0.10, ""));
  }
  return r;
}

inline std::string render(const Report& r) {
  std::string out = "table" + std::to_string(r.table) + " (phi_Xb = 0)\n";
  for (const auto& l : r.lines)
    out += l.name + " = " + l.measured + " vs " + l.expected + " : " + (l.pass ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace istq::reference
