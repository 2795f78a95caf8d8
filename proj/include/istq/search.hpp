#pragma once

// Deterministic grid search (plus optional Latin-hypercube refinement) over
// circuit parameters, with the resonator capacitance fixed by the band.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "istq/circuit.hpp"
#include "istq/errors.hpp"
#include "istq/fluxsweep.hpp"

namespace istq {

struct ParamRange {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  static ParamRange fixed(double v) { return {v, v, 1}; }

  std::vector<double> values() const {
    if (count < 1) throw DomainError("search: range count must be >= 1");
    if (max < min) throw DomainError("search: range max < min");
    if (count == 1) return {min};
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = i + 1 == count ? max : min + (max - min) * i / (count - 1);
    return v;
  }
};

struct SearchSpace {
  Variant variant = Variant::SingleJunction;
  ParamRange E_Jq, E_Jsigma, d, C_q, L, L_a, k;
  int m = 0;
  double deltaL = 0.0;
  Band band;
  double separation = 0.5;  // GHz, minimum |omega_r - Delta| over the sweep
  std::optional<double> E_Ci;  // array junction charging energy, GHz
  int points = 201;
  std::uint64_t seed = 0;
  int lhs_samples = 0;
  bool tune_d = false;
  unsigned threads = 1;  // 0 picks the hardware concurrency

  /// Box of +-rel around p in every searched parameter, `count` values each
  /// (k, L_a and deltaL are held fixed).
  static SearchSpace around(const CircuitParams& p, double rel, int count) {
    SearchSpace s;
    s.variant = p.variant;
    auto box = [&](double v) { return ParamRange{v * (1.0 - rel), v * (1.0 + rel), count}; };
    s.E_Jq = box(p.E_Jq);
    s.E_Jsigma = box(p.E_Jsigma);
    s.L = box(p.L);
    s.d = ParamRange::fixed(p.d);
    s.C_q = ParamRange::fixed(p.C_q);
    s.L_a = ParamRange::fixed(p.L_a.value_or(0.0));
    s.k = ParamRange::fixed(p.k);
    s.m = p.m;
    s.deltaL = p.deltaL;
    return s;
  }
};

/// Minimum relative qubit anharmonicity over the sweep.
inline constexpr double kMinRelativeAnharmonicity = 1.0 / (200.0 * std::numbers::pi);

struct Candidate {
  CircuitParams params;
  std::optional<SweepFeatures> features;  // phi_Xb = 0, present once swept
  std::optional<FeasibilityReport> report;
  std::vector<std::string> violations;
  double objective = 0.0;
  bool feasible() const { return violations.empty(); }
};

using Objective = std::function<double(const SweepFeatures&)>;

inline double default_objective(const SweepFeatures& f) { return f.g_zx_max; }

struct SearchResult {
  Candidate best;
  std::optional<SweepFeatures> best_features_pi;  // best at phi_Xb = pi
  std::optional<Candidate> tuned;  // best with d set so g_xx_max = g_zx_max
  std::vector<Candidate> ranked;   // feasible, objective descending
  std::map<std::string, int> rejections;
  std::size_t evaluated = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// C placing omega_r(phi_x = 0) at the top of the band; C does not enter the
// potential, so the curvature is computed once.
inline std::optional<double> top_of_band_capacitance(const CircuitParams& p, double f_hi) {
  try {
    const double d02 = resonator_curvature(circuit_model(p), 0.0);
    if (!(d02 > 0.0)) return std::nullopt;
    return 8.0 * d02 * units::charge_energy_ghz_ff / (f_hi * f_hi);
  } catch (const InvertibilityError&) {
    return std::nullopt;
  }
}

inline double min_abs(const Range& r) {
  if (r.min > 0.0) return r.min;
  if (r.max < 0.0) return -r.max;
  return 0.0;
}

}  // namespace detail

/// Capacitance putting omega_r(0) at f_hi, or nothing when the resonator
/// then cannot stay above f_lo at phi_x = k pi. Assumes omega_r is maximal at
/// zero flux, which holds for every variant treated here.
inline std::optional<double> fix_capacitance(const CircuitParams& p, const Band& band) {
  CircuitParams q = p;
  q.C = 1.0;  // placeholder so validation passes; C is not used by the potential
  validate(q);
  const auto c = detail::top_of_band_capacitance(q, band.f_hi);
  if (!c) return std::nullopt;
  const double lo = detail::resonator_curvature(detail::circuit_model(q), q.k * std::numbers::pi);
  if (!(lo > 0.0)) return std::nullopt;
  const double w_lo = std::sqrt(8.0 * units::charge_energy_ghz_ff / *c * lo);
  if (w_lo < band.f_lo - detail::kBandSlack) return std::nullopt;
  return c;
}

/// All constraints on one parameter set; C is overwritten by the band fix.
inline Candidate evaluate_candidate(CircuitParams p, const SearchSpace& s, const Objective& objective) {
  Candidate c;
  auto violate = [&](const std::string& v) {
    if (std::find(c.violations.begin(), c.violations.end(), v) == c.violations.end()) c.violations.push_back(v);
  };
  p.C = 1.0;
  try {
    validate(p);
  } catch (const DomainError&) {
    c.params = p;
    violate("domain");
    return c;
  }
  if (auto cap = detail::top_of_band_capacitance(p, s.band.f_hi)) p.C = *cap;
  else violate("band");
  c.params = p;

  try {
    c.report = feasibility_check(p, s.band, p.k > 1 ? s.E_Ci : std::nullopt);
  } catch (const Error&) {
    violate("numerics");
    return c;
  }
  const auto& r = *c.report;
  if (!(r.invertibility_margin > 0.0)) violate("invertibility");
  if (!r.band_ok) violate("band");
  if (!r.double_well_ok) violate("double_well");
  if (!r.array_ok) violate("array");
  if (p.variant != Variant::Adapted && p.L > r.L_max) violate("band");
  if (!c.violations.empty()) return c;

  try {
    const auto t = sweep(p, 0.0, SweepGrid{s.points});
    const auto f = extract_features(t, false);
    c.features = f;
    if (f.omega_r.min < s.band.f_lo - detail::kBandSlack || f.omega_r.max > s.band.f_hi + detail::kBandSlack)
      violate("band");
    if (f.separation_min < s.separation) violate("separation");
    if (detail::min_abs(f.alpha_q_rel) < kMinRelativeAnharmonicity) violate("anharmonicity");
    c.objective = objective(f);
  } catch (const DoubleWellError&) {
    violate("double_well");
  } catch (const Error&) {
    violate("numerics");
  }
  return c;
}

namespace detail {

inline std::vector<Candidate> evaluate_all(const std::vector<CircuitParams>& ps, const SearchSpace& s,
                                           const Objective& obj) {
  std::vector<Candidate> out(ps.size());
  unsigned threads = s.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : s.threads;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(ps.size(), 1))));
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = evaluate_candidate(ps[i], s, obj);
  };
  if (threads == 1) {
    run(0, ps.size());
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (unsigned t = 0; t < threads; ++t)
    jobs.push_back(std::async(std::launch::async, run, ps.size() * t / threads, ps.size() * (t + 1) / threads));
  for (auto& j : jobs) j.get();
  return out;
}

inline CircuitParams make_params(const SearchSpace& s, double ejq, double ejs, double d, double cq, double l,
                                 double la, double k) {
  CircuitParams p;
  p.variant = s.variant;
  p.E_Jq = ejq;
  p.E_Jsigma = ejs;
  p.d = d;
  p.C_q = cq;
  p.L = l;
  if (s.variant == Variant::Adapted) p.L_a = la;
  p.k = static_cast<int>(std::lround(k));
  p.m = s.m;
  p.deltaL = s.deltaL;
  return p;
}

inline std::vector<CircuitParams> grid_params(const SearchSpace& s) {
  std::vector<CircuitParams> out;
  for (double a : s.E_Jq.values())
    for (double b : s.E_Jsigma.values())
      for (double d : s.d.values())
        for (double cq : s.C_q.values())
          for (double l : s.L.values())
            for (double la : s.L_a.values())
              for (double k : s.k.values()) out.push_back(make_params(s, a, b, d, cq, l, la, k));
  return out;
}

inline std::vector<CircuitParams> lhs_params(const SearchSpace& s) {
  const int n = s.lhs_samples;
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ParamRange* dims[] = {&s.E_Jq, &s.E_Jsigma, &s.d, &s.C_q, &s.L, &s.L_a, &s.k};
  std::vector<std::vector<double>> cols;
  for (const ParamRange* r : dims) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> col(n);
    for (int i = 0; i < n; ++i) col[i] = r->min + (r->max - r->min) * (perm[i] + u(rng)) / n;
    cols.push_back(std::move(col));
  }
  std::vector<CircuitParams> out;
  for (int i = 0; i < n; ++i)
    out.push_back(make_params(s, cols[0][i], cols[1][i], cols[2][i], cols[3][i], cols[4][i], cols[5][i], cols[6][i]));
  return out;
}

// d with g_xx_max / g_zx_max = 1 by bisection; the ratio grows with |d|.
inline std::optional<Candidate> tune_asymmetry(const Candidate& best, const SearchSpace& s, const Objective& obj) {
  auto eval = [&](double d) {
    CircuitParams p = best.params;
    p.d = d;
    return evaluate_candidate(p, s, obj);
  };
  auto ratio = [](const Candidate& c) {
    return c.features ? c.features->g_xx_max / c.features->g_zx_max - 1.0 : std::numeric_limits<double>::quiet_NaN();
  };
  double lo = 1e-4, hi = 0.9;
  Candidate clo = eval(lo), chi = eval(hi);
  double rlo = ratio(clo), rhi = ratio(chi);
  if (!(rlo < 0.0) || !(rhi > 0.0)) return std::nullopt;
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    Candidate cm = eval(mid);
    const double rm = ratio(cm);
    if (std::isnan(rm)) return std::nullopt;
    if (rm < 0.0) {
      lo = mid;
      clo = cm;
    } else {
      hi = mid;
      chi = cm;
    }
  }
  return std::abs(ratio(clo)) < std::abs(ratio(chi)) ? clo : chi;
}

}  // namespace detail

inline void validate(const SearchSpace& s) {
  if (!(s.band.f_lo < s.band.f_hi)) throw DomainError("search: band requires f_lo < f_hi");
  if (s.points < 3) throw DomainError("search: points must be >= 3");
  if (s.lhs_samples < 0) throw DomainError("search: lhs_samples must be >= 0");
  for (const ParamRange* r : {&s.E_Jq, &s.E_Jsigma, &s.d, &s.C_q, &s.L, &s.L_a, &s.k}) r->values();
}

/// Evaluates every grid point (then any LHS samples) and ranks the feasible
/// candidates. Throws InfeasibleError when none survives.
inline SearchResult search(const SearchSpace& s, const Objective& objective = default_objective) {
  validate(s);
  auto ps = detail::grid_params(s);
  if (s.lhs_samples > 0) {
    auto extra = detail::lhs_params(s);
    ps.insert(ps.end(), extra.begin(), extra.end());
  }
  auto all = detail::evaluate_all(ps, s, objective);

  SearchResult res;
  res.seed = s.seed;
  res.evaluated = all.size();
  std::map<std::string, int> counts;
  for (auto& c : all) {
    for (const auto& v : c.violations) ++counts[v];
    if (c.feasible()) res.ranked.push_back(std::move(c));
  }
  res.rejections = counts;
  if (res.ranked.empty()) {
    // Constraints violated by every candidate are binding; otherwise list all.
    std::vector<std::string> binding;
    for (const auto& [k, n] : counts)
      if (static_cast<std::size_t>(n) == all.size()) binding.push_back(k);
    if (binding.empty())
      for (const auto& [k, n] : counts) binding.push_back(k);
    std::ostringstream os;
    os << "search: no feasible candidate among " << all.size() << "; binding constraints:";
    for (const auto& b : binding) os << ' ' << b;
    throw InfeasibleError(os.str(), binding);
  }
  std::stable_sort(res.ranked.begin(), res.ranked.end(),
                   [](const Candidate& a, const Candidate& b) { return a.objective > b.objective; });
  res.best = res.ranked.front();
  try {
    res.best_features_pi = extract_features(sweep(res.best.params, std::numbers::pi, SweepGrid{s.points}), false);
  } catch (const Error&) {
    res.best_features_pi.reset();
  }
  if (s.tune_d) res.tuned = detail::tune_asymmetry(res.best, s, objective);
  return res;
}

inline constexpr const char* kCandidateCsvHeader =
    "rank,E_Jq_GHz,E_Jsigma_GHz,d,C_fF,C_q_fF,L_nH,L_a_nH,k,objective,g_zx_max_MHz,g_xx_max_MHz,g_zz_max_MHz,"
    "g_xz_max_MHz,omega_r_min_GHz,omega_r_max_GHz,Delta_min_GHz,Delta_max_GHz,separation_min_GHz";

inline std::string candidates_csv(const SearchResult& r) {
  std::string out = kCandidateCsvHeader;
  out += '\n';
  int rank = 0;
  for (const auto& c : r.ranked) {
    const auto& p = c.params;
    const auto& f = *c.features;
    const double v[] = {p.E_Jq, p.E_Jsigma, p.d, p.C, p.C_q, p.L, p.L_a.value_or(0.0),
                        static_cast<double>(p.k), c.objective, f.g_zx_max, f.g_xx_max, f.g_zz_max,
                        f.g_xz_max, f.omega_r.min, f.omega_r.max, f.Delta.min, f.Delta.max, f.separation_min};
    out += std::to_string(++rank);
    for (double x : v) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

inline void write_candidates(const SearchResult& r, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("write_candidates: cannot open '" + path + "' for writing");
  f << candidates_csv(r);
  if (!f) throw Error("write_candidates: write to '" + path + "' failed");
}

}  // namespace istq
