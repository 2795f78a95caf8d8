#pragma once

// Flux sweeps over phi_x at fixed phi_Xb, feature extraction from the swept
// table, the branch-inductance asymmetry model, and the CSV table format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "istq/circuit.hpp"
#include "istq/errors.hpp"
#include "istq/quantizer.hpp"

namespace istq {

inline constexpr const char* kVersion = "1.0.0";

enum class Model { Numerical, ClosedForm };

inline const char* to_string(Model m) { return m == Model::Numerical ? "numerical" : "closed_form"; }

struct SweepGrid {
  int n_points = 201;
  double phi_x_start = 0.0;
  // NaN selects k pi for the circuit being swept.
  double phi_x_end = std::numeric_limits<double>::quiet_NaN();
};

struct SweepOptions {
  Model model = Model::Numerical;
  unsigned threads = 1;  // 0 picks the hardware concurrency
};

struct SweepTable {
  CircuitParams params;
  double phi_Xb = 0.0;
  SweepGrid grid;
  Model model = Model::Numerical;
  std::string version = kVersion;
  std::vector<SpectrumPoint> rows;
};

namespace detail {

inline std::vector<double> grid_points(const CircuitParams& p, const SweepGrid& g) {
  if (g.n_points < 1) throw DomainError("sweep: n_points must be >= 1");
  const double end = std::isnan(g.phi_x_end) ? p.k * std::numbers::pi : g.phi_x_end;
  if (g.n_points > 1 && !(end > g.phi_x_start))
    throw DomainError("sweep: phi_x range must be strictly increasing");
  std::vector<double> x(g.n_points);
  for (int i = 0; i < g.n_points; ++i)
    x[i] = g.n_points == 1 ? g.phi_x_start
                           : (i + 1 == g.n_points ? end
                                                  : g.phi_x_start + (end - g.phi_x_start) * i / (g.n_points - 1));
  return x;
}

inline SpectrumPoint evaluate(const CircuitParams& p, Model model, const FluxBias& f,
                              std::optional<WarmStart> warm) {
  return model == Model::ClosedForm ? closed_form_point(p, f) : analyze_point(p, f, warm);
}

// Continuation over one contiguous chunk; the first row is anchored.
inline void sweep_chunk(const CircuitParams& p, Model model, double phi_Xb, const std::vector<double>& x,
                        std::size_t lo, std::size_t hi, std::vector<SpectrumPoint>& out) {
  std::optional<WarmStart> warm;
  for (std::size_t i = lo; i < hi; ++i) {
    const FluxBias f{x[i], phi_Xb};
    out[i] = evaluate(p, model, f, warm);
    warm = WarmStart{f, out[i].minimum};
  }
}

}  // namespace detail

/// Spectrum at every grid flux. Numerical rows are warm-started from their
/// predecessor; with several threads each chunk starts from its own anchor.
inline SweepTable sweep(const CircuitParams& p, double phi_Xb, const SweepGrid& grid = {},
                        const SweepOptions& opt = {}) {
  validate(p);
  const auto x = detail::grid_points(p, grid);
  SweepTable t;
  t.params = p;
  t.phi_Xb = phi_Xb;
  t.grid = grid;
  t.grid.phi_x_end = x.back();
  t.model = opt.model;
  t.rows.resize(x.size());

  unsigned threads = opt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(x.size()));
  if (threads <= 1) {
    detail::sweep_chunk(p, opt.model, phi_Xb, x, 0, x.size(), t.rows);
    return t;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t n = x.size();
  for (unsigned c = 0; c < threads; ++c) {
    const std::size_t lo = n * c / threads, hi = n * (c + 1) / threads;
    jobs.push_back(std::async(std::launch::async, [&, lo, hi] {
      detail::sweep_chunk(p, opt.model, phi_Xb, x, lo, hi, t.rows);
    }));
  }
  for (auto& j : jobs) j.get();
  return t;
}

// ---------------------------------------------------------------------------
// Features

struct Range {
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
};

struct SweepFeatures {
  double g_zx_max = 0.0;  // MHz, max |g_zx| over the sweep
  double g_zx_max_flux = 0.0;
  double g_xz_max = 0.0;  // MHz, max |g_xz| over the sweep
  // Max |g_xx| and |g_zz| over the transverse lobe: the contiguous run of rows
  // around phi_x = 0 (mod 2 pi k) on which g_xx keeps its zero-flux sign.
  double g_xx_max = 0.0;
  double g_zz_max = 0.0;
  double g_xx_global_max = 0.0;  // MHz, max |g_xx| over all rows
  std::optional<double> gxx_zero_flux;
  Range omega_r;
  Range Delta;
  Range alpha_q_rel;
  double alpha_r_rel_max = 0.0;  // max |alpha_r_rel|
  double separation_min = std::numeric_limits<double>::infinity();  // min |omega_r - Delta|, GHz
};

namespace detail {

// Vertex of the parabola through three equally spaced samples, if concave.
inline double refine_peak(double x0, double x1, double x2, double y0, double y1, double y2, double* at) {
  const double h = x1 - x0;
  const double curv = y0 - 2.0 * y1 + y2;
  if (!(curv < 0.0) || !(std::abs(x2 - x1 - h) <= 1e-9 * std::abs(h))) {
    if (at) *at = x1;
    return y1;
  }
  const double off = 0.5 * (y0 - y2) / curv;
  if (at) *at = x1 + off * h;
  return y1 - 0.25 * (y0 - y2) * off;
}

template <class Get>
double peak_abs(const std::vector<SpectrumPoint>& rows, std::size_t lo, std::size_t hi, Get get,
                double* at = nullptr) {
  std::size_t best = lo;
  for (std::size_t i = lo; i < hi; ++i)
    if (std::abs(get(rows[i])) > std::abs(get(rows[best]))) best = i;
  if (at) *at = rows[best].flux.phi_x;
  if (best == lo || best + 1 >= hi) return std::abs(get(rows[best]));
  return refine_peak(rows[best - 1].flux.phi_x, rows[best].flux.phi_x, rows[best + 1].flux.phi_x,
                     std::abs(get(rows[best - 1])), std::abs(get(rows[best])),
                     std::abs(get(rows[best + 1])), at);
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Regula falsi (Illinois variant) on g_xx between two bracketing rows.
inline double refine_gxx_zero(const SweepTable& t, const SpectrumPoint& a, const SpectrumPoint& b) {
  double xa = a.flux.phi_x, xb = b.flux.phi_x, fa = a.g.g_xx, fb = b.g.g_xx;
  WarmStart warm{a.flux, a.minimum};
  int side = 0;
  double x = xa;
  for (int it = 0; it < 100; ++it) {
    x = (xa * fb - xb * fa) / (fb - fa);
    if (!(x > std::min(xa, xb) && x < std::max(xa, xb))) x = 0.5 * (xa + xb);
    const auto s = evaluate(t.params, t.model, {x, t.phi_Xb}, warm);
    const double fx = s.g.g_xx;
    if (fx == 0.0 || std::abs(xb - xa) < 1e-12) return x;
    if (sign_of(fx) == sign_of(fa)) {
      xa = x;
      fa = fx;
      warm = WarmStart{s.flux, s.minimum};
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      xb = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    if (std::abs(fx) < 1e-12) return x;
  }
  return x;
}

}  // namespace detail

/// Scalar summary of a sweep. The g_xx zero crossing is refined by
/// re-evaluating the table's own model between the bracketing rows.
inline SweepFeatures extract_features(const SweepTable& t, bool refine_zero = true) {
  const auto& r = t.rows;
  if (r.empty()) throw DomainError("extract_features: empty table");
  SweepFeatures f;
  const std::size_t n = r.size();

  f.g_zx_max = detail::peak_abs(r, 0, n, [](const SpectrumPoint& s) { return s.g.g_zx; }, &f.g_zx_max_flux);
  f.g_xz_max = detail::peak_abs(r, 0, n, [](const SpectrumPoint& s) { return s.g.g_xz; });
  f.g_xx_global_max = detail::peak_abs(r, 0, n, [](const SpectrumPoint& s) { return s.g.g_xx; });

  // Transverse lobe around the row closest to phi_x = 0 mod 2 pi k.
  const double period = 2.0 * std::numbers::pi * t.params.k;
  auto dist0 = [&](double x) { return std::abs(x - period * std::round(x / period)); };
  std::size_t a = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (dist0(r[i].flux.phi_x) < dist0(r[a].flux.phi_x)) a = i;
  const int s0 = detail::sign_of(r[a].g.g_xx);
  std::size_t lo = a, hi = a + 1;
  while (lo > 0 && detail::sign_of(r[lo - 1].g.g_xx) == s0) --lo;
  while (hi < n && detail::sign_of(r[hi].g.g_xx) == s0) ++hi;
  f.g_xx_max = detail::peak_abs(r, lo, hi, [](const SpectrumPoint& s) { return s.g.g_xx; });
  f.g_zz_max = detail::peak_abs(r, lo, hi, [](const SpectrumPoint& s) { return s.g.g_zz; });

  // First sign change of g_xx leaving the lobe toward larger flux, else smaller.
  std::optional<std::pair<std::size_t, std::size_t>> bracket;
  if (s0 != 0 && hi < n) bracket = std::pair{hi - 1, hi};
  else if (s0 != 0 && lo > 0) bracket = std::pair{lo, lo - 1};
  if (bracket) {
    const auto& ra = r[bracket->first];
    const auto& rb = r[bracket->second];
    if (rb.g.g_xx == 0.0) f.gxx_zero_flux = rb.flux.phi_x;
    else if (refine_zero) f.gxx_zero_flux = detail::refine_gxx_zero(t, ra, rb);
    else
      f.gxx_zero_flux = ra.flux.phi_x - ra.g.g_xx * (rb.flux.phi_x - ra.flux.phi_x) / (rb.g.g_xx - ra.g.g_xx);
  }

  f.omega_r = {r[0].omega_r, r[0].omega_r};
  f.Delta = {r[0].Delta, r[0].Delta};
  f.alpha_q_rel = {r[0].alpha_q_rel, r[0].alpha_q_rel};
  for (const auto& s : r) {
    f.omega_r.min = std::min(f.omega_r.min, s.omega_r);
    f.omega_r.max = std::max(f.omega_r.max, s.omega_r);
    f.Delta.min = std::min(f.Delta.min, s.Delta);
    f.Delta.max = std::max(f.Delta.max, s.Delta);
    f.alpha_q_rel.min = std::min(f.alpha_q_rel.min, s.alpha_q_rel);
    f.alpha_q_rel.max = std::max(f.alpha_q_rel.max, s.alpha_q_rel);
    f.alpha_r_rel_max = std::max(f.alpha_r_rel_max, std::abs(s.alpha_r_rel));
    f.separation_min = std::min(f.separation_min, std::abs(s.omega_r - s.Delta));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Branch-inductance asymmetry

struct AsymmetricGxx {
  double g_asym = 0.0;  // MHz, flux-independent offset evaluated at k pi / 2
  std::vector<double> phi_x;
  std::vector<double> total;  // MHz, g_asym + symmetric g_xx per row
  std::optional<double> crossing;            // zero of the total, rad
  std::optional<double> symmetric_crossing;  // zero of the symmetric table, rad
  /// crossing - symmetric_crossing, when both exist.
  std::optional<double> shift() const {
    if (crossing && symmetric_crossing) return *crossing - *symmetric_crossing;
    return std::nullopt;
  }
};

namespace detail {

inline std::optional<double> first_crossing(const std::vector<double>& x, const std::vector<double>& y) {
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (y[i] == 0.0) return x[i];
    if (sign_of(y[i]) != sign_of(y[i + 1]) && y[i + 1] != 0.0)
      return x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]);
  }
  if (!y.empty() && y.back() == 0.0) return x.back();
  return std::nullopt;
}

}  // namespace detail

/// Total transverse coupling with branch inductances L(1 +- deltaL). The
/// asymmetric part is taken as a constant offset, the numerical difference
/// g_xx(deltaL) - g_xx(0) at phi_x = k pi / 2 where the symmetric part
/// vanishes; the flux dependence comes from the supplied symmetric table.
inline AsymmetricGxx asymmetric_gxx(const CircuitParams& params, double deltaL, const SweepTable& symmetric) {
  if (!(std::abs(deltaL) < 1.0)) throw DomainError("asymmetric_gxx: |deltaL| must be < 1");
  CircuitParams sym = params;
  sym.deltaL = 0.0;
  CircuitParams asym = params;
  asym.deltaL = deltaL;
  const FluxBias mid{params.k * std::numbers::pi / 2.0, symmetric.phi_Xb};

  AsymmetricGxx out;
  out.g_asym = deltaL == 0.0 ? 0.0 : analyze_point(asym, mid).g.g_xx - analyze_point(sym, mid).g.g_xx;
  std::vector<double> g_sym;
  for (const auto& s : symmetric.rows) {
    out.phi_x.push_back(s.flux.phi_x);
    g_sym.push_back(s.g.g_xx);
    out.total.push_back(out.g_asym + s.g.g_xx);
  }
  out.crossing = detail::first_crossing(out.phi_x, out.total);
  out.symmetric_crossing = detail::first_crossing(out.phi_x, g_sym);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvHeader =
    "phi_x_rad,phi_Xb_rad,omega_r_GHz,Delta_GHz,omega_q_GHz,alpha_q_rel,alpha_r_rel,g_xx_MHz,g_zx_MHz,"
    "g_xz_MHz,g_zz_MHz,eta,min_q_rad,min_r_rad";

/// "%.17g": round-trips every finite double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw ConfigError("cannot parse number '" + s + "'");
  return v;
}

inline std::string to_csv(const std::vector<SpectrumPoint>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& s : rows) {
    const double v[] = {s.flux.phi_x, s.flux.phi_Xb, s.omega_r,  s.Delta,  s.omega_q,
                        s.alpha_q_rel, s.alpha_r_rel, s.g.g_xx, s.g.g_zx, s.g.g_xz,
                        s.g.g_zz,     s.eta,         s.minimum.phi_q, s.minimum.phi_r};
    for (std::size_t i = 0; i < std::size(v); ++i) {
      if (i) out += ',';
      out += format_double(v[i]);
    }
    out += '\n';
  }
  return out;
}

/// Parses rows written by to_csv. Columns absent from the format (alpha
/// energies) are rebuilt from the relative values.
inline std::vector<SpectrumPoint> from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("CSV: unexpected header '" + line + "'");
  std::vector<SpectrumPoint> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> v;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      v.push_back(parse_double(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (v.size() != 14) throw ConfigError("CSV line " + std::to_string(lineno) + ": expected 14 columns");
    SpectrumPoint s;
    s.flux = {v[0], v[1]};
    s.omega_r = v[2];
    s.Delta = v[3];
    s.omega_q = v[4];
    s.alpha_q_rel = v[5];
    s.alpha_r_rel = v[6];
    s.g = {v[7], v[8], v[9], v[10]};
    s.eta = v[11];
    s.minimum = {v[12], v[13]};
    s.alpha_q = s.alpha_q_rel * s.Delta;
    s.alpha_r = s.alpha_r_rel * s.omega_r / (1.0 - s.alpha_r_rel);
    rows.push_back(s);
  }
  return rows;
}

inline void write_table(const SweepTable& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("write_table: cannot open '" + path + "' for writing");
  f << to_csv(t.rows);
  if (!f) throw Error("write_table: write to '" + path + "' failed");
}

/// Reads rows from `path`; params, model and grid must be supplied by the
/// caller since the file only carries the per-row columns.
inline SweepTable read_table(const std::string& path, const CircuitParams& params,
                             Model model = Model::Numerical) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("read_table: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  SweepTable t;
  t.params = params;
  t.model = model;
  try {
    t.rows = from_csv(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError("read_table '" + path + "': " + e.what());
  }
  if (!t.rows.empty()) {
    t.phi_Xb = t.rows.front().flux.phi_Xb;
    t.grid = {static_cast<int>(t.rows.size()), t.rows.front().flux.phi_x, t.rows.back().flux.phi_x};
  }
  return t;
}

}  // namespace istq
