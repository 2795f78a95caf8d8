#pragma once

// Run configuration: flat dotted key = value text (JSON accepted with the
// same keys nested by section), strict about unknown keys.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "istq/circuit.hpp"
#include "istq/errors.hpp"
#include "istq/fluxsweep.hpp"
#include "istq/oracle.hpp"
#include "istq/presets.hpp"
#include "istq/search.hpp"

namespace istq {

struct PointFlux {
  double phi_x_pi = 0.0;
  double phi_Xb_pi = 0.0;
  FluxBias bias() const { return {phi_x_pi * std::numbers::pi, phi_Xb_pi * std::numbers::pi}; }
};

struct SweepFlux {
  double phi_x_start_pi = 0.0;
  std::optional<double> phi_x_end_pi;  // default k
  int points = 201;
  std::vector<double> phi_Xb_pi = {0.0, 1.0};
};

struct CheckConfig {
  Band band;
  std::optional<double> E_Ci;
};

struct RunConfig {
  CircuitParams circuit;
  std::optional<PointFlux> point;
  std::optional<SweepFlux> sweep;
  OracleBasis oracle;
  CheckConfig check;
  std::optional<SearchSpace> search;
  std::string output;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double number(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const ConfigError&) {
    throw ConfigError("config: key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline int integer(const std::string& key, const std::string& v) {
  const double x = number(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("config: key '" + key + "': expected an integer");
  return static_cast<int>(x);
}

inline std::uint64_t unsigned_integer(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config: key '" + key + "': expected a non-negative integer");
  return x;
}

inline bool boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: key '" + key + "': expected true or false");
}

inline Variant variant_of(const std::string& key, const std::string& v) {
  if (v == "single") return Variant::SingleJunction;
  if (v == "array") return Variant::Array;
  if (v == "adapted") return Variant::Adapted;
  throw ConfigError("config: key '" + key + "': unknown variant '" + v + "' (single, array, adapted)");
}

inline std::vector<double> number_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(number(key, trim(item)));
  if (out.empty()) throw ConfigError("config: key '" + key + "': empty list");
  return out;
}

// "min:max:count" or a single value.
inline ParamRange range_of(const std::string& key, const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(trim(item));
  if (parts.size() == 1) return ParamRange::fixed(number(key, parts[0]));
  if (parts.size() != 3) throw ConfigError("config: key '" + key + "': expected min:max:count");
  ParamRange r{number(key, parts[0]), number(key, parts[1]), integer(key, parts[2])};
  if (r.count < 1 || r.max < r.min) throw ConfigError("config: key '" + key + "': invalid range");
  return r;
}

using Entries = std::vector<std::pair<std::string, std::string>>;

inline Entries flatten_json(const nlohmann::json& j, const std::string& prefix = "") {
  Entries out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const auto& v = it.value();
    if (v.is_object() && !(v.contains("min") && v.contains("max"))) {
      auto sub = flatten_json(v, key);
      out.insert(out.end(), sub.begin(), sub.end());
    } else if (v.is_object()) {
      const int count = v.value("count", 1);
      out.emplace_back(key, format_double(v["min"].get<double>()) + ":" + format_double(v["max"].get<double>()) +
                                ":" + std::to_string(count));
    } else if (v.is_array()) {
      std::string s;
      for (const auto& e : v) {
        if (!s.empty()) s += ",";
        s += e.is_string() ? e.get<std::string>() : format_double(e.get<double>());
      }
      out.emplace_back(key, s);
    } else if (v.is_string()) {
      out.emplace_back(key, v.get<std::string>());
    } else if (v.is_boolean()) {
      out.emplace_back(key, v.get<bool>() ? "true" : "false");
    } else if (v.is_number()) {
      out.emplace_back(key, format_double(v.get<double>()));
    } else {
      throw ConfigError("config: key '" + key + "': unsupported JSON value");
    }
  }
  return out;
}

inline Entries parse_lines(const std::string& text) {
  Entries out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace detail

/// Parses key = value text, or JSON when the first non-blank character is '{'.
/// `circuit.preset` (table1, table2, table3) seeds the circuit before the other
/// circuit keys apply, regardless of where it appears.
inline RunConfig parse_config(const std::string& text) {
  using namespace detail;
  Entries entries;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: JSON root must be an object");
    try {
      entries = flatten_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON value: ") + e.what());
    }
  } else {
    entries = parse_lines(text);
  }

  RunConfig cfg;
  std::map<std::string, std::string> seen;
  for (const auto& [k, v] : entries) {
    if (seen.count(k)) throw ConfigError("config: duplicate key '" + k + "'");
    seen[k] = v;
  }
  if (auto it = seen.find("circuit.preset"); it != seen.end()) {
    try {
      cfg.circuit = presets::by_name(it->second);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: key 'circuit.preset': ") + e.what());
    }
  }

  bool la_set = false;
  SearchSpace space;
  std::map<std::string, ParamRange*> ranges = {
      {"search.E_Jq_GHz", &space.E_Jq}, {"search.E_Jsigma_GHz", &space.E_Jsigma}, {"search.d", &space.d},
      {"search.C_q_fF", &space.C_q},    {"search.L_nH", &space.L},               {"search.L_a_nH", &space.L_a},
      {"search.k", &space.k}};
  std::map<std::string, bool> range_set;
  bool any_search = false;
  auto& c = cfg.circuit;

  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
      {"circuit.preset", [](auto&, auto&) {}},
      {"circuit.variant", [&](auto& k, auto& v) { c.variant = variant_of(k, v); }},
      {"circuit.E_Jq_GHz", [&](auto& k, auto& v) { c.E_Jq = number(k, v); }},
      {"circuit.E_Jsigma_GHz", [&](auto& k, auto& v) { c.E_Jsigma = number(k, v); }},
      {"circuit.d", [&](auto& k, auto& v) { c.d = number(k, v); }},
      {"circuit.C_fF", [&](auto& k, auto& v) { c.C = number(k, v); }},
      {"circuit.C_q_fF", [&](auto& k, auto& v) { c.C_q = number(k, v); }},
      {"circuit.L_nH", [&](auto& k, auto& v) { c.L = number(k, v); }},
      {"circuit.L_a_nH",
       [&](auto& k, auto& v) {
         la_set = true;
         if (v == "none") c.L_a.reset();
         else c.L_a = number(k, v);
       }},
      {"circuit.k", [&](auto& k, auto& v) { c.k = integer(k, v); }},
      {"circuit.deltaL", [&](auto& k, auto& v) { c.deltaL = number(k, v); }},
      {"circuit.m", [&](auto& k, auto& v) { c.m = integer(k, v); }},
      {"flux.phi_x_pi", [&](auto& k, auto& v) { cfg.point->phi_x_pi = number(k, v); }},
      {"flux.phi_Xb_pi", [&](auto& k, auto& v) { cfg.point->phi_Xb_pi = number(k, v); }},
      {"flux.phi_x_start_pi", [&](auto& k, auto& v) { cfg.sweep->phi_x_start_pi = number(k, v); }},
      {"flux.phi_x_end_pi", [&](auto& k, auto& v) { cfg.sweep->phi_x_end_pi = number(k, v); }},
      {"flux.points", [&](auto& k, auto& v) { cfg.sweep->points = integer(k, v); }},
      {"flux.phi_Xb_list_pi", [&](auto& k, auto& v) { cfg.sweep->phi_Xb_pi = number_list(k, v); }},
      {"oracle.N_q", [&](auto& k, auto& v) { cfg.oracle.N_q = integer(k, v); }},
      {"oracle.N_r", [&](auto& k, auto& v) { cfg.oracle.N_r = integer(k, v); }},
      {"check.f_lo_GHz", [&](auto& k, auto& v) { cfg.check.band.f_lo = number(k, v); }},
      {"check.f_hi_GHz", [&](auto& k, auto& v) { cfg.check.band.f_hi = number(k, v); }},
      {"check.E_Ci_GHz", [&](auto& k, auto& v) { cfg.check.E_Ci = number(k, v); }},
      {"search.separation_GHz", [&](auto& k, auto& v) { space.separation = number(k, v); }},
      {"search.points", [&](auto& k, auto& v) { space.points = integer(k, v); }},
      {"search.seed", [&](auto& k, auto& v) { space.seed = unsigned_integer(k, v); }},
      {"search.lhs_samples", [&](auto& k, auto& v) { space.lhs_samples = integer(k, v); }},
      {"search.tune_d", [&](auto& k, auto& v) { space.tune_d = boolean(k, v); }},
      {"search.threads", [&](auto& k, auto& v) { space.threads = static_cast<unsigned>(integer(k, v)); }},
      {"output.path", [&](auto&, auto& v) { cfg.output = v; }},
  };

  const bool has_point = seen.count("flux.phi_x_pi") || seen.count("flux.phi_Xb_pi");
  const bool has_sweep = seen.count("flux.phi_x_start_pi") || seen.count("flux.phi_x_end_pi") ||
                         seen.count("flux.points") || seen.count("flux.phi_Xb_list_pi");
  if (has_point && has_sweep) throw ConfigError("config: give either a flux point or a flux sweep, not both");
  if (has_sweep) cfg.sweep.emplace();
  if (has_point) cfg.point.emplace();

  for (const auto& [k, v] : entries) {
    if (auto it = ranges.find(k); it != ranges.end()) {
      *it->second = range_of(k, v);
      range_set[k] = true;
      any_search = true;
      continue;
    }
    auto it = setters.find(k);
    if (it == setters.end()) throw ConfigError("config: unknown key '" + k + "'");
    if (k.rfind("search.", 0) == 0) any_search = true;
    it->second(k, v);
  }
  if (!la_set && c.variant != Variant::Adapted && seen.count("circuit.variant")) c.L_a.reset();

  if (any_search) {
    space.variant = c.variant;
    space.m = c.m;
    space.deltaL = c.deltaL;
    space.band = cfg.check.band;
    space.E_Ci = cfg.check.E_Ci;
    auto defaulted = [&](const char* key, ParamRange& r, double v) {
      if (!range_set[key]) r = ParamRange::fixed(v);
    };
    defaulted("search.E_Jq_GHz", space.E_Jq, c.E_Jq);
    defaulted("search.E_Jsigma_GHz", space.E_Jsigma, c.E_Jsigma);
    defaulted("search.d", space.d, c.d);
    defaulted("search.C_q_fF", space.C_q, c.C_q);
    defaulted("search.L_nH", space.L, c.L);
    defaulted("search.L_a_nH", space.L_a, c.L_a.value_or(0.0));
    defaulted("search.k", space.k, c.k);
    cfg.search = space;
  }
  return cfg;
}

/// Canonical key = value text; parse_config(serialize(cfg)) reproduces cfg.
inline std::string serialize(const RunConfig& cfg) {
  std::ostringstream os;
  auto put = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [&](const std::string& k, double v) { put(k, format_double(v)); };
  const auto& c = cfg.circuit;
  put("circuit.variant", to_string(c.variant));
  num("circuit.E_Jq_GHz", c.E_Jq);
  num("circuit.E_Jsigma_GHz", c.E_Jsigma);
  num("circuit.d", c.d);
  num("circuit.C_fF", c.C);
  num("circuit.C_q_fF", c.C_q);
  num("circuit.L_nH", c.L);
  put("circuit.L_a_nH", c.L_a ? format_double(*c.L_a) : "none");
  put("circuit.k", std::to_string(c.k));
  num("circuit.deltaL", c.deltaL);
  put("circuit.m", std::to_string(c.m));
  if (cfg.point) {
    num("flux.phi_x_pi", cfg.point->phi_x_pi);
    num("flux.phi_Xb_pi", cfg.point->phi_Xb_pi);
  }
  if (cfg.sweep) {
    num("flux.phi_x_start_pi", cfg.sweep->phi_x_start_pi);
    if (cfg.sweep->phi_x_end_pi) num("flux.phi_x_end_pi", *cfg.sweep->phi_x_end_pi);
    put("flux.points", std::to_string(cfg.sweep->points));
    std::string list;
    for (double x : cfg.sweep->phi_Xb_pi) list += (list.empty() ? "" : ",") + format_double(x);
    put("flux.phi_Xb_list_pi", list);
  }
  put("oracle.N_q", std::to_string(cfg.oracle.N_q));
  put("oracle.N_r", std::to_string(cfg.oracle.N_r));
  num("check.f_lo_GHz", cfg.check.band.f_lo);
  num("check.f_hi_GHz", cfg.check.band.f_hi);
  if (cfg.check.E_Ci) num("check.E_Ci_GHz", *cfg.check.E_Ci);
  if (cfg.search) {
    const auto& s = *cfg.search;
    auto rng = [&](const std::string& k, const ParamRange& r) {
      put(k, format_double(r.min) + ":" + format_double(r.max) + ":" + std::to_string(r.count));
    };
    rng("search.E_Jq_GHz", s.E_Jq);
    rng("search.E_Jsigma_GHz", s.E_Jsigma);
    rng("search.d", s.d);
    rng("search.C_q_fF", s.C_q);
    rng("search.L_nH", s.L);
    rng("search.L_a_nH", s.L_a);
    rng("search.k", s.k);
    num("search.separation_GHz", s.separation);
    put("search.points", std::to_string(s.points));
    put("search.seed", std::to_string(s.seed));
    put("search.lhs_samples", std::to_string(s.lhs_samples));
    put("search.tune_d", s.tune_d ? "true" : "false");
    put("search.threads", std::to_string(s.threads));
  }
  if (!cfg.output.empty()) put("output.path", cfg.output);
  return os.str();
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace istq
