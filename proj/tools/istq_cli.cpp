// istq: command-line front end for the circuit analysis library.
//
// Exit codes: 0 success, 1 usage or config error, 2 constraint violation or
// physics error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "istq/istq.hpp"

namespace {

using namespace istq;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::string in;
  int points = 0;
  std::string phi_xb;
  int nq = 0;
  int nr = 0;
  bool closed_form = false;
};

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // print -0 as 0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void kv(const std::string& k, double v) { std::cout << k << " = " << num(v) << '\n'; }
void kv(const std::string& k, const std::string& v) { std::cout << k << " = " << v << '\n'; }

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.preset.empty()) {
    try {
      cfg.circuit = presets::by_name(o.preset);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.config.empty() && o.preset.empty()) throw ConfigError("no circuit given: use --config or --preset");
  if (o.nq) cfg.oracle.N_q = o.nq;
  if (o.nr) cfg.oracle.N_r = o.nr;
  if (!o.out.empty()) cfg.output = o.out;
  return cfg;
}

std::vector<double> phi_xb_list(const Options& o, const RunConfig& cfg) {
  if (o.phi_xb == "0") return {0.0};
  if (o.phi_xb == "pi") return {std::numbers::pi};
  if (o.phi_xb == "both") return {0.0, std::numbers::pi};
  if (!o.phi_xb.empty()) throw ConfigError("--phi-xb must be 0, pi or both");
  std::vector<double> out;
  for (double x : cfg.sweep ? cfg.sweep->phi_Xb_pi : std::vector<double>{0.0, 1.0}) out.push_back(x * std::numbers::pi);
  return out;
}

SweepGrid grid_of(const Options& o, const RunConfig& cfg) {
  SweepGrid g;
  if (cfg.sweep) {
    g.n_points = cfg.sweep->points;
    g.phi_x_start = cfg.sweep->phi_x_start_pi * std::numbers::pi;
    if (cfg.sweep->phi_x_end_pi) g.phi_x_end = *cfg.sweep->phi_x_end_pi * std::numbers::pi;
  }
  if (o.points) g.n_points = o.points;
  return g;
}

FluxBias point_of(const RunConfig& cfg) {
  if (cfg.sweep) throw ConfigError("this command needs a flux point (flux.phi_x_pi, flux.phi_Xb_pi), not a sweep");
  return cfg.point ? cfg.point->bias() : FluxBias{};
}

// out.csv -> out_xb0.csv / out_xbpi.csv when several tables are written.
std::string path_for(const std::string& base, double phi_xb, bool several) {
  if (!several) return base;
  const std::filesystem::path p(base);
  const std::string tag = std::abs(phi_xb) < 1e-12 ? "_xb0" : (std::abs(phi_xb - std::numbers::pi) < 1e-12 ? "_xbpi" : "_xb" + num(phi_xb / std::numbers::pi) + "pi");
  return (p.parent_path() / (p.stem().string() + tag + p.extension().string())).string();
}

void print_point(const SpectrumPoint& s) {
  kv("phi_x_rad", s.flux.phi_x);
  kv("phi_Xb_rad", s.flux.phi_Xb);
  kv("omega_r_GHz", s.omega_r);
  kv("omega_q_GHz", s.omega_q);
  kv("Delta_GHz", s.Delta);
  kv("alpha_q_GHz", s.alpha_q);
  kv("alpha_r_GHz", s.alpha_r);
  kv("alpha_q_rel", s.alpha_q_rel);
  kv("alpha_r_rel", s.alpha_r_rel);
  kv("g_xx_MHz", s.g.g_xx);
  kv("g_zx_MHz", s.g.g_zx);
  kv("g_xz_MHz", s.g.g_xz);
  kv("g_zz_MHz", s.g.g_zz);
  kv("eta", s.eta);
  kv("min_q_rad", s.minimum.phi_q);
  kv("min_r_rad", s.minimum.phi_r);
  kv("lambda_q", s.lambda_q);
  kv("lambda_r", s.lambda_r);
  kv("Z0_Ohm", s.Z0);
  kv("EJq_eff_GHz", s.EJq_eff);
  kv("E_C_GHz", s.E_C);
}

void print_features(const SweepFeatures& f, double phi_xb) {
  kv("phi_Xb_rad", phi_xb);
  kv("g_zx_max_MHz", f.g_zx_max);
  kv("g_zx_max_phi_x_rad", f.g_zx_max_flux);
  kv("g_xx_max_MHz", f.g_xx_max);
  kv("g_xx_global_max_MHz", f.g_xx_global_max);
  kv("g_zz_max_MHz", f.g_zz_max);
  kv("g_xz_max_MHz", f.g_xz_max);
  kv("gxx_zero_flux_rad", f.gxx_zero_flux ? num(*f.gxx_zero_flux) : std::string("none"));
  kv("omega_r_min_GHz", f.omega_r.min);
  kv("omega_r_max_GHz", f.omega_r.max);
  kv("Delta_min_GHz", f.Delta.min);
  kv("Delta_max_GHz", f.Delta.max);
  kv("alpha_q_rel_min", f.alpha_q_rel.min);
  kv("alpha_q_rel_max", f.alpha_q_rel.max);
  kv("alpha_r_rel_abs_max", f.alpha_r_rel_max);
  kv("separation_min_GHz", f.separation_min);
}

void print_report(const FeasibilityReport& r) {
  kv("L_max_nH", r.L_max);
  kv("L_crit_nH", r.L_crit);
  kv("k_crit", r.k_crit);
  kv("invertibility_margin", r.invertibility_margin);
  kv("omega_r_min_GHz", r.omega_r_min);
  kv("omega_r_max_GHz", r.omega_r_max);
  kv("band_ok", r.band_ok ? "true" : "false");
  kv("double_well_ok", r.double_well_ok ? "true" : "false");
  kv("array_ok", r.array_ok ? "true" : "false");
  for (const auto& m : r.messages) kv("message", m);
}

int cmd_analyze(const Options& o) {
  const auto cfg = resolve(o);
  const auto f = point_of(cfg);
  print_point(o.closed_form ? closed_form_point(cfg.circuit, f) : analyze_point(cfg.circuit, f));
  return kOk;
}

int cmd_sweep(const Options& o) {
  const auto cfg = resolve(o);
  const auto list = phi_xb_list(o, cfg);
  const auto grid = grid_of(o, cfg);
  const SweepOptions so{o.closed_form ? Model::ClosedForm : Model::Numerical, 0};
  for (double xb : list) {
    const auto t = sweep(cfg.circuit, xb, grid, so);
    if (cfg.output.empty()) {
      std::cout << to_csv(t.rows);
    } else {
      const auto path = path_for(cfg.output, xb, list.size() > 1);
      write_table(t, path);
      std::cerr << "wrote " << t.rows.size() << " rows to " << path << '\n';
    }
  }
  return kOk;
}

int cmd_features(const Options& o) {
  const auto cfg = resolve(o);
  const Model model = o.closed_form ? Model::ClosedForm : Model::Numerical;
  if (!o.in.empty()) {
    const auto t = read_table(o.in, cfg.circuit, model);
    print_features(extract_features(t), t.phi_Xb);
    return kOk;
  }
  bool first = true;
  for (double xb : phi_xb_list(o, cfg)) {
    if (!first) std::cout << '\n';
    first = false;
    print_features(extract_features(sweep(cfg.circuit, xb, grid_of(o, cfg), {model, 0})), xb);
  }
  return kOk;
}

int cmd_check(const Options& o) {
  const auto cfg = resolve(o);
  const auto r = feasibility_check(cfg.circuit, cfg.check.band, cfg.check.E_Ci);
  print_report(r);
  return r.ok() ? kOk : kViolation;
}

int cmd_oracle(const Options& o) {
  const auto cfg = resolve(o);
  const auto f = point_of(cfg);
  const auto s = solve_oracle(cfg.circuit, f, cfg.oracle);
  kv("N_q", s.basis.N_q);
  kv("N_r", s.basis.N_r);
  for (const auto& l : s.levels)
    kv("E_" + std::to_string(l.n_q) + std::to_string(l.n_r) + "_GHz", l.energy);
  kv("convergence_GHz", s.convergence);
  kv("chi_MHz", dispersive_shift(s));
  kv("alpha_q_exact_GHz", exact_qubit_anharmonicity(s));
  kv("alpha_q_perturbative_GHz", s.point.alpha_q);
  kv("omega_r_exact_GHz", exact_resonator_frequency(s));
  const auto d = longitudinal_displacement(cfg.circuit, f, cfg.oracle);
  kv("d_r_rad", d.measured);
  kv("d_r_predicted_rad", d.predicted);
  return kOk;
}

int cmd_search(const Options& o) {
  const auto cfg = resolve(o);
  SearchSpace space;
  if (cfg.search) {
    space = *cfg.search;
  } else {
    space = SearchSpace::around(cfg.circuit, 0.05, 5);
    space.band = cfg.check.band;
    space.E_Ci = cfg.check.E_Ci;
  }
  if (o.points) space.points = o.points;
  const auto r = search(space);
  const auto& b = r.best;
  kv("evaluated", static_cast<double>(r.evaluated));
  kv("feasible", static_cast<double>(r.ranked.size()));
  for (const auto& [k, n] : r.rejections) kv("rejected." + k, n);
  kv("seed", static_cast<double>(r.seed));
  kv("best.objective_MHz", b.objective);
  kv("best.E_Jq_GHz", b.params.E_Jq);
  kv("best.E_Jsigma_GHz", b.params.E_Jsigma);
  kv("best.d", b.params.d);
  kv("best.C_fF", b.params.C);
  kv("best.C_q_fF", b.params.C_q);
  kv("best.L_nH", b.params.L);
  kv("best.k", b.params.k);
  if (r.tuned) {
    kv("tuned.d", r.tuned->params.d);
    kv("tuned.g_xx_max_MHz", r.tuned->features->g_xx_max);
    kv("tuned.g_zx_max_MHz", r.tuned->features->g_zx_max);
  }
  if (!cfg.output.empty()) {
    write_candidates(r, cfg.output);
    std::cerr << "wrote " << r.ranked.size() << " candidates to " << cfg.output << '\n';
  }
  return kOk;
}

int cmd_table(int n, const Options& o) {
  const auto rep = reference::compare_table(n, o.points ? o.points : 201);
  std::cout << reference::render(rep);
  return rep.all_pass() ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analysis of an inductively shunted transmon coupled to an embedded resonator"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c, bool circuit = true) {
    if (circuit) {
      c->add_option("--config", o.config, "Run configuration (key = value or JSON)");
      c->add_option("--preset", o.preset, "Built-in circuit: table1, table2 or table3");
    }
    c->add_option("--points", o.points, "Sweep points")->check(CLI::PositiveNumber);
  };

  auto* analyze = app.add_subcommand("analyze", "Spectrum at one flux point");
  common(analyze);
  analyze->add_flag("--closed-form", o.closed_form, "Use the closed-form model");

  auto* sweep_cmd = app.add_subcommand("sweep", "Flux sweep to CSV");
  common(sweep_cmd);
  sweep_cmd->add_option("--out", o.out, "Output CSV (suffixed per phi_Xb when several)");
  sweep_cmd->add_option("--phi-xb", o.phi_xb, "0, pi or both")->check(CLI::IsMember({"0", "pi", "both"}));
  sweep_cmd->add_flag("--closed-form", o.closed_form, "Use the closed-form model");

  auto* features = app.add_subcommand("features", "Feature summary of a sweep");
  common(features);
  features->add_option("--in", o.in, "Sweep CSV written by `sweep`");
  features->add_option("--phi-xb", o.phi_xb, "0, pi or both")->check(CLI::IsMember({"0", "pi", "both"}));
  features->add_flag("--closed-form", o.closed_form, "Use the closed-form model");

  auto* check = app.add_subcommand("check", "Feasibility report");
  common(check);

  auto* oracle = app.add_subcommand("oracle", "Exact diagonalization at one flux point");
  common(oracle);
  oracle->add_option("--nq", o.nq, "Qubit basis size")->check(CLI::PositiveNumber);
  oracle->add_option("--nr", o.nr, "Resonator basis size")->check(CLI::PositiveNumber);

  auto* search_cmd = app.add_subcommand("search", "Parameter search");
  common(search_cmd);
  search_cmd->add_option("--out", o.out, "Ranked candidates CSV");

  CLI::App* tables[3];
  for (int i = 0; i < 3; ++i) {
    tables[i] = app.add_subcommand("table" + std::to_string(i + 1), "Compare built-in parameter set " + std::to_string(i + 1));
    common(tables[i], false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*analyze) return cmd_analyze(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*features) return cmd_features(o);
    if (*check) return cmd_check(o);
    if (*oracle) return cmd_oracle(o);
    if (*search_cmd) return cmd_search(o);
    for (int i = 0; i < 3; ++i)
      if (*tables[i]) return cmd_table(i + 1, o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kViolation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kViolation;
  }
  return kUsage;
}
