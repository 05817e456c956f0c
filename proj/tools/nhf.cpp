// nhf: command-line front end for the non-Hermitian kicked Ising toolkit.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhfloquet/cft.hpp"
#include "nhfloquet/entanglement.hpp"
#include "nhfloquet/errors.hpp"
#include "nhfloquet/gaussian.hpp"
#include "nhfloquet/runner.hpp"
#include "nhfloquet/spectral.hpp"
#include "nhfloquet/spin.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace nhf;

namespace {

struct Globals {
  std::string config;
  std::string out_dir = ".";
  int workers = 0;
  long seed = -1;
  std::vector<std::string> sets;  // key=value overrides
};

// Flags of a subcommand that map straight onto config keys.
using Overrides = std::map<std::string, std::string>;

void key_option(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                const std::string& help) {
  app->add_option_function<std::string>(flag, [&ov, key](const std::string& v) { ov[key] = v; }, help);
}

KeyValueConfig build_config(const Globals& g, const Overrides& ov) {
  KeyValueConfig cfg = g.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(g.config);
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : ov) cfg.set(k, v);
  if (g.seed >= 0) cfg.set("seed", std::to_string(g.seed));
  return cfg;
}

std::string out_path(const Globals& g, const std::string& explicit_path, const std::string& name) {
  if (!explicit_path.empty()) {
    const fs::path p(explicit_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return explicit_path;
  }
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

// Sibling of the CSV: foo.csv -> foo.json, foo.csv -> foo_summary.csv.
std::string sibling(const std::string& csv, const std::string& suffix) {
  fs::path p(csv);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::ofstream open_file(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  return out;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_file(path);
  out << j.dump(2) << '\n';
}

std::string classify_mode(cplx eps, double tol_real, const std::vector<EdgeModeRecord>& edges) {
  for (const auto& e : edges) {
    if (std::abs(e.energy - eps) < 1e-12) return e.kind == EdgeKind::Zero ? "zero-edge" : "pi-edge";
  }
  if (std::abs(eps.imag()) <= tol_real) return "real";
  // Im eps = -ln|mu|
  return eps.imag() < 0.0 ? "growing" : "decaying";
}

int cmd_spectrum(const Globals& g, const Overrides& ov, const std::string& out) {
  const KeyValueConfig cfg = build_config(g, ov);
  const RunConfig rc = resolve_run_config(cfg);
  const double tol_real = cfg.get_double_or("tol_real", -1.0);
  const double tol_edge = cfg.get_double_or("tol_edge", kDefaultTolEdge);
  const SpectrumReport rep = spectrum_report(rc.params, rc.lattice, tol_real, tol_edge);

  const std::string csv = out_path(g, out, "spectrum.csv");
  auto f = open_file(csv);
  f << "k_or_index,re_eps,im_eps,classification\n";
  if (rc.lattice.periodic()) {
    for (double k : allowed_momenta(rc.lattice)) {
      const DispersionPoint d = floquet_dispersion(rc.params.J(), rc.params.h(), k);
      for (const cplx e : d.epsilon) {
        f << format_double(k) << ',' << format_double(e.real()) << ',' << format_double(e.imag()) << ','
          << to_string(d.classification) << '\n';
      }
    }
  } else {
    for (std::size_t i = 0; i < rep.quasienergies.size(); ++i) {
      const cplx e = rep.quasienergies[i];
      f << i << ',' << format_double(e.real()) << ',' << format_double(e.imag()) << ','
        << classify_mode(e, rep.tol_real, rep.edge_modes) << '\n';
    }
  }

  json summary;
  summary["n_real_modes"] = rep.n_real_modes;
  auto& edges = summary["edge_modes"] = json::array();
  for (const auto& e : rep.edge_modes) {
    edges.push_back({{"kind", to_string(e.kind)},
                     {"re", e.energy.real()},
                     {"im", e.energy.imag()},
                     {"loc_len", e.localization_length}});
  }
  if (!rc.lattice.periodic() && rc.lattice.L >= 8) {
    summary["phase"] = to_string(spectral_phase(rc.params, rc.lattice.L, tol_real, tol_edge));
  } else if (rc.params.equal_alpha) {
    summary["phase"] = to_string(phase_label_from_params(rc.params));
  } else {
    summary["phase"] = nullptr;
  }
  summary["diagonalizable"] = rep.diagonalizable;
  summary["edge_warning"] = rep.edge_warning;
  write_json(sibling(csv, ".json"), summary);
  return 0;
}

int cmd_evolve(const Globals& g, const Overrides& ov, const std::string& out, const std::string& dump_dir) {
  const KeyValueConfig cfg = build_config(g, ov);
  const RunConfig rc = resolve_run_config(cfg);
  StroboscopicOptions opt;
  opt.subsystem = {cfg.get_int_or("A_start", 1), cfg.get_int_or("L_A", std::max(1, rc.lattice.L / 10))};
  opt.diagnostic_stride = cfg.get_int_or("diagnostic_stride", 1);
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    opt.on_period = [&](const GaussianFrame& f) {
      dump_correlations(correlation_from_frame(f), f.period_count, dump_dir);
    };
  }
  const EntropyTrace tr = stroboscopic_run(rc.params, rc.lattice, rc.quench, opt);
  auto f = open_file(out_path(g, out, "evolve.csv"));
  f << "period,S_A,norm_log,purity_residual\n";
  for (std::size_t i = 0; i < tr.S_A.size(); ++i) {
    f << tr.period[i] << ',' << format_double(tr.S_A[i]) << ',' << format_double(tr.norm_log[i]) << ','
      << format_double(tr.purity_residual[i]) << '\n';
  }
  return 0;
}

int cmd_scaling(const Globals& g, const Overrides& ov, const std::string& out) {
  const KeyValueConfig cfg = build_config(g, ov);
  std::vector<ScalingPoint> points;
  ScalingFit fit;
  const auto rows = run_task(SweepTask::Scaling, cfg);
  // Rebuild the points from the task rows so the subcommand and a one-point sweep agree.
  const RunConfig rc = resolve_run_config(cfg);
  const bool blocks = cfg.has("la_list");
  const double fraction = cfg.get_double_or("la_fraction", 0.1);
  json summary;
  for (const auto& r : rows) {
    if (r.observable == "S_A") {
      const int n = static_cast<int>(r.index);
      const int L = blocks ? rc.lattice.L : n;
      const int L_A = blocks ? n : std::max(1, static_cast<int>(std::lround(fraction * n)));
      points.push_back({L, L_A, std::stod(r.value)});
    } else if (r.observable == "law") {
      summary["law"] = r.value;
    } else {
      summary[r.observable] = std::stod(r.value);
    }
  }
  auto f = open_file(out_path(g, out, "scaling.csv"));
  f << "L,L_A,S_A\n";
  for (const auto& p : points) f << p.L << ',' << p.L_A << ',' << format_double(p.S_A) << '\n';
  json j{{"a", summary["a"]}, {"b", summary["b"]}, {"residual", summary["residual"]}, {"law", summary["law"]},
         {"slope", summary["slope"]}};
  write_json(sibling(out_path(g, out, "scaling.csv"), ".json"), j);
  return 0;
}

int cmd_tee(const Globals& g, const Overrides& ov, const std::string& out) {
  KeyValueConfig cfg = build_config(g, ov);
  std::vector<int> sizes;
  for (double v : cfg.has("sizes") ? cfg.get_list("sizes") : std::vector<double>{cfg.get_double_or("L", 16)}) {
    sizes.push_back(static_cast<int>(v));
  }
  std::vector<double> betas;
  if (cfg.has("beta_J_grid")) {
    const auto v = cfg.get_list("beta_J_grid");
    if (v.size() != 3) throw ValidationError("beta_J_grid needs start, stop, count");
    betas = SweepAxis{"beta_J", v[0], v[1], static_cast<int>(v[2])}.values();
  } else {
    betas = {cfg.get_double_or("beta_J", 0.0)};
  }
  CollapseCurves curves;
  const std::string csv = out_path(g, out, "tee.csv");
  auto f = open_file(csv);
  f << "L,beta_J,S_top\n";
  for (int L : sizes) {
    for (double b : betas) {
      KeyValueConfig point = cfg;
      point.set("L", std::to_string(L));
      point.set("beta_J", format_double(b));
      const double s = std::stod(run_task(SweepTask::Tee, point).front().value);
      curves[L].emplace_back(b, s);
      f << L << ',' << format_double(b) << ',' << format_double(s) << '\n';
    }
  }
  if (curves.size() >= 3 && betas.size() >= 3) {
    const CollapseResult c = tee_collapse(curves);
    write_json(sibling(csv, ".json"), {{"beta_J0", c.beta_J0}, {"nu", c.nu}, {"residual", c.collapse_residual}});
  }
  return 0;
}

int cmd_spin(const Globals& g, const Overrides& ov, const std::string& out) {
  const KeyValueConfig cfg = build_config(g, ov);
  const RunConfig rc = resolve_run_config(cfg);
  const ObservableTrace tr = quench_experiment(rc.params, rc.lattice, rc.quench);
  const std::string csv = out_path(g, out, "spin_quench.csv");
  auto f = open_file(csv);
  f << "period,site,Sx\n";
  auto s = open_file(sibling(csv, "_summary.csv"));
  s << "period,SxSx_edge,ghz_overlap\n";
  for (std::size_t t = 0; t < tr.entries.size(); ++t) {
    const auto& e = tr.entries[t];
    for (std::size_t j = 0; j < e.Sx.size(); ++j) f << t << ',' << j + 1 << ',' << format_double(e.Sx[j]) << '\n';
    s << t << ',' << format_double(e.SxSx_edge) << ',' << format_double(e.ghz_overlap) << '\n';
  }
  return 0;
}

int cmd_cft(const Globals& g, const Overrides& ov, const std::string& out) {
  const KeyValueConfig cfg = build_config(g, ov);
  CftParams p;
  p.c = cfg.get_double_or("c", p.c);
  p.epsilon = cfg.get_double_or("epsilon", p.epsilon);
  p.eta_rot = cfg.get_double_or("eta", p.eta_rot);
  p.l = cfg.get_double_or("l", p.l);
  p.validate();
  const int l = static_cast<int>(std::lround(p.l));
  const double t_max = cfg.get_double_or("t_max", 2.0 * p.l);
  const double dt = cfg.get_double_or("dt", 0.05);
  const CftNumerics num =
      cft_numerics(p.eta_rot, l, cfg.get_int_or("L", 10 * l), t_max, dt, cfg.get_double_or("cft_amplitude", 1.0));
  const CftCurve curve = entropy_curve(p, num.t);
  std::vector<std::pair<double, double>> samples;
  for (std::size_t i = 0; i < num.t.size(); ++i) samples.emplace_back(num.t[i], num.S_A[i]);
  const ComparisonReport r = compare_to_numerics(curve, samples);

  const std::string csv = out_path(g, out, "cft_compare.csv");
  auto f = open_file(csv);
  f << "t,S_cft,S_numeric,valid\n";
  for (std::size_t i = 0; i < num.t.size(); ++i) {
    f << format_double(num.t[i]) << ',' << format_double(curve.S_A[i]) << ',' << format_double(num.S_A[i]) << ','
      << (curve.validity_mask[i] ? 1 : 0) << '\n';
  }
  write_json(sibling(csv, ".json"), {{"peak_time_cft", r.peak_time_cft},
                                     {"peak_time_numeric", r.peak_time_numeric},
                                     {"peak_time_ratio", r.peak_time_ratio},
                                     {"peak_height_ratio", r.peak_height_ratio},
                                     {"post_peak_slope_cft", r.post_peak_slope_cft},
                                     {"post_peak_slope_numeric", r.post_peak_slope_numeric},
                                     {"trend_agreement", r.trend_agreement},
                                     {"rms", r.rms}});
  return 0;
}

int cmd_sweep(const Globals& g, const Overrides& ov) {
  if (g.config.empty() && ov.empty() && g.sets.empty()) throw ValidationError("sweep needs --config");
  KeyValueConfig cfg = build_config(g, ov);
  SweepSpec spec = SweepSpec::from_config(cfg);
  if (g.workers > 0) spec.workers = g.workers;
  if (g.seed >= 0) spec.seed = static_cast<std::uint64_t>(g.seed);
  spec.fixed.erase("seed");
  const RunManifest m = run_sweep(spec, g.out_dir);
  std::cout << m.successes() << " of " << m.points.size() << " points succeeded in "
            << format_double(m.wall_seconds) << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nhf: non-Hermitian kicked Ising chain toolkit"};
  app.set_version_flag("--version", toolkit_version());
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  Globals g;
  app.add_option("--config", g.config, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--workers", g.workers, "Sweep worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Base RNG seed")->check(CLI::NonNegativeNumber);
  app.add_option("--set", g.sets, "Config override key=value (repeatable)");

  Overrides ov;
  std::string out, dump_dir, figure;
  std::vector<std::string> inputs;

  auto* spectrum = app.add_subcommand("spectrum", "Quasienergies, mode census, edge modes and phase label");
  key_option(spectrum, ov, "--alpha", "alpha", "alpha_J = alpha_h");
  key_option(spectrum, ov, "--beta-j", "beta_J", "Imaginary part of J");
  key_option(spectrum, ov, "--beta-h", "beta_h", "Imaginary part of h");
  key_option(spectrum, ov, "--L", "L", "Number of spins");
  key_option(spectrum, ov, "--bc", "bc", "pbc-even, pbc-odd or obc");
  key_option(spectrum, ov, "--units", "units", "pi4 (default) or rad");
  key_option(spectrum, ov, "--tol-real", "tol_real", "Real-mode tolerance (default relative 1e-8)");
  key_option(spectrum, ov, "--tol-edge", "tol_edge", "Edge-mode tolerance");
  spectrum->add_option("--out", out, "CSV path (JSON summary written next to it)");

  auto* evolve = app.add_subcommand("evolve", "Stroboscopic entanglement evolution");
  evolve->add_option("--out", out, "CSV path");
  evolve->add_option("--dump-correlations", dump_dir, "Directory for per-period correlation matrices");

  auto* scaling = app.add_subcommand("scaling", "Steady-state entanglement scaling and law");
  key_option(scaling, ov, "--sizes", "sizes", "Comma-separated chain lengths");
  key_option(scaling, ov, "--la-list", "la_list", "Comma-separated block lengths at fixed L");
  key_option(scaling, ov, "--continuous", "continuous", "1: continuous-time steady state");
  scaling->add_option("--out", out, "CSV path (JSON fit written next to it)");

  auto* tee = app.add_subcommand("tee", "Topological entanglement entropy and finite-size collapse");
  key_option(tee, ov, "--sizes", "sizes", "Comma-separated chain lengths");
  key_option(tee, ov, "--beta-j-grid", "beta_J_grid", "start,stop,count");
  tee->add_option("--out", out, "CSV path (JSON collapse written next to it)");

  auto* spin = app.add_subcommand("spin-quench", "State-vector quench with optional longitudinal field");
  spin->add_option("--out", out, "CSV path (summary written next to it)");

  auto* cft = app.add_subcommand("cft-compare", "Complex-time CFT entropy against the lattice");
  key_option(cft, ov, "--c", "c", "Central charge");
  key_option(cft, ov, "--epsilon", "epsilon", "UV cutoff");
  key_option(cft, ov, "--eta", "eta", "Time rotation");
  key_option(cft, ov, "--l", "l", "Subsystem length");
  key_option(cft, ov, "--t-max", "t_max", "Final time");
  key_option(cft, ov, "--dt", "dt", "Time step");
  key_option(cft, ov, "--L", "L", "Chain length");
  cft->add_option("--out", out, "CSV path");

  auto* sweep = app.add_subcommand("sweep", "Parallel parameter sweep with manifest");

  auto* plots = app.add_subcommand("emit-plots", "Tidy per-figure CSVs from sweep output");
  plots->add_option("--figure", figure, "fig1b, fig2, fig3, fig4 or fig6")->required();
  plots->add_option("inputs", inputs, "Input CSV files")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*spectrum) return cmd_spectrum(g, ov, out);
    if (*evolve) return cmd_evolve(g, ov, out, dump_dir);
    if (*scaling) return cmd_scaling(g, ov, out);
    if (*tee) return cmd_tee(g, ov, out);
    if (*spin) return cmd_spin(g, ov, out);
    if (*cft) return cmd_cft(g, ov, out);
    if (*sweep) return cmd_sweep(g, ov);
    if (*plots) {
      for (const auto& p : emit_plot_data(inputs, figure, g.out_dir)) std::cout << p << '\n';
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalBreakdown& e) {
    std::cerr << "numerical breakdown: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
