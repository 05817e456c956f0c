#include "nhfloquet/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "nhfloquet/errors.hpp"
#include "nhfloquet/spectral.hpp"
#include "nhfloquet/spin.hpp"

#ifndef NHF_VERSION
#define NHF_VERSION "0.0.0"
#endif

namespace nhf {

namespace {

namespace fs = std::filesystem;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string source;

  std::size_t column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError(source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  Table t;
  t.source = path;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size()) throw ValidationError(path + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + s + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  return out;
}

double entropy_of_block(const GaussianFrame& f, const std::vector<int>& sites) { return entropy_from_frame(f, sites); }

SteadyOptions steady_options(const KeyValueConfig& cfg) {
  SteadyOptions opt;
  opt.method = parse_steady_method(cfg.get_or("steady", "auto"));
  opt.n_periods = cfg.get_int_or("n_periods", opt.n_periods);
  opt.sample_stride = cfg.get_int_or("sample_stride", opt.sample_stride);
  return opt;
}

ScalingThresholds scaling_thresholds(const KeyValueConfig& cfg) {
  ScalingThresholds th;
  th.volume_slope = cfg.get_double_or("volume_slope", th.volume_slope);
  th.log_coefficient = cfg.get_double_or("log_coefficient", th.log_coefficient);
  return th;
}

// Replaces a dual_alpha key by the couplings of the dual-line chain.
KeyValueConfig apply_dual_alpha(const KeyValueConfig& cfg) {
  if (!cfg.has("dual_alpha")) return cfg;
  const Units units = parse_units(cfg.get_or("units", "pi4"));
  const ModelParams d = dual_line_params(to_radians(cfg.get_double("dual_alpha"), units));
  KeyValueConfig out = cfg;
  out.set("alpha_J", format_double(from_radians(d.alpha_J, units)));
  out.set("alpha_h", format_double(from_radians(d.alpha_h, units)));
  out.set("beta_J", format_double(from_radians(d.beta_J, units)));
  out.set("beta_h", format_double(from_radians(d.beta_h, units)));
  return out;
}

std::vector<int> int_list(const KeyValueConfig& cfg, const std::string& key) {
  std::vector<int> out;
  for (double v : cfg.get_list(key)) {
    if (v != std::floor(v)) throw ValidationError("config key '" + key + "': expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void add(std::vector<Observation>& rows, const std::string& name, double v, long index = 0) {
  rows.push_back({name, index, format_double(v)});
}

void add(std::vector<Observation>& rows, const std::string& name, const std::string& v, long index = 0) {
  rows.push_back({name, index, v});
}

std::vector<Observation> spectrum_task(const KeyValueConfig& cfg) {
  const RunConfig rc = resolve_run_config(cfg);
  const double tol_real = cfg.get_double_or("tol_real", -1.0);
  const double tol_edge = cfg.get_double_or("tol_edge", kDefaultTolEdge);
  const SpectrumReport rep = spectrum_report(rc.params, rc.lattice, tol_real, tol_edge);
  std::vector<Observation> rows;
  add(rows, "n_real_modes", rep.n_real_modes);
  add(rows, "n_zero_edges", rep.count_edges(EdgeKind::Zero));
  add(rows, "n_pi_edges", rep.count_edges(EdgeKind::Pi));
  add(rows, "diagonalizable", rep.diagonalizable ? 1.0 : 0.0);
  add(rows, "edge_warning", rep.edge_warning ? 1.0 : 0.0);
  if (!rc.lattice.periodic() && rc.lattice.L >= 8) {
    add(rows, "spectral_phase", to_string(spectral_phase(rc.params, rc.lattice.L, tol_real, tol_edge)));
  }
  if (rc.params.equal_alpha) add(rows, "param_phase", to_string(phase_label_from_params(rc.params)));
  if (cfg.get_int_or("emit_modes", 0) != 0) {
    std::vector<cplx> eps = rep.quasienergies;
    std::stable_sort(eps.begin(), eps.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const long idx = static_cast<long>(i);
      add(rows, "abs_eps", std::abs(eps[i]), idx);
      add(rows, "re_eps", eps[i].real(), idx);
      add(rows, "im_eps", eps[i].imag(), idx);
    }
  }
  return rows;
}

std::vector<Observation> evolve_task(const KeyValueConfig& cfg) {
  const RunConfig rc = resolve_run_config(cfg);
  const int L = rc.lattice.L;
  StroboscopicOptions opt;
  opt.subsystem = {cfg.get_int_or("A_start", 1), cfg.get_int_or("L_A", std::max(1, L / 10))};
  opt.diagnostic_stride = cfg.get_int_or("diagnostic_stride", 10);
  const EntropyTrace tr = stroboscopic_run(rc.params, rc.lattice, rc.quench, opt);
  std::vector<Observation> rows;
  if (cfg.get_int_or("emit_trace", 1) != 0) {
    for (std::size_t i = 0; i < tr.S_A.size(); ++i) add(rows, "S_A", tr.S_A[i], tr.period[i]);
  }
  const std::size_t n = tr.S_A.size();
  double late = 0.0;
  std::size_t count = 0;
  for (std::size_t i = (n - 1) / 2; i < n; ++i, ++count) late += tr.S_A[i];
  late /= static_cast<double>(count);
  add(rows, "S_A_final", tr.S_A.back());
  add(rows, "S_A_late_mean", late);
  add(rows, "density", late / opt.subsystem.length);
  add(rows, "norm_log_final", tr.norm_log.back());
  add(rows, "purity_residual_max", *std::max_element(tr.purity_residual.begin(), tr.purity_residual.end()));
  if (cfg.has("dual_alpha")) {
    const Units units = parse_units(cfg.get_or("units", "pi4"));
    const int gL = cfg.get_int_or("growth_L", 2 * L);
    const int gT = cfg.get_int_or("growth_T", std::max(1, gL / 40));
    add(rows, "growth_rate", unitary_growth_rate(to_radians(cfg.get_double("dual_alpha"), units), gL, gT));
  }
  return rows;
}

std::vector<Observation> scaling_task(const KeyValueConfig& cfg) {
  const RunConfig rc = resolve_run_config(cfg);
  const SteadyOptions opt = steady_options(cfg);
  const ScalingThresholds th = scaling_thresholds(cfg);
  ScalingRun run;
  std::vector<Observation> rows;
  if (cfg.has("la_list")) {
    run = scaling_over_blocks(rc.params, rc.lattice, int_list(cfg, "la_list"), cfg.get_int_or("continuous", 0) != 0,
                              rc.quench, opt, th);
    for (const auto& pt : run.points) add(rows, "S_A", pt.S_A, pt.L_A);
  } else {
    const std::vector<int> sizes =
        cfg.has("sizes") ? int_list(cfg, "sizes") : std::vector<int>{40, 60, 80, 100, 120, 160, 200};
    run = scaling_over_sizes(rc.params, rc.lattice.bc, sizes, cfg.get_double_or("la_fraction", 0.1), rc.quench, opt,
                             th);
    for (const auto& pt : run.points) add(rows, "S_A", pt.S_A, pt.L);
  }
  add(rows, "a", run.fit.a);
  add(rows, "b", run.fit.b);
  add(rows, "residual", run.fit.residual);
  add(rows, "slope", run.fit.slope);
  add(rows, "law", to_string(run.fit.law));
  return rows;
}

TeePartition tee_partition(const KeyValueConfig& cfg, int L) {
  if (!cfg.has("tee_lengths")) return TeePartition::quarters(L);
  const auto v = int_list(cfg, "tee_lengths");
  if (v.size() != 4) throw ValidationError("tee_lengths needs four segment lengths");
  TeePartition p;
  std::copy(v.begin(), v.end(), p.lengths.begin());
  return p;
}

std::vector<Observation> tee_task(const KeyValueConfig& cfg) {
  const RunConfig rc = resolve_run_config(cfg);
  const TeePartition part = tee_partition(cfg, rc.lattice.L);
  part.validate(rc.lattice.L);
  const double s = steady_observable(rc.params, rc.lattice, rc.quench, steady_options(cfg),
                                     [&](const GaussianFrame& f) { return tee(f, part).S_top; });
  std::vector<Observation> rows;
  add(rows, "S_top", s);
  return rows;
}

std::vector<Observation> spin_task(const KeyValueConfig& cfg) {
  const RunConfig rc = resolve_run_config(cfg);
  const ObservableTrace tr = quench_experiment(rc.params, rc.lattice, rc.quench);
  const ObservableEntry& last = tr.entries.back();
  std::vector<Observation> rows;
  for (std::size_t j = 0; j < last.Sx.size(); ++j) add(rows, "Sx", last.Sx[j], static_cast<long>(j + 1));
  add(rows, "SxSx_edge", last.SxSx_edge);
  add(rows, "ghz_overlap", last.ghz_overlap);
  add(rows, "steady_period", tr.steady_period ? *tr.steady_period : -1);
  const int n = rc.quench.n_periods;
  if (n >= 12) add(rows, "decay_rate", envelope_decay_rate(tr, std::min(10, n / 2), n));
  return rows;
}

CftParams cft_params(const KeyValueConfig& cfg) {
  CftParams p;
  p.c = cfg.get_double_or("c", p.c);
  p.epsilon = cfg.get_double_or("epsilon", p.epsilon);
  p.eta_rot = cfg.get_double_or("eta", p.eta_rot);
  p.l = cfg.get_double_or("l", p.l);
  p.n = cfg.get_int_or("n", p.n);
  p.validate();
  return p;
}

std::vector<Observation> cft_task(const KeyValueConfig& cfg) {
  const CftParams p = cft_params(cfg);
  const int l = static_cast<int>(std::lround(p.l));
  const double t_max = cfg.get_double_or("t_max", 2.0 * p.l);
  const double dt = cfg.get_double_or("dt", 0.05);
  const CftNumerics num = cft_numerics(p.eta_rot, l, cfg.get_int_or("L", 10 * l), t_max, dt,
                                       cfg.get_double_or("cft_amplitude", 1.0));
  const CftCurve curve = entropy_curve(p, num.t);
  std::vector<std::pair<double, double>> samples;
  for (std::size_t i = 0; i < num.t.size(); ++i) samples.emplace_back(num.t[i], num.S_A[i]);
  const ComparisonReport r = compare_to_numerics(curve, samples);
  std::vector<Observation> rows;
  add(rows, "peak_time_cft", r.peak_time_cft);
  add(rows, "peak_time_numeric", r.peak_time_numeric);
  add(rows, "peak_time_ratio", r.peak_time_ratio);
  add(rows, "peak_height_ratio", r.peak_height_ratio);
  add(rows, "post_peak_slope_cft", r.post_peak_slope_cft);
  add(rows, "post_peak_slope_numeric", r.post_peak_slope_numeric);
  add(rows, "trend_agreement", r.trend_agreement ? 1.0 : 0.0);
  add(rows, "rms", r.rms);
  return rows;
}

// Long-format CSV reader shared by the figure emitters.
struct LongRow {
  std::map<std::string, double> axes;
  std::string observable;
  long index = 0;
  std::string value;
};

std::vector<LongRow> read_long(const std::vector<std::string>& paths, const std::vector<std::string>& axes) {
  std::vector<LongRow> out;
  for (const auto& path : paths) {
    const Table t = read_table(path);
    std::vector<std::size_t> ax;
    for (const auto& a : axes) ax.push_back(t.column(a));
    const std::size_t obs = t.column("observable");
    const std::size_t idx = t.column("index");
    const std::size_t val = t.column("value");
    for (const auto& row : t.rows) {
      LongRow r;
      for (std::size_t k = 0; k < axes.size(); ++k) r.axes[axes[k]] = to_double(row[ax[k]]);
      r.observable = row[obs];
      r.index = std::stol(row[idx]);
      r.value = row[val];
      out.push_back(std::move(r));
    }
  }
  return out;
}

void require_rows(const std::vector<LongRow>& rows, const std::string& observable, const std::string& figure) {
  for (const auto& r : rows) {
    if (r.observable == observable) return;
  }
  throw ValidationError(figure + ": no '" + observable + "' observations in the input");
}

}  // namespace

std::string toolkit_version() { return NHF_VERSION; }

SteadyMethod parse_steady_method(const std::string& text) {
  if (text == "auto") return SteadyMethod::Auto;
  if (text == "eigen") return SteadyMethod::Eigen;
  if (text == "evolve") return SteadyMethod::Evolve;
  throw ValidationError("unknown steady method '" + text + "' (auto, eigen, evolve)");
}

std::vector<double> steady_observables(const ModelParams& p, const LatticeSpec& lat, const QuenchConfig& q,
                                       const SteadyOptions& opt,
                                       const std::vector<std::function<double(const GaussianFrame&)>>& fs) {
  std::vector<double> out(fs.size(), 0.0);
  if (opt.method != SteadyMethod::Evolve) {
    try {
      const GaussianFrame f = dominant_frame(build_transfer_matrix(p, lat), opt.gap_tol);
      for (std::size_t i = 0; i < fs.size(); ++i) out[i] = fs[i](f);
      return out;
    } catch (const NumericalBreakdown&) {
      if (opt.method == SteadyMethod::Eigen) throw;
    }
  }
  if (opt.n_periods < 2) throw ValidationError("steady-state evolution needs at least 2 periods");
  const int stride = std::max(opt.sample_stride, 1);
  GaussianFrame f = initial_frame(q, lat);
  const auto kicks = FloquetKicks::from(p, lat);
  const int first = opt.n_periods / 2;
  int samples = 0;
  for (int t = 1; t <= opt.n_periods; ++t) {
    period_map(f, kicks);
    if (t >= first && (t - first) % stride == 0) {
      for (std::size_t i = 0; i < fs.size(); ++i) out[i] += fs[i](f);
      ++samples;
    }
  }
  for (double& v : out) v /= samples;
  return out;
}

double steady_observable(const ModelParams& p, const LatticeSpec& lat, const QuenchConfig& q,
                         const SteadyOptions& opt, const std::function<double(const GaussianFrame&)>& f) {
  return steady_observables(p, lat, q, opt, {f}).front();
}

std::vector<int> leading_block(int L_A) {
  std::vector<int> s(static_cast<std::size_t>(L_A));
  for (int i = 0; i < L_A; ++i) s[static_cast<std::size_t>(i)] = i;
  return s;
}

ScalingRun scaling_over_sizes(const ModelParams& p, Boundary bc, const std::vector<int>& sizes, double fraction,
                              const QuenchConfig& q, const SteadyOptions& opt, const ScalingThresholds& th) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("subsystem fraction must lie in (0, 1)");
  ScalingRun run;
  for (int L : sizes) {
    const LatticeSpec lat{L, bc};
    lat.validate();
    const int L_A = std::max(1, static_cast<int>(std::lround(fraction * L)));
    const auto block = leading_block(L_A);
    const double s = steady_observable(p, lat, q, opt, [&](const GaussianFrame& f) { return entropy_of_block(f, block); });
    run.points.push_back({L, L_A, s});
  }
  run.fit = fit_scaling(run.points, th);
  return run;
}

ScalingRun scaling_over_blocks(const ModelParams& p, const LatticeSpec& lat, const std::vector<int>& blocks,
                               bool continuous, const QuenchConfig& q, const SteadyOptions& opt,
                               const ScalingThresholds& th) {
  lat.validate();
  std::vector<std::function<double(const GaussianFrame&)>> fs;
  for (int L_A : blocks) {
    if (L_A < 1 || L_A >= lat.L) throw ValidationError("subsystem sizes must lie in [1, L)");
    fs.push_back([L_A](const GaussianFrame& f) { return entropy_of_block(f, leading_block(L_A)); });
  }
  std::vector<double> s;
  if (continuous) {
    const GaussianFrame f = continuous_steady_frame(continuous_form(p, lat), opt.gap_tol);
    for (const auto& fn : fs) s.push_back(fn(f));
  } else {
    s = steady_observables(p, lat, q, opt, fs);
  }
  ScalingRun run;
  for (std::size_t i = 0; i < blocks.size(); ++i) run.points.push_back({lat.L, blocks[i], s[i]});
  run.fit = fit_scaling(run.points, th);
  return run;
}

ModelParams dual_line_params(double alpha_u) {
  if (!(alpha_u > 0.0 && alpha_u < kPi / 2.0)) throw ValidationError("dual line needs 0 < alpha < pi/2");
  const double beta = 0.5 * std::log(std::tan(alpha_u));
  return make_params(-kQuarterPi, beta, -kQuarterPi, beta, Units::Radians);
}

double unitary_growth_rate(double alpha_u, int L, int T) {
  if (T < 1) throw ValidationError("growth time must be positive");
  const ModelParams p = make_params(alpha_u, 0.0, alpha_u, 0.0, Units::Radians);
  const LatticeSpec lat{L, Boundary::PeriodicEvenParity};
  QuenchConfig q;
  q.n_periods = T;
  StroboscopicOptions opt;
  opt.subsystem = {1, std::max(1, L / 10)};
  opt.diagnostic_stride = T;
  const EntropyTrace tr = stroboscopic_run(p, lat, q, opt);
  return tr.S_A.back() / (2.0 * T);
}

CftNumerics cft_numerics(double eta, int l, int L, double t_max, double dt, double amplitude) {
  if (!(dt > 0.0) || !(t_max > 0.0)) throw ValidationError("time grid needs dt > 0 and t_max > 0");
  if (l < 1 || l >= L) throw ValidationError("subsystem length must lie in [1, L)");
  const ModelParams p = make_params(amplitude, -amplitude * eta, amplitude, -amplitude * eta, Units::Radians);
  const LatticeSpec lat{L, Boundary::PeriodicEvenParity};
  const CMatrix step = (4.0 * dt * continuous_form(p, lat).W).exp();
  GaussianFrame f = initial_frame(QuenchConfig{}, lat);
  const auto block = leading_block(l);
  const int n = static_cast<int>(std::lround(t_max / dt));
  CftNumerics out;
  for (int i = 0; i <= n; ++i) {
    if (i > 0) {
      f.Phi = step * f.Phi;
      orthonormalize(f);
    }
    out.t.push_back(i * dt);
    out.S_A.push_back(entropy_from_frame(f, block));
  }
  return out;
}

std::string to_string(SweepTask task) {
  switch (task) {
    case SweepTask::Spectrum: return "spectrum";
    case SweepTask::Evolve: return "evolve";
    case SweepTask::Scaling: return "scaling";
    case SweepTask::Tee: return "tee";
    case SweepTask::SpinQuench: return "spin-quench";
    case SweepTask::CftCompare: return "cft-compare";
  }
  return "spectrum";
}

SweepTask parse_sweep_task(const std::string& text) {
  for (SweepTask t : {SweepTask::Spectrum, SweepTask::Evolve, SweepTask::Scaling, SweepTask::Tee,
                      SweepTask::SpinQuench, SweepTask::CftCompare}) {
    if (to_string(t) == text) return t;
  }
  throw ValidationError("unknown sweep task '" + text + "'");
}

std::vector<double> SweepAxis::values() const {
  if (count < 1) throw ValidationError("axis '" + name + "' needs count >= 1");
  if (count == 1) return {start};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
  return v;
}

std::size_t SweepSpec::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(std::max(a.count, 0));
  return n;
}

std::vector<double> SweepSpec::coordinates(std::size_t point) const {
  std::vector<double> c(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    const auto n = static_cast<std::size_t>(axes[k].count);
    c[k] = axes[k].values()[point % n];
    point /= n;
  }
  return c;
}

KeyValueConfig SweepSpec::point_config(std::size_t point) const {
  KeyValueConfig cfg;
  for (const auto& [k, v] : fixed) cfg.set(k, v);
  const auto c = coordinates(point);
  for (std::size_t k = 0; k < axes.size(); ++k) cfg.set(axes[k].name, format_double(c[k]));
  cfg.set("seed", std::to_string(seed + point));
  return cfg;
}

void SweepSpec::validate() const {
  if (workers < 1) throw ValidationError("workers must be positive");
  std::set<std::string> names;
  for (const auto& a : axes) {
    if (a.count < 1) throw ValidationError("axis '" + a.name + "' needs count >= 1");
    if (!std::isfinite(a.start) || !std::isfinite(a.stop)) throw ValidationError("axis '" + a.name + "' is not finite");
    if (!names.insert(a.name).second) throw ValidationError("axis '" + a.name + "' repeats");
    if (fixed.contains(a.name)) throw ValidationError("axis '" + a.name + "' is also a fixed key");
  }
}

SweepSpec SweepSpec::from_config(const KeyValueConfig& cfg) {
  SweepSpec spec;
  for (const auto& [key, value] : cfg.values()) {
    if (key == "task") {
      spec.task = parse_sweep_task(value);
    } else if (key == "workers") {
      spec.workers = cfg.get_int(key);
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(cfg.get_int(key));
    } else if (key.starts_with("axis.")) {
      const auto v = cfg.get_list(key);
      if (v.size() != 3) throw ValidationError("'" + key + "' needs start, stop, count");
      if (v[2] != std::floor(v[2])) throw ValidationError("'" + key + "': count must be an integer");
      spec.axes.push_back({key.substr(5), v[0], v[1], static_cast<int>(v[2])});
    } else {
      spec.fixed[key] = value;
    }
  }
  if (!cfg.has("task")) throw ValidationError("sweep config needs a 'task' key");
  spec.validate();
  return spec;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<Observation> run_task(SweepTask task, const KeyValueConfig& raw) {
  const KeyValueConfig cfg = apply_dual_alpha(raw);
  switch (task) {
    case SweepTask::Spectrum: return spectrum_task(cfg);
    case SweepTask::Evolve: return evolve_task(cfg);
    case SweepTask::Scaling: return scaling_task(cfg);
    case SweepTask::Tee: return tee_task(cfg);
    case SweepTask::SpinQuench: return spin_task(cfg);
    case SweepTask::CftCompare: return cft_task(cfg);
  }
  return {};
}

std::size_t RunManifest::successes() const {
  return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const PointStatus& s) { return s.ok; }));
}

std::size_t RunManifest::failures() const { return points.size() - successes(); }

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["task"] = task;
  j["workers"] = workers;
  j["seed"] = seed;
  j["config"] = config;
  auto& ax = j["axes"] = nlohmann::ordered_json::array();
  for (const auto& a : axes) ax.push_back({{"name", a.name}, {"start", a.start}, {"stop", a.stop}, {"count", a.count}});
  j["point_seeds"] = point_seeds;
  j["wall_seconds"] = wall_seconds;
  auto& pts = j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : points) {
    nlohmann::ordered_json e{{"point", p.point}, {"ok", p.ok}, {"seconds", p.seconds}};
    if (!p.ok) e["error"] = p.error;
    pts.push_back(std::move(e));
  }
  j["successes"] = successes();
  j["failures"] = failures();
  j["digests"] = digests;
  return j.dump(2);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

RunManifest run_sweep(const SweepSpec& spec, const std::string& out_dir) {
  spec.validate();
  const auto t0 = Clock::now();
  fs::create_directories(out_dir);
  const std::size_t n = spec.size();

  struct Slot {
    bool done = false;
    PointStatus status;
    std::vector<Observation> rows;
  };
  std::vector<Slot> slots(n);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      Slot s;
      s.status.point = i;
      const auto ts = Clock::now();
      try {
        s.rows = run_task(spec.task, spec.point_config(i));
      } catch (const std::exception& e) {
        s.status.ok = false;
        s.status.error = e.what();
        s.rows.clear();
      }
      s.status.seconds = seconds_since(ts);
      s.done = true;
      {
        std::lock_guard lock(mu);
        slots[i] = std::move(s);
      }
      cv.notify_all();
    }
  };

  RunManifest m;
  m.version = toolkit_version();
  m.config = spec.fixed;
  m.axes = spec.axes;
  m.task = to_string(spec.task);
  m.workers = spec.workers;
  m.seed = spec.seed;

  const std::string csv_path = (fs::path(out_dir) / "sweep.csv").string();
  {
    std::vector<std::jthread> pool;
    const int nthreads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(spec.workers), std::max<std::size_t>(n, 1)));
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker);

    // Single writer in grid order, whatever order the workers finish in.
    std::ofstream out = open_out(csv_path);
    out << "point";
    for (const auto& a : spec.axes) out << ',' << csv_field(a.name);
    out << ",observable,index,value\n";
    for (std::size_t i = 0; i < n; ++i) {
      Slot s;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return slots[i].done; });
        s = std::move(slots[i]);
        slots[i].rows.clear();
      }
      const auto c = spec.coordinates(i);
      for (const auto& r : s.rows) {
        out << i;
        for (double x : c) out << ',' << format_double(x);
        out << ',' << csv_field(r.observable) << ',' << r.index << ',' << csv_field(r.value) << '\n';
      }
      m.points.push_back(s.status);
      m.point_seeds.push_back(spec.seed + i);
    }
  }
  m.digests["sweep.csv"] = sha256_file(csv_path);
  m.wall_seconds = seconds_since(t0);
  std::ofstream man = open_out((fs::path(out_dir) / "manifest.json").string());
  man << m.to_json() << '\n';
  return m;
}

std::vector<std::string> emit_plot_data(const std::vector<std::string>& csv_paths, const std::string& figure,
                                        const std::string& out_dir) {
  if (csv_paths.empty()) throw ValidationError("emit-plots needs at least one input CSV");
  fs::create_directories(out_dir);
  const auto path_of = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

  if (figure == "fig1b") {
    const auto rows = read_long(csv_paths, {"alpha", "beta_J"});
    require_rows(rows, "spectral_phase", figure);
    const std::string path = path_of("fig1b_phase.csv");
    auto out = open_out(path);
    out << "alpha,beta_J,label\n";
    for (const auto& r : rows) {
      if (r.observable != "spectral_phase") continue;
      out << format_double(r.axes.at("alpha")) << ',' << format_double(r.axes.at("beta_J")) << ',' << r.value << '\n';
    }
    return {path};
  }
  if (figure == "fig2") {
    const auto rows = read_long(csv_paths, {"alpha"});
    require_rows(rows, "abs_eps", figure);
    const std::string path = path_of("fig2_modes.csv");
    auto out = open_out(path);
    out << "alpha,mode_index,abs_eps\n";
    for (const auto& r : rows) {
      if (r.observable != "abs_eps") continue;
      out << format_double(r.axes.at("alpha")) << ',' << r.index << ',' << r.value << '\n';
    }
    return {path};
  }
  if (figure == "fig3") {
    const auto rows = read_long(csv_paths, {"beta_J"});
    require_rows(rows, "S_A", figure);
    const std::string path = path_of("fig3_entropy.csv");
    auto out = open_out(path);
    out << "period,S_A,beta_J\n";
    for (const auto& r : rows) {
      if (r.observable != "S_A") continue;
      out << r.index << ',' << r.value << ',' << format_double(r.axes.at("beta_J")) << '\n';
    }
    return {path};
  }
  if (figure == "fig4") {
    const auto rows = read_long(csv_paths, {"dual_alpha"});
    require_rows(rows, "density", figure);
    require_rows(rows, "growth_rate", figure);
    std::map<double, std::pair<std::string, std::string>> by_alpha;
    for (const auto& r : rows) {
      if (r.observable == "density") by_alpha[r.axes.at("dual_alpha")].first = r.value;
      if (r.observable == "growth_rate") by_alpha[r.axes.at("dual_alpha")].second = r.value;
    }
    const std::string path = path_of("fig4_density.csv");
    auto out = open_out(path);
    out << "alpha,density,growth_rate\n";
    for (const auto& [a, v] : by_alpha) out << format_double(a) << ',' << v.first << ',' << v.second << '\n';
    return {path};
  }
  if (figure == "fig6") {
    const auto rows = read_long(csv_paths, {"L", "beta_J"});
    require_rows(rows, "S_top", figure);
    CollapseCurves curves;
    for (const auto& r : rows) {
      if (r.observable != "S_top") continue;
      curves[static_cast<int>(std::lround(r.axes.at("L")))].emplace_back(r.axes.at("beta_J"), to_double(r.value));
    }
    for (auto& [L, c] : curves) std::sort(c.begin(), c.end());
    const CollapseResult fit = tee_collapse(curves);
    const std::string path = path_of("fig6_tee.csv");
    auto out = open_out(path);
    out << "beta_J,S_top,L,x_collapsed\n";
    for (const auto& [L, c] : curves) {
      for (const auto& [b, s] : c) {
        out << format_double(b) << ',' << format_double(s) << ',' << L << ','
            << format_double((b - fit.beta_J0) * std::pow(static_cast<double>(L), fit.nu)) << '\n';
      }
    }
    const std::string meta = path_of("fig6_collapse.json");
    auto jm = open_out(meta);
    jm << nlohmann::ordered_json{{"beta_J0", fit.beta_J0}, {"nu", fit.nu}, {"residual", fit.collapse_residual}}.dump(2)
       << '\n';
    return {path, meta};
  }
  throw ValidationError("unknown figure id '" + figure + "' (fig1b, fig2, fig3, fig4, fig6)");
}

}  // namespace nhf
