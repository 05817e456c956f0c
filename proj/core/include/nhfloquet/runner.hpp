#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nhfloquet/cft.hpp"
#include "nhfloquet/entanglement.hpp"
#include "nhfloquet/gaussian.hpp"
#include "nhfloquet/model.hpp"

namespace nhf {

std::string toolkit_version();

// ---- steady states ----

enum class SteadyMethod { Auto, Eigen, Evolve };

SteadyMethod parse_steady_method(const std::string& text);

struct SteadyOptions {
  SteadyMethod method = SteadyMethod::Auto;
  int n_periods = 200;      // evolution length when the spectrum has no gap
  int sample_stride = 1;    // periods between samples in the averaged second half
  double gap_tol = 1e-6;
};

/// Steady-state value of an observable of the frame. Eigen/Auto use the dominant
/// eigenprojection; Evolve (or Auto without a gap) evolves q's initial state and averages
/// over the second half of the run.
double steady_observable(const ModelParams& p, const LatticeSpec& lat, const QuenchConfig& q,
                         const SteadyOptions& opt, const std::function<double(const GaussianFrame&)>& f);

/// Same for several observables sharing one evolution.
std::vector<double> steady_observables(const ModelParams& p, const LatticeSpec& lat, const QuenchConfig& q,
                                       const SteadyOptions& opt,
                                       const std::vector<std::function<double(const GaussianFrame&)>>& fs);

/// Sites [0, L_A) as 0-based indices.
std::vector<int> leading_block(int L_A);

/// Steady S_A for L_A = round(fraction L) at every size, then the scaling fit.
struct ScalingRun {
  std::vector<ScalingPoint> points;
  ScalingFit fit;
};

ScalingRun scaling_over_sizes(const ModelParams& p, Boundary bc, const std::vector<int>& sizes, double fraction,
                              const QuenchConfig& q, const SteadyOptions& opt, const ScalingThresholds& th = {});

/// Fixed L, several L_A, from one steady state. continuous selects exp(4 W t).
ScalingRun scaling_over_blocks(const ModelParams& p, const LatticeSpec& lat, const std::vector<int>& blocks,
                               bool continuous, const QuenchConfig& q, const SteadyOptions& opt,
                               const ScalingThresholds& th = {});

// ---- dual line ----

/// Spacetime dual of the unitary chain J = h = alpha_u (radians):
/// J' = h' = -pi/4 + i beta with beta = ln(tan alpha_u) / 2.
ModelParams dual_line_params(double alpha_u);

/// Early growth rate S_A(T) / 2T of the unitary chain J = h = alpha_u from the Neel state,
/// L_A = L / 10, PBC even sector.
double unitary_growth_rate(double alpha_u, int L, int T);

// ---- CFT comparison ----

struct CftNumerics {
  std::vector<double> t;
  std::vector<double> S_A;
};

/// Continuous-time chain J = h = amplitude (1 - i eta) from the Neel state, S_A of [1, l]
/// on a uniform grid of step dt up to t_max. L = chain length (PBC even sector).
CftNumerics cft_numerics(double eta, int l, int L, double t_max, double dt, double amplitude = 1.0);

// ---- sweeps ----

enum class SweepTask { Spectrum, Evolve, Scaling, Tee, SpinQuench, CftCompare };

std::string to_string(SweepTask task);
SweepTask parse_sweep_task(const std::string& text);

struct SweepAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int count = 1;

  std::vector<double> values() const;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::map<std::string, std::string> fixed;
  SweepTask task = SweepTask::Spectrum;
  int workers = 1;
  std::uint64_t seed = 12345;

  /// Row-major grid size; the last axis varies fastest.
  std::size_t size() const;
  std::vector<double> coordinates(std::size_t point) const;
  /// fixed + axis values + per-point seed.
  KeyValueConfig point_config(std::size_t point) const;
  void validate() const;

  /// Keys: task, workers, seed, axis.<name> = start, stop, count; every other key is fixed.
  static SweepSpec from_config(const KeyValueConfig& cfg);
};

/// One long-format row: observable, integer index (0 for scalars) and a formatted value.
struct Observation {
  std::string observable;
  long index = 0;
  std::string value;
};

std::string format_double(double x);

/// Evaluates one task on a single resolved configuration.
/// Accepts the model-core keys plus task-specific ones (documented in the README).
std::vector<Observation> run_task(SweepTask task, const KeyValueConfig& cfg);

struct PointStatus {
  std::size_t point = 0;
  bool ok = true;
  std::string error;
  double seconds = 0.0;
};

struct RunManifest {
  std::string version;
  std::map<std::string, std::string> config;
  std::vector<SweepAxis> axes;
  std::string task;
  int workers = 1;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> point_seeds;
  double wall_seconds = 0.0;
  std::vector<PointStatus> points;
  std::map<std::string, std::string> digests;  // file name -> SHA-256 hex

  std::size_t successes() const;
  std::size_t failures() const;
  std::string to_json() const;
};

/// Runs every grid point on `workers` threads, writes `<out_dir>/sweep.csv` in grid order
/// (columns point, <axis names>, observable, index, value) and `<out_dir>/manifest.json`.
/// Point failures are recorded and the sweep continues.
RunManifest run_sweep(const SweepSpec& spec, const std::string& out_dir);

std::string sha256_file(const std::string& path);

// ---- plot data ----

/// Tidy per-figure CSVs from sweep or subcommand outputs. Supported ids:
///  fig1b  sweep.csv of a Spectrum sweep over (alpha, beta_J)   -> fig1b_phase.csv  alpha,beta_J,label
///  fig2   sweep.csv of a Spectrum sweep over alpha, emit_modes  -> fig2_modes.csv   alpha,mode_index,abs_eps
///  fig3   sweep.csv of an Evolve sweep over beta_J              -> fig3_entropy.csv period,S_A,beta_J
///  fig4   sweep.csv of an Evolve sweep over dual_alpha          -> fig4_density.csv alpha,density,growth_rate
///  fig6   sweep.csv of a Tee sweep over (L, beta_J)             -> fig6_tee.csv     beta_J,S_top,L,x_collapsed
/// Throws ValidationError naming a missing column. Returns the written paths.
std::vector<std::string> emit_plot_data(const std::vector<std::string>& csv_paths, const std::string& figure,
                                        const std::string& out_dir);

}  // namespace nhf
