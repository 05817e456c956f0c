#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nhfloquet/gaussian.hpp"
#include "nhfloquet/model.hpp"
#include "nhfloquet/types.hpp"

namespace nhf {

struct EntropyReport {
  double S_A = 0.0;
  std::map<int, double> renyi;
  std::vector<double> nu;  // eigenvalues of C'_A, ascending, in +- pairs
  SubsystemSpec subsystem;
};

/// Eigenvalues beyond 1 + kPurityTolerance raise PurityViolation.
inline constexpr double kPurityTolerance = 1e-6;
inline constexpr double kNuClamp = 1e-14;

/// Eigenvalues of the Hermitian restriction C'_A on the Majoranas of `sites` (0-based).
RVector subsystem_spectrum(const CorrelationMatrix& C, const std::vector<int>& sites);
/// Same spectrum from the frame rows alone, C'_A = conj(Phi_A) Phi_A^T - Phi_A Phi_A^dagger.
RVector subsystem_spectrum(const GaussianFrame& frame, const std::vector<int>& sites);

/// S = -sum_i (1 + nu_i)/2 ln((1 + nu_i)/2) over all 2 L_A eigenvalues.
double entropy_from_spectrum(const RVector& nu);
/// S^(n) = 1/(1 - n) * 1/2 * sum_i ln[((1 - nu_i)/2)^n + ((1 + nu_i)/2)^n]; n = 1 is von Neumann.
double renyi_from_spectrum(const RVector& nu, int n);

EntropyReport entropy_from_correlations(const CorrelationMatrix& C, const SubsystemSpec& sub,
                                        const LatticeSpec& lat, const std::vector<int>& renyi_orders = {});
double entropy_from_frame(const GaussianFrame& frame, const std::vector<int>& sites);

double renyi_entropy(const CorrelationMatrix& C, const SubsystemSpec& sub, const LatticeSpec& lat, int n);

/// I = S_A + S_B - S_AB. Throws ValidationError if the blocks overlap.
double mutual_information(const CorrelationMatrix& C, const SubsystemSpec& a, const SubsystemSpec& b,
                          const LatticeSpec& lat);

struct TeeResult {
  double S_top = 0.0;
  TeePartition partition;
  int L = 0;
};

/// S_top = S_AB + S_BC - S_B - S_ABC with segments laid out A, B, D, C along the chain.
TeeResult tee(const CorrelationMatrix& C, const TeePartition& partition);
TeeResult tee(const GaussianFrame& frame, const TeePartition& partition);

enum class ScalingLaw { Area, Log, Volume };
std::string to_string(ScalingLaw law);

struct ScalingPoint {
  int L = 0;
  int L_A = 0;
  double S_A = 0.0;
};

struct ScalingThresholds {
  double volume_slope = 0.05;  // nats per site
  double log_coefficient = 0.02;
};

struct ScalingFit {
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;         // RMS of the log fit
  double slope = 0.0;            // linear fit S = slope * L_A + intercept
  double intercept = 0.0;
  double linear_residual = 0.0;  // RMS of the linear fit
  ScalingLaw law = ScalingLaw::Area;
};

/// a ln((L/pi) sin(pi L_A / L)) + b by least squares plus a linear fit in L_A; law by thresholds.
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points, const ScalingThresholds& th = {});

struct CollapseResult {
  double beta_J0 = 0.0;
  double nu = 1.0;
  double collapse_residual = 0.0;
};

struct CollapseOptions {
  double nu_min = 0.2;
  double nu_max = 3.0;
  int grid_beta = 81;
  int grid_nu = 57;
  int min_overlap = 3;
  double refine_tol = 1e-7;
};

/// size L -> samples (beta_J, S_top).
using CollapseCurves = std::map<int, std::vector<std::pair<double, double>>>;

/// Mean squared spread between curves plotted against (beta_J - beta_J0) L^nu.
/// Returns +inf when some pair of sizes shares fewer than min_overlap points.
double collapse_cost(const CollapseCurves& curves, double beta_J0, double nu, int min_overlap = 3);

/// Grid search then pattern refinement; ties go to the smaller nu.
CollapseResult tee_collapse(const CollapseCurves& curves, const CollapseOptions& opt = {});

}  // namespace nhf
