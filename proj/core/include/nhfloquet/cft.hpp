#pragma once

#include <utility>
#include <vector>

namespace nhf {

/// Complex-time Calabrese-Cardy quench. eta_rot is the rotation of t -> (1 - i eta_rot) t.
struct CftParams {
  double c = 0.5;
  double epsilon = 0.185;
  double eta_rot = 0.0;
  double l = 10.0;
  int n = 2;

  void validate() const;
};

/// Regime bounds of the asymptotic formula.
struct CftValidity {
  double max_t_over_l_eta = 0.5;    // t <= 0.5 l / eta_rot
  double max_tau_over_scale = 0.2;  // tau0 <= 0.2 min(t, l)
};

/// d_n = (c/12)(n - 1/n).
double scaling_dimension(double c, double n);

/// G(t) = 2 ln(pi / 2 tau0) + ln[(cosh(pi l / 2 tau0) + cosh(pi t / tau0)) /
///        (8 sinh^2(pi l / 4 tau0) cosh^2(pi t / 2 tau0))], with tau0 = epsilon + eta_rot t.
/// Evaluated in log-space.
double log_twist_correlator(const CftParams& p, double t);

/// ln tr rho_A^n = d_n G(t) for real n (c_n = 1, F_n = 1).
double log_tr_rho_n(const CftParams& p, double t, double n);
/// tr rho_A^n at the integer n of `p`. Throws ValidationError when it leaves the double range.
double tr_rho_n(const CftParams& p, double t);

/// S_A(t) = -d/dn tr rho_A^n at n = 1 = -(c/6) G(t), not normalized.
double cft_entropy(const CftParams& p, double t);

/// (c/3) ln(tau0 / epsilon) + pi c t / 6 tau0 for t < l/2, pi c l / 12 tau0 beyond.
double entropy_asymptote(const CftParams& p, double t);

struct CftCurve {
  std::vector<double> t_grid;
  std::vector<double> S_A;  // S_A(t) - S_A(0)
  std::vector<bool> validity_mask;
  std::vector<double> asymptote;
};

CftCurve entropy_curve(const CftParams& p, const std::vector<double>& t_grid, const CftValidity& v = {});

struct ComparisonReport {
  double peak_time_cft = 0.0;
  double peak_time_numeric = 0.0;
  double peak_time_ratio = 1.0;    // numeric / cft
  double peak_height_ratio = 1.0;  // numeric / cft
  double post_peak_slope_cft = 0.0;
  double post_peak_slope_numeric = 0.0;
  bool trend_agreement = true;     // same sign of dS/dt after the peak
  double rms = 0.0;                // over the validity mask
};

/// numeric: samples (t, S_A). Interpolated linearly onto the curve grid.
/// Throws ValidationError when the time ranges do not overlap.
ComparisonReport compare_to_numerics(const CftCurve& curve,
                                     const std::vector<std::pair<double, double>>& numeric);

}  // namespace nhf
