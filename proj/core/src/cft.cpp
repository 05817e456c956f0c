#include "nhfloquet/cft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nhfloquet/errors.hpp"

namespace nhf {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kPi = std::numbers::pi;

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - kLn2;
}

double log_sinh(double x) {
  if (x <= 0.0) throw ValidationError("log_sinh needs a positive argument");
  return x + std::log1p(-std::exp(-2.0 * x)) - kLn2;
}

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double interpolate(const std::vector<std::pair<double, double>>& xy, double x) {
  auto it = std::lower_bound(xy.begin(), xy.end(), x,
                             [](const std::pair<double, double>& p, double v) { return p.first < v; });
  if (it == xy.begin()) return it->second;
  if (it == xy.end()) return xy.back().second;
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  return x1 == x0 ? y0 : y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

// Mean slope after the peak by least squares over [peak, end].
double post_peak_slope(const std::vector<double>& t, const std::vector<double>& s, std::size_t peak) {
  double st = 0, ss = 0, stt = 0, sts = 0;
  std::size_t n = 0;
  for (std::size_t i = peak; i < t.size(); ++i) {
    st += t[i];
    ss += s[i];
    stt += t[i] * t[i];
    sts += t[i] * s[i];
    ++n;
  }
  const double den = n * stt - st * st;
  return n >= 2 && den > 0.0 ? (n * sts - st * ss) / den : 0.0;
}

}  // namespace

void CftParams::validate() const {
  if (!(epsilon > 0.0)) throw ValidationError("CFT epsilon must be positive");
  if (!(eta_rot >= 0.0)) throw ValidationError("CFT eta_rot must be non-negative");
  if (!(l > 0.0)) throw ValidationError("CFT subsystem length must be positive");
  if (n < 1) throw ValidationError("Renyi index must be >= 1");
  if (!std::isfinite(c)) throw ValidationError("central charge must be finite");
}

double scaling_dimension(double c, double n) { return c / 12.0 * (n - 1.0 / n); }

double log_twist_correlator(const CftParams& p, double t) {
  p.validate();
  if (t < 0.0) throw ValidationError("CFT time must be non-negative");
  const double tau0 = p.epsilon + p.eta_rot * t;
  const double num = log_add_exp(log_cosh(kPi * p.l / (2.0 * tau0)), log_cosh(kPi * t / tau0));
  const double den = std::log(8.0) + 2.0 * log_sinh(kPi * p.l / (4.0 * tau0)) +
                     2.0 * log_cosh(kPi * t / (2.0 * tau0));
  const double g = 2.0 * std::log(kPi / (2.0 * tau0)) + num - den;
  if (!std::isfinite(g)) throw ValidationError("twist-field correlator overflowed in log-space");
  return g;
}

double log_tr_rho_n(const CftParams& p, double t, double n) {
  return scaling_dimension(p.c, n) * log_twist_correlator(p, t);
}

double tr_rho_n(const CftParams& p, double t) {
  const double lg = log_tr_rho_n(p, t, static_cast<double>(p.n));
  if (lg > 700.0 || lg < -745.0) {
    throw ValidationError("tr rho^n is outside the double range (ln value " + std::to_string(lg) + ")");
  }
  return std::exp(lg);
}

double cft_entropy(const CftParams& p, double t) {
  // d/dn d_n at n = 1 is c/6.
  return -p.c / 6.0 * log_twist_correlator(p, t);
}

double entropy_asymptote(const CftParams& p, double t) {
  p.validate();
  const double tau0 = p.epsilon + p.eta_rot * t;
  const double log_term = p.c / 3.0 * std::log(tau0 / p.epsilon);
  if (t < p.l / 2.0) return log_term + kPi * p.c * t / (6.0 * tau0);
  return log_term + kPi * p.c * p.l / (12.0 * tau0);
}

CftCurve entropy_curve(const CftParams& p, const std::vector<double>& t_grid, const CftValidity& v) {
  p.validate();
  CftCurve out;
  out.t_grid = t_grid;
  const double s0 = cft_entropy(p, 0.0);
  for (double t : t_grid) {
    out.S_A.push_back(cft_entropy(p, t) - s0);
    out.asymptote.push_back(entropy_asymptote(p, t));
    const double tau0 = p.epsilon + p.eta_rot * t;
    bool valid = tau0 <= v.max_tau_over_scale * std::min(t, p.l);
    if (p.eta_rot > 0.0 && t > v.max_t_over_l_eta * p.l / p.eta_rot) valid = false;
    out.validity_mask.push_back(valid);
  }
  return out;
}

ComparisonReport compare_to_numerics(const CftCurve& curve,
                                     const std::vector<std::pair<double, double>>& numeric) {
  if (curve.t_grid.empty() || numeric.size() < 2) throw ValidationError("comparison needs non-empty curves");
  auto num = numeric;
  std::sort(num.begin(), num.end());
  const double lo = std::max(curve.t_grid.front(), num.front().first);
  const double hi = std::min(curve.t_grid.back(), num.back().first);
  if (!(hi > lo)) throw ValidationError("CFT and numeric time grids do not overlap");

  std::vector<double> t, s_cft, s_num;
  std::vector<bool> mask;
  for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
    const double ti = curve.t_grid[i];
    if (ti < lo || ti > hi) continue;
    t.push_back(ti);
    s_cft.push_back(curve.S_A[i]);
    s_num.push_back(interpolate(num, ti));
    mask.push_back(curve.validity_mask[i]);
  }
  if (t.size() < 2) throw ValidationError("too few overlapping time points");

  ComparisonReport r;
  const auto pc = static_cast<std::size_t>(std::max_element(s_cft.begin(), s_cft.end()) - s_cft.begin());
  const auto pn = static_cast<std::size_t>(std::max_element(s_num.begin(), s_num.end()) - s_num.begin());
  r.peak_time_cft = t[pc];
  r.peak_time_numeric = t[pn];
  r.peak_time_ratio = t[pc] != 0.0 ? t[pn] / t[pc] : 1.0;
  r.peak_height_ratio = s_cft[pc] != 0.0 ? s_num[pn] / s_cft[pc] : 1.0;
  r.post_peak_slope_cft = post_peak_slope(t, s_cft, pc);
  r.post_peak_slope_numeric = post_peak_slope(t, s_num, pn);
  r.trend_agreement = (r.post_peak_slope_cft < 0.0) == (r.post_peak_slope_numeric < 0.0);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!mask[i]) continue;
    sum += (s_cft[i] - s_num[i]) * (s_cft[i] - s_num[i]);
    ++n;
  }
  r.rms = n > 0 ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
  return r;
}

}  // namespace nhf
