#include "nhfloquet/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Eigenvalues>

#include "nhfloquet/errors.hpp"

namespace nhf {

namespace {

std::vector<int> majorana_rows(const std::vector<int>& sites) {
  std::vector<int> rows;
  rows.reserve(2 * sites.size());
  for (int s : sites) {
    rows.push_back(2 * s);
    rows.push_back(2 * s + 1);
  }
  return rows;
}

RVector hermitian_spectrum(const CMatrix& A) {
  // C'_A is Hermitian up to roundoff; symmetrize before the solver.
  const CMatrix H = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalBreakdown("subsystem eigensolver failed");
  return es.eigenvalues();
}

RVector checked(const RVector& nu) {
  RVector out = nu;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double v = out(i);
    if (!std::isfinite(v) || std::abs(v) > 1.0 + kPurityTolerance) {
      throw PurityViolation("subsystem correlation eigenvalue outside [-1, 1]", v);
    }
    out(i) = std::clamp(v, -1.0 + kNuClamp, 1.0 - kNuClamp);
  }
  return out;
}

std::vector<int> block(int start0, int length, int L) {
  std::vector<int> s(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) s[static_cast<std::size_t>(i)] = (start0 + i) % L;
  return s;
}

std::vector<int> join(std::vector<int> x, const std::vector<int>& y) {
  x.insert(x.end(), y.begin(), y.end());
  return x;
}

// Chain order is A, B, D, C: A and C hold the two ends, so an end-to-end Majorana pair
// contributes ln 2 while short-range pairs cancel.
template <class Entropy>
TeeResult tee_impl(const TeePartition& partition, int L, Entropy&& entropy) {
  partition.validate(L);
  const auto& len = partition.lengths;
  const int a = len[0], b = len[1], c = len[2], d = len[3];
  TeeResult r;
  r.partition = partition;
  r.L = L;
  const auto seg_b = block(a, b, L);
  const auto seg_c = block(a + b + d, c, L);
  const double s_ab = entropy(block(0, a + b, L));
  const double s_bc = entropy(join(seg_b, seg_c));
  const double s_b = entropy(seg_b);
  const double s_abc = entropy(join(block(0, a + b, L), seg_c));
  r.S_top = s_ab + s_bc - s_b - s_abc;
  return r;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    A(static_cast<Eigen::Index>(i), 0) = x[i];
    A(static_cast<Eigen::Index>(i), 1) = 1.0;
    rhs(static_cast<Eigen::Index>(i)) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < 2) throw FitError("degenerate design matrix in scaling fit");
  Eigen::VectorXd coef = qr.solve(rhs);
  LineFit f{coef(0), coef(1), 0.0};
  f.rms = std::sqrt((A * coef - rhs).squaredNorm() / static_cast<double>(n));
  return f;
}

double interpolate(const std::vector<std::pair<double, double>>& xy, double x) {
  auto it = std::lower_bound(xy.begin(), xy.end(), x,
                             [](const std::pair<double, double>& p, double v) { return p.first < v; });
  if (it == xy.begin()) return it->second;
  if (it == xy.end()) return xy.back().second;
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  if (x1 == x0) return y0;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace

RVector subsystem_spectrum(const CorrelationMatrix& C, const std::vector<int>& sites) {
  const auto rows = majorana_rows(sites);
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  CMatrix A(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      A(i, j) = C.C(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
    A(i, i) -= 1.0;
  }
  return hermitian_spectrum(A);
}

RVector subsystem_spectrum(const GaussianFrame& frame, const std::vector<int>& sites) {
  const auto rows = majorana_rows(sites);
  CMatrix P(static_cast<Eigen::Index>(rows.size()), frame.Phi.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) P.row(static_cast<Eigen::Index>(i)) = frame.Phi.row(rows[i]);
  const CMatrix A = P.conjugate() * P.transpose() - P * P.adjoint();
  return hermitian_spectrum(A);
}

double entropy_from_spectrum(const RVector& nu) {
  const RVector v = checked(nu);
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double p = 0.5 * (1.0 + v(i));
    s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

double renyi_from_spectrum(const RVector& nu, int n) {
  if (n < 1) throw ValidationError("Renyi index must be >= 1");
  if (n == 1) return entropy_from_spectrum(nu);
  const RVector v = checked(nu);
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double p = 0.5 * (1.0 + v(i));
    s += std::log(std::pow(p, n) + std::pow(1.0 - p, n));
  }
  return std::max(0.5 * s / (1.0 - n), 0.0);
}

EntropyReport entropy_from_correlations(const CorrelationMatrix& C, const SubsystemSpec& sub,
                                        const LatticeSpec& lat, const std::vector<int>& renyi_orders) {
  if (C.L() != lat.L) throw ValidationError("correlation matrix does not match the lattice");
  const RVector nu = subsystem_spectrum(C, sub.sites(lat));
  EntropyReport r;
  r.subsystem = sub;
  r.S_A = entropy_from_spectrum(nu);
  r.nu.assign(nu.data(), nu.data() + nu.size());
  for (int n : renyi_orders) r.renyi[n] = renyi_from_spectrum(nu, n);
  return r;
}

double entropy_from_frame(const GaussianFrame& frame, const std::vector<int>& sites) {
  return entropy_from_spectrum(subsystem_spectrum(frame, sites));
}

double renyi_entropy(const CorrelationMatrix& C, const SubsystemSpec& sub, const LatticeSpec& lat, int n) {
  if (C.L() != lat.L) throw ValidationError("correlation matrix does not match the lattice");
  return renyi_from_spectrum(subsystem_spectrum(C, sub.sites(lat)), n);
}

double mutual_information(const CorrelationMatrix& C, const SubsystemSpec& a, const SubsystemSpec& b,
                          const LatticeSpec& lat) {
  const auto sa = a.sites(lat);
  const auto sb = b.sites(lat);
  std::set<int> seen(sa.begin(), sa.end());
  for (int s : sb) {
    if (seen.count(s)) throw ValidationError("mutual information needs disjoint subsystems");
  }
  std::vector<int> sab = sa;
  sab.insert(sab.end(), sb.begin(), sb.end());
  const double s_a = entropy_from_spectrum(subsystem_spectrum(C, sa));
  const double s_b = entropy_from_spectrum(subsystem_spectrum(C, sb));
  const double s_ab = entropy_from_spectrum(subsystem_spectrum(C, sab));
  return s_a + s_b - s_ab;
}

TeeResult tee(const CorrelationMatrix& C, const TeePartition& partition) {
  return tee_impl(partition, C.L(),
                  [&](const std::vector<int>& s) { return entropy_from_spectrum(subsystem_spectrum(C, s)); });
}

TeeResult tee(const GaussianFrame& frame, const TeePartition& partition) {
  return tee_impl(partition, frame.L(), [&](const std::vector<int>& s) { return entropy_from_frame(frame, s); });
}

std::string to_string(ScalingLaw law) {
  switch (law) {
    case ScalingLaw::Area: return "area";
    case ScalingLaw::Log: return "log";
    case ScalingLaw::Volume: return "volume";
  }
  return "area";
}

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points, const ScalingThresholds& th) {
  if (points.size() < 6) throw FitError("scaling fit needs at least 6 points");
  std::vector<double> chord, la, s;
  for (const auto& p : points) {
    if (p.L < 2 || p.L_A < 1 || p.L_A >= p.L) throw ValidationError("scaling point needs 1 <= L_A < L");
    chord.push_back(std::log(p.L / kPi * std::sin(kPi * p.L_A / p.L)));
    la.push_back(p.L_A);
    s.push_back(p.S_A);
  }
  const LineFit log_fit = least_squares(chord, s);
  const LineFit lin_fit = least_squares(la, s);
  ScalingFit f;
  f.a = log_fit.slope;
  f.b = log_fit.intercept;
  f.residual = log_fit.rms;
  f.slope = lin_fit.slope;
  f.intercept = lin_fit.intercept;
  f.linear_residual = lin_fit.rms;
  if (f.slope > th.volume_slope && f.linear_residual < f.residual) {
    f.law = ScalingLaw::Volume;
  } else if (f.a > th.log_coefficient && f.residual <= f.linear_residual) {
    f.law = ScalingLaw::Log;
  } else {
    f.law = ScalingLaw::Area;
  }
  return f;
}

double collapse_cost(const CollapseCurves& curves, double beta_J0, double nu, int min_overlap) {
  std::vector<std::vector<std::pair<double, double>>> scaled;
  for (const auto& [L, pts] : curves) {
    const double scale = std::pow(static_cast<double>(L), nu);
    std::vector<std::pair<double, double>> c;
    for (const auto& [b, y] : pts) c.emplace_back((b - beta_J0) * scale, y);
    std::sort(c.begin(), c.end());
    scaled.push_back(std::move(c));
  }
  double sum = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    for (std::size_t j = 0; j < scaled.size(); ++j) {
      if (i == j) continue;
      const auto& ci = scaled[i];
      const auto& cj = scaled[j];
      const double lo = cj.front().first;
      const double hi = cj.back().first;
      int overlap = 0;
      for (const auto& [x, y] : ci) {
        if (x < lo || x > hi) continue;
        const double d = y - interpolate(cj, x);
        sum += d * d;
        ++overlap;
      }
      if (overlap < min_overlap) return std::numeric_limits<double>::infinity();
      count += overlap;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::infinity();
}

CollapseResult tee_collapse(const CollapseCurves& curves, const CollapseOptions& opt) {
  if (curves.size() < 3) throw FitError("collapse needs at least 3 system sizes");
  double bmin = std::numeric_limits<double>::infinity();
  double bmax = -bmin;
  for (const auto& [L, pts] : curves) {
    if (pts.size() < 2) throw FitError("collapse needs at least 2 samples per size");
    for (const auto& [b, y] : pts) {
      bmin = std::min(bmin, b);
      bmax = std::max(bmax, b);
    }
  }

  CollapseResult best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  const auto consider = [&](double b0, double nu) {
    const double c = collapse_cost(curves, b0, nu, opt.min_overlap);
    // Strict improvement, with nu scanned upward, keeps the smaller nu on ties.
    if (c < best.collapse_residual) best = {b0, nu, c};
  };
  for (int in = 0; in < opt.grid_nu; ++in) {
    const double nu = opt.nu_min + (opt.nu_max - opt.nu_min) * in / std::max(1, opt.grid_nu - 1);
    for (int ib = 0; ib < opt.grid_beta; ++ib) {
      consider(bmin + (bmax - bmin) * ib / std::max(1, opt.grid_beta - 1), nu);
    }
  }
  if (!std::isfinite(best.collapse_residual)) {
    throw FitError("rescaled curves do not overlap for any (beta_J0, nu)");
  }

  double db = (bmax - bmin) / std::max(1, opt.grid_beta - 1);
  double dn = (opt.nu_max - opt.nu_min) / std::max(1, opt.grid_nu - 1);
  while (db > opt.refine_tol || dn > opt.refine_tol) {
    const CollapseResult start = best;
    for (int sn : {-1, 0, 1}) {
      for (int sb : {-1, 0, 1}) {
        const double nu = start.nu + sn * dn;
        if (nu < opt.nu_min || nu > opt.nu_max) continue;
        consider(start.beta_J0 + sb * db, nu);
      }
    }
    if (best.beta_J0 == start.beta_J0 && best.nu == start.nu) {
      db *= 0.5;
      dn *= 0.5;
    }
  }
  return best;
}

}  // namespace nhf
