#include "nhfloquet/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <boost/numeric/odeint.hpp>
#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "nhfloquet/entanglement.hpp"
#include "nhfloquet/errors.hpp"

namespace nhf {

namespace {

constexpr double kRankCollapse = 1e-13;

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

double CorrelationMatrix::anticommutator_residual() const {
  return max_abs(C + C.transpose() - 2.0 * CMatrix::Identity(C.rows(), C.cols()));
}

double CorrelationMatrix::antisymmetry_residual() const {
  CMatrix p = prime();
  return max_abs(p + p.transpose());
}

double CorrelationMatrix::purity_residual() const {
  CMatrix p = prime();
  return max_abs(p * p - CMatrix::Identity(C.rows(), C.cols()));
}

double CorrelationMatrix::z(int site) const {
  const int a = 2 * (site - 1);
  return (kI * C(a, a + 1)).real();
}

double CorrelationMatrix::xx(int site) const {
  const int a = 2 * (site - 1) + 1;
  if (a + 1 >= C.rows()) throw ValidationError("<X_j X_j+1> needs j < L");
  return (kI * C(a, a + 1)).real();
}

double GaussianFrame::isotropy_residual() const { return max_abs(Phi.transpose() * Phi); }

double GaussianFrame::orthonormality_residual() const {
  return max_abs(Phi.adjoint() * Phi - CMatrix::Identity(Phi.cols(), Phi.cols()));
}

GaussianFrame product_frame(const std::vector<int>& z_polarizations) {
  const int L = static_cast<int>(z_polarizations.size());
  if (L < 1) throw ValidationError("product state needs at least one site");
  GaussianFrame f;
  f.Phi = CMatrix::Zero(2 * L, L);
  const double r = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < L; ++j) {
    const int s = z_polarizations[static_cast<std::size_t>(j)];
    if (s != 1 && s != -1) throw ValidationError("polarizations must be +1 or -1");
    // empty site: annihilated by c = (a1 - i a2)/2; occupied: by c^dagger = (a1 + i a2)/2
    f.Phi(2 * j, j) = r;
    f.Phi(2 * j + 1, j) = s == 1 ? cplx(0.0, -r) : cplx(0.0, r);
  }
  return f;
}

GaussianFrame initial_frame(const QuenchConfig& q, const LatticeSpec& lat) {
  lat.validate();
  q.validate(lat);
  if (q.polarization_basis() != Basis::Z) {
    throw UnsupportedError("X-basis product states are not fermionic Gaussian states");
  }
  return product_frame(q.polarizations(lat.L));
}

CorrelationMatrix correlation_from_frame(const GaussianFrame& frame) {
  return {2.0 * frame.Phi.conjugate() * frame.Phi.transpose()};
}

void orthonormalize(GaussianFrame& frame) {
  const Eigen::Index n = frame.Phi.rows();
  const Eigen::Index L = frame.Phi.cols();
  if (!frame.Phi.allFinite()) throw DegenerateEvolution("frame is not finite");
  Eigen::HouseholderQR<CMatrix> qr(frame.Phi);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  const double rmax = diag.maxCoeff();
  const double rmin = diag.minCoeff();
  if (!(rmax > 0.0) || rmin <= kRankCollapse * rmax) {
    throw DegenerateEvolution("frame lost rank during renormalization", rmax / std::max(rmin, 1e-300));
  }
  double log_sum = 0.0;
  for (Eigen::Index k = 0; k < L; ++k) log_sum += std::log(diag(k));
  frame.norm_log += log_sum;
  frame.Phi = qr.householderQ() * CMatrix::Identity(n, L);
  // Roundoff leaves a non-isotropic component along the partner of the weakest kept mode,
  // which grows like |mu|^2 per period and would flip the fermion parity. Project it out.
  const CMatrix S = frame.Phi.transpose() * frame.Phi;
  frame.Phi -= 0.5 * frame.Phi.conjugate() * S;
}

void restore_isotropy(GaussianFrame& frame) {
  const double saved = frame.norm_log;
  for (int pass = 0; pass < 3 && frame.isotropy_residual() > 1e-13; ++pass) orthonormalize(frame);
  frame.norm_log = saved;
}

void period_map(GaussianFrame& frame, const FloquetKicks& kicks, KickOrder order) {
  if (kicks.field.dim != frame.Phi.rows()) throw ValidationError("kick and frame sizes differ");
  if (order == KickOrder::FieldThenBond) {
    kicks.field.apply(frame.Phi);
    kicks.bond.apply(frame.Phi);
  } else {
    kicks.bond.apply(frame.Phi);
    kicks.field.apply(frame.Phi);
  }
  orthonormalize(frame);
  ++frame.period_count;
}

void period_map(GaussianFrame& frame, const TransferMatrix& tm) {
  if (tm.M.rows() != frame.Phi.rows()) throw ValidationError("transfer matrix and frame sizes differ");
  frame.Phi = tm.M * frame.Phi;
  orthonormalize(frame);
  ++frame.period_count;
}

namespace {

// Frame spanned by the L modes with the largest growth, one per reciprocal pair.
GaussianFrame frame_from_modes(const RVector& log_growth, const CMatrix& vectors, double gap_tol) {
  const Eigen::Index n = log_growth.size();
  const Eigen::Index L = n / 2;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return log_growth(a) > log_growth(b); });
  const double lo = log_growth(order[static_cast<std::size_t>(L - 1)]);
  const double hi = log_growth(order[static_cast<std::size_t>(L)]);
  if (lo - hi < gap_tol) {
    throw NumericalBreakdown("no gap between the L dominant modes", lo - hi);
  }
  GaussianFrame f;
  f.Phi.resize(n, L);
  for (Eigen::Index k = 0; k < L; ++k) f.Phi.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  orthonormalize(f);
  f.norm_log = 0.0;
  restore_isotropy(f);
  return f;
}

}  // namespace

GaussianFrame dominant_frame(const TransferMatrix& tm, double gap_tol) {
  return frame_from_modes(tm.eigenvalues.cwiseAbs().array().log().matrix(), tm.right_eigenvectors, gap_tol);
}

GaussianFrame continuous_steady_frame(const MajoranaForm& W, double gap_tol) {
  Eigen::ComplexEigenSolver<CMatrix> es(W.W, true);
  if (es.info() != Eigen::Success) throw NumericalBreakdown("eigensolver failed on the generator");
  return frame_from_modes(4.0 * es.eigenvalues().real(), es.eigenvectors(), gap_tol);
}

MajoranaForm continuous_form(const ModelParams& p, const LatticeSpec& lat) {
  auto forms = build_kick_forms(p, lat);
  return {forms.bond.W + forms.field.W};
}

std::vector<CorrelationMatrix> evolve_continuous(const CorrelationMatrix& C0, const MajoranaForm& W,
                                                 const std::vector<double>& t_grid,
                                                 const ContinuousOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const Eigen::Index n = C0.C.rows();
  if (W.W.rows() != n) throw ValidationError("generator and correlation sizes differ");
  if (t_grid.empty()) return {};
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw ValidationError("time grid must ascend");

  const CMatrix H = kI * W.W;
  const CMatrix Hbar = H.conjugate();
  auto rhs = [&](const State& x, State& dxdt, double) {
    Eigen::Map<const CMatrix> C(reinterpret_cast<const cplx*>(x.data()), n, n);
    Eigen::Map<CMatrix> D(reinterpret_cast<cplx*>(dxdt.data()), n, n);
    const CMatrix Ct = C.transpose();
    D = kI * (-Ct * Hbar.transpose() * C + Ct * Hbar * C + C * H * Ct - C * H.transpose() * Ct);
  };

  State x(static_cast<std::size_t>(2 * n * n));
  Eigen::Map<CMatrix>(reinterpret_cast<cplx*>(x.data()), n, n) = C0.C;

  std::vector<CorrelationMatrix> out;
  out.reserve(t_grid.size());
  double last_good = t_grid.front();
  auto observer = [&](const State& s, double t) {
    Eigen::Map<const CMatrix> C(reinterpret_cast<const cplx*>(s.data()), n, n);
    if (!C.allFinite()) throw IntegrationFailure("correlation matrix diverged", last_good);
    out.push_back({C});
    last_good = t;
  };

  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opt.atol, opt.rtol);
  try {
    odeint::integrate_times(stepper, rhs, x, t_grid.begin(), t_grid.end(), opt.first_step, observer);
  } catch (const IntegrationFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrationFailure(std::string("adaptive integration failed: ") + e.what(), last_good);
  }
  return out;
}

std::vector<GaussianFrame> evolve_continuous_frames(const GaussianFrame& frame0, const MajoranaForm& W,
                                                    const std::vector<double>& t_grid) {
  std::vector<GaussianFrame> out;
  if (t_grid.empty()) return out;
  GaussianFrame f = frame0;
  out.push_back(f);
  if (t_grid.size() == 1) return out;
  const double dt = t_grid[1] - t_grid[0];
  for (std::size_t i = 2; i < t_grid.size(); ++i) {
    if (std::abs((t_grid[i] - t_grid[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw ValidationError("exact propagation needs a uniform time grid");
    }
  }
  const CMatrix step = (4.0 * dt * W.W).exp();
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    f.Phi = step * f.Phi;
    orthonormalize(f);
    out.push_back(f);
  }
  return out;
}

EntropyTrace stroboscopic_run(const ModelParams& p, const LatticeSpec& lat, const QuenchConfig& q,
                              const StroboscopicOptions& opt, GaussianFrame* final_frame) {
  const auto sites = opt.subsystem.sites(lat);
  GaussianFrame f = initial_frame(q, lat);
  const auto kicks = FloquetKicks::from(p, lat);
  EntropyTrace tr;
  const int stride = std::max(opt.diagnostic_stride, 1);
  const auto record = [&](const GaussianFrame& g) {
    tr.period.push_back(g.period_count);
    tr.S_A.push_back(entropy_from_frame(g, sites));
    tr.norm_log.push_back(g.norm_log);
    const bool check = g.period_count % stride == 0 || g.period_count == q.n_periods;
    tr.purity_residual.push_back(check ? std::max(g.isotropy_residual(), g.orthonormality_residual())
                                       : tr.purity_residual.back());
    if (opt.on_period) opt.on_period(g);
  };
  record(f);
  for (int t = 1; t <= q.n_periods; ++t) {
    period_map(f, kicks);
    record(f);
  }
  if (final_frame) *final_frame = std::move(f);
  return tr;
}

std::string dump_correlations(const CorrelationMatrix& C, int period, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string stem = (fs::path(dir) / ("C_" + std::to_string(period))).string();
  const std::string bin = stem + ".bin";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + bin);
  // Eigen stores column-major; write row by row.
  for (Eigen::Index i = 0; i < C.C.rows(); ++i) {
    for (Eigen::Index j = 0; j < C.C.cols(); ++j) {
      const double re = C.C(i, j).real();
      const double im = C.C(i, j).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  }
  nlohmann::json meta = {{"rows", C.C.rows()},
                         {"cols", C.C.cols()},
                         {"dtype", "complex128"},
                         {"order", "row-major"},
                         {"endianness", "little"},
                         {"period", period},
                         {"file", fs::path(bin).filename().string()}};
  std::ofstream(stem + ".json") << meta.dump(2) << '\n';
  return bin;
}

}  // namespace nhf
