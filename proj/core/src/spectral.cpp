#include "nhfloquet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "nhfloquet/errors.hpp"

namespace nhf {

namespace {

// Majorana index of a_{2j-1} (odd = true) or a_{2j} for 1-based site j, 0-based storage.
int majorana(int site1, bool odd) { return 2 * (site1 - 1) + (odd ? 0 : 1); }

void add_bond(CMatrix& W, int p, int q, cplx w) {
  W(p, q) += w;
  W(q, p) -= w;
}

cplx fold_quasienergy(cplx eps) {
  double re = std::remainder(eps.real(), 2.0 * kPi);
  if (re <= -kPi) re += 2.0 * kPi;
  return {re, eps.imag()};
}

const CMatrix& sigma_x() {
  static const CMatrix m = (CMatrix(2, 2) << 0, 1, 1, 0).finished();
  return m;
}
const CMatrix& sigma_y() {
  static const CMatrix m = (CMatrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished();
  return m;
}
const CMatrix& sigma_z() {
  static const CMatrix m = (CMatrix(2, 2) << 1, 0, 0, -1).finished();
  return m;
}

double default_tol_real(const std::vector<cplx>& eps) {
  double radius = 0.0;
  for (auto e : eps) radius = std::max(radius, std::abs(e));
  // An all-zero spectrum (identity drive) still needs a usable tolerance.
  return 1e-8 * std::max(radius, 1.0);
}

}  // namespace

double MajoranaForm::antisymmetry_residual() const {
  return (W + W.transpose()).cwiseAbs().maxCoeff();
}

CMatrix KickExponential::dense() const {
  CMatrix out = CMatrix::Identity(dim, dim);
  apply(out);
  return out;
}

void KickExponential::apply(CMatrix& rows) const {
  for (const auto& r : rotations) {
    Eigen::RowVectorXcd rp = rows.row(r.p);
    Eigen::RowVectorXcd rq = rows.row(r.q);
    rows.row(r.p) = r.c * rp + r.s * rq;
    rows.row(r.q) = -r.s * rp + r.c * rq;
  }
}

KickExponential kick_exponential(const MajoranaForm& form) {
  const int n = form.dim();
  KickExponential out;
  out.dim = n;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const cplx w = form.W(p, q);
      if (w == cplx(0.0)) continue;
      if (used[static_cast<std::size_t>(p)] || used[static_cast<std::size_t>(q)]) {
        throw ValidationError("kick bonds overlap; bond-wise exponential is not exact");
      }
      used[static_cast<std::size_t>(p)] = used[static_cast<std::size_t>(q)] = true;
      // exp(4 [[0, w], [-w, 0]]) = [[cos 4w, sin 4w], [-sin 4w, cos 4w]]
      out.rotations.push_back({p, q, std::cos(4.0 * w), std::sin(4.0 * w)});
    }
  }
  return out;
}

KickForms build_kick_forms(const ModelParams& p, const LatticeSpec& lat) {
  lat.validate();
  const int L = lat.L;
  const int n = 2 * L;
  KickForms forms{{CMatrix::Zero(n, n)}, {CMatrix::Zero(n, n)}};
  const cplx J = p.J();
  const cplx h = p.h();

  // exp(i h Z_j) = exp(-h a_{2j-1} a_{2j})
  if (h != cplx(0.0)) {
    for (int j = 1; j <= L; ++j) add_bond(forms.field.W, majorana(j, true), majorana(j, false), -h / 2.0);
  }
  // exp(i J X_j X_{j+1}) = exp(-J a_{2j} a_{2j+1})
  if (J != cplx(0.0)) {
    for (int j = 1; j < L; ++j) add_bond(forms.bond.W, majorana(j, false), majorana(j + 1, true), -J / 2.0);
    if (lat.periodic()) {
      // X_L X_1 = -i P a_{2L} a_1 with P the fermion parity.
      const double parity = lat.bc == Boundary::PeriodicEvenParity ? 1.0 : -1.0;
      add_bond(forms.bond.W, majorana(L, false), majorana(1, true), parity * J / 2.0);
    }
  }
  return forms;
}

FloquetKicks FloquetKicks::from(const KickForms& forms) {
  return {kick_exponential(forms.bond), kick_exponential(forms.field)};
}

FloquetKicks FloquetKicks::from(const ModelParams& p, const LatticeSpec& lat) {
  return from(build_kick_forms(p, lat));
}

CMatrix FloquetKicks::dense() const {
  CMatrix out = CMatrix::Identity(field.dim, field.dim);
  apply(out);
  return out;
}

void FloquetKicks::apply(CMatrix& rows) const {
  field.apply(rows);
  bond.apply(rows);
}

TransferMatrix build_transfer_matrix(const MajoranaForm& bond, const MajoranaForm& field) {
  if (bond.dim() != field.dim()) throw ValidationError("kick forms have different dimensions");
  TransferMatrix tm;
  FloquetKicks kicks{kick_exponential(bond), kick_exponential(field)};
  tm.M = kicks.dense();

  Eigen::ComplexEigenSolver<CMatrix> es(tm.M, true);
  if (es.info() != Eigen::Success) {
    throw NumericalBreakdown("eigensolver failed on the transfer matrix");
  }
  tm.eigenvalues = es.eigenvalues();
  tm.right_eigenvectors = es.eigenvectors();

  Eigen::BDCSVD<CMatrix> svd(tm.right_eigenvectors);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  tm.condition_estimate = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  tm.diagonalizable = tm.condition_estimate <= kDefectiveCondition;
  return tm;
}

TransferMatrix build_transfer_matrix(const ModelParams& p, const LatticeSpec& lat) {
  auto forms = build_kick_forms(p, lat);
  return build_transfer_matrix(forms.bond, forms.field);
}

cplx quasienergy_from_eigenvalue(cplx mu) {
  return fold_quasienergy(kQuasienergyScale * kI * std::log(mu));
}

std::string to_string(ModeClass c) {
  switch (c) {
    case ModeClass::Real: return "real";
    case ModeClass::ComplexConjugatePair: return "conjugate-pair";
    case ModeClass::GrowDecayPair: return "grow-decay";
    case ModeClass::Exceptional: return "exceptional";
  }
  return "real";
}

CMatrix continuous_block(cplx J, cplx h, double k) {
  return 2.0 * ((h - J * std::cos(k)) * sigma_z() + J * std::sin(k) * sigma_y());
}

CMatrix floquet_block(cplx J, cplx h, double k) {
  const CMatrix id = CMatrix::Identity(2, 2);
  // h_Z = 2h sigma_z, h_XX = -2J (cos k sigma_z - sin k sigma_y), unit axes.
  CMatrix field = std::cos(2.0 * h) * id + kI * std::sin(2.0 * h) * sigma_z();
  CMatrix axis = std::cos(k) * sigma_z() - std::sin(k) * sigma_y();
  CMatrix bond = std::cos(2.0 * J) * id - kI * std::sin(2.0 * J) * axis;
  return bond * field;
}

CMatrix floquet_block_hamiltonian(cplx J, cplx h, double k) {
  const CMatrix U = floquet_block(J, h, k);
  // Eigenvalues on the negative real axis come in reciprocal pairs whose roundoff imaginary
  // parts may have opposite signs; both logs must take arg = +pi or the pair stops being
  // conjugate and the sigma_x metric fails.
  Eigen::ComplexEigenSolver<CMatrix> es(U);
  if (es.info() == Eigen::Success) {
    const CMatrix& V = es.eigenvectors();
    Eigen::PartialPivLU<CMatrix> lu(V);
    CVector logs(U.rows());
    for (Eigen::Index i = 0; i < logs.size(); ++i) {
      const cplx mu = es.eigenvalues()(i);
      double arg = std::arg(mu);
      if (arg < -kPi + 1e-9) arg += 2.0 * kPi;
      logs(i) = cplx(std::log(std::abs(mu)), arg);
    }
    const CMatrix logU = V * logs.asDiagonal() * lu.inverse();
    const CMatrix back = V * es.eigenvalues().asDiagonal() * lu.inverse();
    if ((back - U).norm() <= 1e-10 * U.norm()) return kI * logU;
  }
  // Defective block: fall back to the Schur-based principal logarithm.
  const CMatrix logU = U.log();
  return kI * logU;
}

namespace {

ModeClass classify_pair(cplx eps, double tol) {
  if (std::abs(eps.imag()) < tol) return ModeClass::Real;
  // eps and -eps are complex conjugates (mod 2 pi) when Re eps is 0 or pi.
  const double re = std::abs(eps.real());
  if (re < tol || std::abs(re - kPi) < tol) return ModeClass::ComplexConjugatePair;
  return ModeClass::GrowDecayPair;
}

}  // namespace

DispersionPoint dispersion_continuous(cplx J, cplx h, double k, double tol) {
  DispersionPoint pt;
  pt.k = k;
  pt.x = h * h - 2.0 * h * J * std::cos(k) + J * J;
  pt.w_k = 2.0 * std::sqrt(pt.x);
  pt.epsilon = {pt.w_k, -pt.w_k};
  const CMatrix block = continuous_block(J, h, k);
  if (std::abs(pt.x) < tol && block.cwiseAbs().maxCoeff() > tol) {
    pt.classification = ModeClass::Exceptional;
  } else {
    pt.classification = classify_pair(pt.w_k, tol);
  }
  return pt;
}

DispersionPoint floquet_dispersion(cplx J, cplx h, double k, double tol) {
  DispersionPoint pt;
  pt.k = k;
  const double c = std::cos(k);
  pt.x = 2.0 * (1.0 + c) * std::cos(2.0 * h - 2.0 * J) + 2.0 * (1.0 - c) * std::cos(2.0 * h + 2.0 * J);
  const cplx q = pt.x / 4.0;
  const cplx root = std::sqrt(q * q - 1.0);
  pt.w_k = std::log(q + root);
  const cplx eps = fold_quasienergy(kQuasienergyScale * kI * pt.w_k);
  pt.epsilon = {eps, fold_quasienergy(-eps)};

  const double disc = std::abs(q * q - 1.0);
  bool exceptional = false;
  if (disc < tol) {
    // U_k = +-1 is diagonalizable; only a nontrivial Jordan block is exceptional.
    const CMatrix U = floquet_block(J, h, k);
    const cplx lam = q;  // the double eigenvalue of U_k
    exceptional = (U - lam * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() > std::sqrt(tol);
  }
  pt.classification = exceptional ? ModeClass::Exceptional : classify_pair(eps, tol);
  return pt;
}

std::vector<double> allowed_momenta(const LatticeSpec& lat) {
  if (!lat.periodic()) throw ValidationError("momenta are only defined for periodic chains");
  std::vector<double> ks;
  ks.reserve(static_cast<std::size_t>(lat.L));
  const double offset = lat.bc == Boundary::PeriodicEvenParity ? 1.0 : 0.0;
  for (int m = 0; m < lat.L; ++m) {
    double k = kPi * (2.0 * m + offset) / lat.L;
    if (k > kPi) k -= 2.0 * kPi;
    ks.push_back(k);
  }
  return ks;
}

RealModeCensus count_real_modes(const ModelParams& p, const LatticeSpec& lat, double tol_real) {
  const auto ks = allowed_momenta(lat);
  std::vector<DispersionPoint> pts;
  std::vector<cplx> all;
  for (double k : ks) {
    pts.push_back(floquet_dispersion(p.J(), p.h(), k));
    all.push_back(pts.back().epsilon[0]);
    all.push_back(pts.back().epsilon[1]);
  }
  const double tol = tol_real < 0.0 ? default_tol_real(all) : tol_real;
  RealModeCensus census;
  for (const auto& pt : pts) {
    int real_here = 0;
    for (auto e : pt.epsilon) real_here += std::abs(e.imag()) < tol ? 1 : 0;
    census.count += real_here;
    if (real_here > 0) census.real_momenta.push_back(pt.k);
  }
  census.density = static_cast<double>(census.count) / (2.0 * lat.L);
  return census;
}

std::string to_string(EdgeKind k) { return k == EdgeKind::Zero ? "zero" : "pi"; }

int SpectrumReport::count_edges(EdgeKind kind) const {
  return static_cast<int>(std::count_if(edge_modes.begin(), edge_modes.end(),
                                        [kind](const EdgeModeRecord& r) { return r.kind == kind; }));
}

SpectrumReport quasienergies_from_transfer(const TransferMatrix& tm, Boundary bc, double tol_real) {
  SpectrumReport rep;
  rep.boundary_condition = bc;
  rep.diagonalizable = tm.diagonalizable;
  rep.quasienergies.reserve(static_cast<std::size_t>(tm.eigenvalues.size()));
  for (Eigen::Index i = 0; i < tm.eigenvalues.size(); ++i) {
    rep.quasienergies.push_back(quasienergy_from_eigenvalue(tm.eigenvalues(i)));
  }
  rep.tol_real = tol_real < 0.0 ? default_tol_real(rep.quasienergies) : tol_real;
  rep.n_real_modes = static_cast<int>(
      std::count_if(rep.quasienergies.begin(), rep.quasienergies.end(),
                    [&](cplx e) { return std::abs(e.imag()) < rep.tol_real; }));
  return rep;
}

namespace {

EdgeModeRecord edge_record(EdgeKind kind, cplx energy, const CVector& v, int L) {
  EdgeModeRecord rec;
  rec.kind = kind;
  rec.energy = energy;
  RVector site(L);
  for (int j = 0; j < L; ++j) site(j) = std::norm(v(2 * j)) + std::norm(v(2 * j + 1));
  const double total = site.sum();
  if (total > 0.0) site /= total;

  const int outer = std::max(1, static_cast<int>(std::ceil(0.1 * L)));
  rec.left_weight = site.head(outer).sum();
  rec.right_weight = site.tail(outer).sum();

  // log-linear fit of |psi_j| over the outer quarter on the heavier side
  const int span = std::max(2, L / 4);
  const bool left = rec.left_weight >= rec.right_weight;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int d = 0; d < span; ++d) {
    const double w = site(left ? d : L - 1 - d);
    if (w <= 0.0) continue;
    const double y = 0.5 * std::log(w);
    sx += d;
    sy += y;
    sxx += static_cast<double>(d) * d;
    sxy += d * y;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n >= 2 && denom > 0.0) ? (n * sxy - sx * sy) / denom : 0.0;
  rec.localization_length = slope < 0.0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
  return rec;
}

}  // namespace

EdgeScan detect_edge_modes(const TransferMatrix& tm, const LatticeSpec& lat, double tol_edge) {
  if (lat.bc != Boundary::Open) throw ValidationError("edge modes need an open chain");
  if (lat.L < 8) throw ValidationError("edge-mode detection needs L >= 8");
  EdgeScan scan;
  for (Eigen::Index i = 0; i < tm.eigenvalues.size(); ++i) {
    const cplx eps = quasienergy_from_eigenvalue(tm.eigenvalues(i));
    const bool zero = std::abs(eps) < tol_edge;
    const bool pi = std::abs(cplx(kPi - std::abs(eps.real()), eps.imag())) < tol_edge;
    if (!zero && !pi) continue;
    auto rec = edge_record(zero ? EdgeKind::Zero : EdgeKind::Pi, eps, tm.right_eigenvectors.col(i), lat.L);
    if (rec.left_weight + rec.right_weight > 0.5) {
      scan.records.push_back(rec);
    } else {
      scan.warning = true;
    }
  }
  return scan;
}

EdgeScan detect_edge_modes(const ModelParams& p, const LatticeSpec& lat, double tol_edge) {
  return detect_edge_modes(build_transfer_matrix(p, lat), lat, tol_edge);
}

SpectrumReport spectrum_report(const ModelParams& p, const LatticeSpec& lat, double tol_real,
                               double tol_edge) {
  const auto tm = build_transfer_matrix(p, lat);
  auto rep = quasienergies_from_transfer(tm, lat.bc, tol_real);
  if (lat.bc == Boundary::Open && lat.L >= 8) {
    auto scan = detect_edge_modes(tm, lat, tol_edge);
    rep.edge_modes = std::move(scan.records);
    rep.edge_warning = scan.warning;
  }
  return rep;
}

PhaseLabel classify_phase_from_spectrum(const SpectrumReport& open, const SpectrumReport& periodic) {
  if (open.boundary_condition != Boundary::Open || periodic.boundary_condition == Boundary::Open) {
    throw ValidationError("classification needs one open and one periodic report");
  }
  const double n_periodic = static_cast<double>(periodic.quasienergies.size());
  const double density = n_periodic > 0 ? periodic.n_real_modes / n_periodic : 0.0;
  if (density >= kVolumeDensityThreshold) return PhaseLabel::CriticalVolume;
  if (periodic.n_real_modes > 0) return PhaseLabel::CriticalLog;
  if (open.edge_warning) return PhaseLabel::Ambiguous;

  const int zeros = open.count_edges(EdgeKind::Zero);
  const int pis = open.count_edges(EdgeKind::Pi);
  // Majorana edge modes come in pairs; an odd count means the census is unreliable.
  if (zeros % 2 != 0 || pis % 2 != 0) return PhaseLabel::Ambiguous;
  if (zeros > 0 && pis > 0) return PhaseLabel::ZeroPi;
  if (zeros > 0) return PhaseLabel::ZeroMode;
  if (pis > 0) return PhaseLabel::PiMode;
  return PhaseLabel::Trivial;
}

PhaseLabel spectral_phase(const ModelParams& p, int L, double tol_real, double tol_edge) {
  const auto open = spectrum_report(p, {L, Boundary::Open}, tol_real, tol_edge);
  const auto periodic = spectrum_report(p, {L, Boundary::PeriodicOddParity}, tol_real, tol_edge);
  return classify_phase_from_spectrum(open, periodic);
}

double metric_residual(const CMatrix& eta, const CMatrix& H) {
  const double hn = H.norm();
  if (hn == 0.0) return 0.0;
  Eigen::FullPivLU<CMatrix> lu(eta);
  if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
  return (eta * H * lu.inverse() - H.adjoint()).norm() / hn;
}

MetricOperator numerical_metric(const CMatrix& H) {
  const int n = static_cast<int>(H.rows());
  // Real basis of Hermitian matrices: diagonal units, symmetric and antisymmetric-imaginary pairs.
  std::vector<CMatrix> basis;
  for (int i = 0; i < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(e);
    for (int j = i + 1; j < n; ++j) {
      CMatrix s = CMatrix::Zero(n, n);
      s(i, j) = s(j, i) = 1.0;
      basis.push_back(s);
      CMatrix a = CMatrix::Zero(n, n);
      a(i, j) = kI;
      a(j, i) = -kI;
      basis.push_back(a);
    }
  }
  const int m = static_cast<int>(basis.size());
  RMatrix A(2 * n * n, m);
  for (int c = 0; c < m; ++c) {
    CMatrix img = basis[static_cast<std::size_t>(c)] * H - H.adjoint() * basis[static_cast<std::size_t>(c)];
    Eigen::Map<const CVector> flat(img.data(), n * n);
    A.col(c).head(n * n) = flat.real();
    A.col(c).tail(n * n) = flat.imag();
  }
  Eigen::JacobiSVD<RMatrix> svd(A, Eigen::ComputeFullV);
  RVector coeff = svd.matrixV().col(m - 1);
  CMatrix eta = CMatrix::Zero(n, n);
  for (int c = 0; c < m; ++c) eta += coeff(c) * basis[static_cast<std::size_t>(c)];
  if (eta.trace().real() < 0.0) eta = -eta;
  eta /= eta.norm();

  MetricOperator out;
  out.eta = eta;
  out.residual = metric_residual(eta, H);
  out.certified = false;
  out.family = "numerical";
  return out;
}

MetricOperator pseudo_hermiticity_certificate(const ModelParams& p, double k, bool continuous_limit) {
  const cplx J = p.J();
  const cplx h = p.h();
  const CMatrix H = continuous_limit ? continuous_block(J, h, k) : floquet_block_hamiltonian(J, h, k);

  MetricOperator out;
  if (p.hermitian()) {
    out.eta = CMatrix::Identity(2, 2);
    out.family = "hermitian";
  } else if (continuous_limit && p.equal_alpha && p.beta_J == -p.beta_h) {
    if (std::abs(std::sin(k / 2.0)) < 1e-14) {
      throw ValidationError("metric has a pole at k = 0 (cot(k/2) diverges)");
    }
    if (p.alpha_J == 0.0) throw ValidationError("metric needs a nonzero real part of J");
    const double g = (p.beta_J / p.alpha_J) / std::tan(k / 2.0);
    out.eta = CMatrix::Identity(2, 2) + g * sigma_x();
    out.family = "continuous";
  } else if (!continuous_limit && p.dual_line) {
    out.eta = sigma_x();
    out.family = "dual-line";
  } else {
    return numerical_metric(H);
  }
  out.residual = metric_residual(out.eta, H);
  out.certified = out.residual < kMetricCertification;
  return out;
}

}  // namespace nhf
