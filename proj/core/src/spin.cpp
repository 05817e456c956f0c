#include "nhfloquet/spin.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "nhfloquet/errors.hpp"

namespace nhf {

namespace {

void check_capacity(int L) {
  if (L < 1) throw ValidationError("spin chain needs L >= 1");
  if (L > kMaxSpinSites) {
    throw CapacityError("state-vector simulation is limited to L <= " + std::to_string(kMaxSpinSites));
  }
}

std::size_t dim_of(int L) { return std::size_t{1} << L; }

// In-place exp-type gate a + b X_mask, where X_mask flips the bits in mask.
void apply_flip_gate(CVector& v, std::size_t mask, cplx a, cplx b) {
  const std::size_t n = static_cast<std::size_t>(v.size());
  const std::size_t low = mask & (~mask + 1);  // pairs visited once: lowest bit clear
  for (std::size_t s = 0; s < n; ++s) {
    if (s & low) continue;
    const std::size_t t = s ^ mask;
    const cplx x = v(static_cast<Eigen::Index>(s));
    const cplx y = v(static_cast<Eigen::Index>(t));
    v(static_cast<Eigen::Index>(s)) = a * x + b * y;
    v(static_cast<Eigen::Index>(t)) = a * y + b * x;
  }
}

double x_correlator(const CVector& v, std::size_t mask) {
  cplx acc = 0.0;
  for (Eigen::Index s = 0; s < v.size(); ++s) {
    acc += std::conj(v(s)) * v(static_cast<Eigen::Index>(static_cast<std::size_t>(s) ^ mask));
  }
  return acc.real();
}

RVector schmidt_probabilities(const SpinState& psi, const std::vector<int>& sites) {
  const int L = psi.L;
  std::vector<bool> in_a(static_cast<std::size_t>(L), false);
  for (int s : sites) {
    if (s < 0 || s >= L) throw ValidationError("subsystem site outside the chain");
    if (in_a[static_cast<std::size_t>(s)]) throw ValidationError("subsystem sites repeat");
    in_a[static_cast<std::size_t>(s)] = true;
  }
  std::vector<int> a_sites, b_sites;
  for (int j = 0; j < L; ++j) (in_a[static_cast<std::size_t>(j)] ? a_sites : b_sites).push_back(j);
  const Eigen::Index da = Eigen::Index{1} << a_sites.size();
  const Eigen::Index db = Eigen::Index{1} << b_sites.size();
  CMatrix m = CMatrix::Zero(da, db);
  for (Eigen::Index s = 0; s < psi.amplitudes.size(); ++s) {
    Eigen::Index ia = 0, ib = 0;
    for (std::size_t k = 0; k < a_sites.size(); ++k) ia |= ((s >> a_sites[k]) & 1) << k;
    for (std::size_t k = 0; k < b_sites.size(); ++k) ib |= ((s >> b_sites[k]) & 1) << k;
    m(ia, ib) = psi.amplitudes(s);
  }
  // Eigenvalues of the smaller reduced density matrix; BDCSVD misresolves clustered zeros.
  const CMatrix rho = da <= db ? CMatrix(m * m.adjoint()) : CMatrix(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  RVector p = es.eigenvalues().cwiseMax(0.0);
  const double total = p.sum();
  if (total > 0.0) p /= total;
  return p;
}

}  // namespace

SpinState spin_product_state(const std::vector<int>& polarizations, Basis basis) {
  const int L = static_cast<int>(polarizations.size());
  check_capacity(L);
  SpinState psi;
  psi.L = L;
  psi.amplitudes = CVector::Zero(static_cast<Eigen::Index>(dim_of(L)));
  if (basis == Basis::Z) {
    std::size_t idx = 0;
    for (int j = 0; j < L; ++j) {
      if (polarizations[static_cast<std::size_t>(j)] == -1) idx |= std::size_t{1} << j;
    }
    psi.amplitudes(static_cast<Eigen::Index>(idx)) = 1.0;
  } else {
    // |+x> = (|up> + |down>)/sqrt2, |-x> = (|up> - |down>)/sqrt2
    const double norm = std::pow(2.0, -0.5 * L);
    for (std::size_t s = 0; s < dim_of(L); ++s) {
      double sign = 1.0;
      for (int j = 0; j < L; ++j) {
        if (((s >> j) & 1) && polarizations[static_cast<std::size_t>(j)] == -1) sign = -sign;
      }
      psi.amplitudes(static_cast<Eigen::Index>(s)) = sign * norm;
    }
  }
  return psi;
}

SpinState spin_initial_state(const QuenchConfig& q, const LatticeSpec& lat) {
  lat.validate();
  q.validate(lat);
  return spin_product_state(q.polarizations(lat.L), q.polarization_basis());
}

SpinState ghz_state(int L, Basis basis) {
  SpinState up = spin_product_state(std::vector<int>(static_cast<std::size_t>(L), 1), basis);
  SpinState down = spin_product_state(std::vector<int>(static_cast<std::size_t>(L), -1), basis);
  up.amplitudes = (up.amplitudes + down.amplitudes) / std::sqrt(2.0);
  return up;
}

double apply_floquet_period(SpinState& psi, const ModelParams& p, const LatticeSpec& lat, double K) {
  check_capacity(lat.L);
  if (psi.L != lat.L) throw ValidationError("state and lattice sizes differ");
  const int L = lat.L;
  const cplx h = p.h();
  const cplx J = p.J();
  CVector& v = psi.amplitudes;

  if (h != cplx(0.0)) {
    // exp(i h sum Z) with sum Z = L - 2 popcount
    std::vector<cplx> phase(static_cast<std::size_t>(L + 1));
    for (int d = 0; d <= L; ++d) phase[static_cast<std::size_t>(d)] = std::exp(kI * h * static_cast<double>(L - 2 * d));
    for (Eigen::Index s = 0; s < v.size(); ++s) {
      v(s) *= phase[static_cast<std::size_t>(std::popcount(static_cast<std::size_t>(s)))];
    }
  }
  if (J != cplx(0.0)) {
    const cplx a = std::cos(J);
    const cplx b = kI * std::sin(J);
    const int bonds = lat.periodic() && L > 2 ? L : L - 1;
    for (int j = 0; j < bonds; ++j) {
      const std::size_t mask = (std::size_t{1} << j) | (std::size_t{1} << ((j + 1) % L));
      apply_flip_gate(v, mask, a, b);
    }
  }
  if (K != 0.0) {
    const cplx a = std::cos(K);
    const cplx b = kI * std::sin(K);
    for (int j = 0; j < L; ++j) apply_flip_gate(v, std::size_t{1} << j, a, b);
  }
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalBreakdown("state vector norm collapsed");
  v /= norm;
  psi.normalized = true;
  return std::log(norm);
}

SpinState flip_all(const SpinState& psi) {
  SpinState out = psi;
  for (Eigen::Index s = 0; s < psi.amplitudes.size(); ++s) {
    if (std::popcount(static_cast<std::size_t>(s)) % 2 != 0) out.amplitudes(s) = -psi.amplitudes(s);
  }
  return out;
}

std::vector<double> z_expectations(const SpinState& psi) {
  std::vector<double> z(static_cast<std::size_t>(psi.L), 0.0);
  for (Eigen::Index s = 0; s < psi.amplitudes.size(); ++s) {
    const double w = std::norm(psi.amplitudes(s));
    for (int j = 0; j < psi.L; ++j) z[static_cast<std::size_t>(j)] += ((s >> j) & 1) ? -w : w;
  }
  return z;
}

std::vector<double> xx_expectations(const SpinState& psi) {
  std::vector<double> xx(static_cast<std::size_t>(psi.L), 0.0);
  for (int j = 0; j < psi.L; ++j) {
    const std::size_t mask = (std::size_t{1} << j) | (std::size_t{1} << ((j + 1) % psi.L));
    xx[static_cast<std::size_t>(j)] = x_correlator(psi.amplitudes, mask);
  }
  return xx;
}

ObservableEntry spin_observables(const SpinState& psi) {
  ObservableEntry e;
  e.Sx.resize(static_cast<std::size_t>(psi.L));
  for (int j = 0; j < psi.L; ++j) {
    e.Sx[static_cast<std::size_t>(j)] = 0.5 * x_correlator(psi.amplitudes, std::size_t{1} << j);
  }
  if (psi.L >= 2) {
    e.SxSx_edge = 0.25 * x_correlator(psi.amplitudes, (std::size_t{1} << 0) | (std::size_t{1} << (psi.L - 1)));
  } else {
    e.SxSx_edge = 0.25;
  }
  e.ghz_overlap = ghz_overlap(psi, Basis::X);
  return e;
}

double ghz_overlap(const SpinState& psi, Basis basis) {
  const SpinState g = ghz_state(psi.L, basis);
  return std::norm(g.amplitudes.dot(psi.amplitudes)) / psi.amplitudes.squaredNorm();
}

double reduced_entropy_oracle(const SpinState& psi, const std::vector<int>& sites) {
  const RVector p = schmidt_probabilities(psi, sites);
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) s -= p(i) * std::log(p(i));
  }
  return std::max(s, 0.0);
}

double reduced_renyi_oracle(const SpinState& psi, const std::vector<int>& sites, int n) {
  if (n < 1) throw ValidationError("Renyi index must be >= 1");
  if (n == 1) return reduced_entropy_oracle(psi, sites);
  const RVector p = schmidt_probabilities(psi, sites);
  return std::log(p.array().pow(n).sum()) / (1.0 - n);
}

ObservableTrace quench_experiment(const ModelParams& p, const LatticeSpec& lat, const QuenchConfig& q,
                                  const SteadyStateDetector& detector) {
  SpinState psi = spin_initial_state(q, lat);
  ObservableTrace tr;
  tr.entries.push_back(spin_observables(psi));
  tr.log_norm.push_back(0.0);

  const auto vec = [](const ObservableEntry& e) {
    std::vector<double> v = e.Sx;
    v.push_back(e.SxSx_edge);
    v.push_back(e.ghz_overlap);
    return v;
  };
  const auto close = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      diff += (a[i] - b[i]) * (a[i] - b[i]);
      scale += a[i] * a[i];
    }
    return std::sqrt(diff) <= detector.rel_tol * std::max(std::sqrt(scale), 1e-12);
  };

  int streak = 0;
  for (int t = 1; t <= q.n_periods; ++t) {
    tr.log_norm.push_back(apply_floquet_period(psi, p, lat, q.K));
    tr.entries.push_back(spin_observables(psi));
    if (!tr.steady_period && t >= 2) {
      const auto now = vec(tr.entries[static_cast<std::size_t>(t)]);
      const bool period1 = close(now, vec(tr.entries[static_cast<std::size_t>(t - 1)]));
      const bool period2 = close(now, vec(tr.entries[static_cast<std::size_t>(t - 2)]));
      streak = (period1 || period2) ? streak + 1 : 0;
      if (streak >= detector.consecutive) tr.steady_period = t - detector.consecutive + 1;
    }
  }
  return tr;
}

double envelope_decay_rate(const ObservableTrace& trace, int first, int last) {
  const int n_entries = static_cast<int>(trace.entries.size());
  last = std::min(last, n_entries - 1);
  if (first < 0 || last - first < 2) throw ValidationError("decay fit needs at least 3 periods");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int t = first; t <= last; ++t) {
    const double a = std::abs(trace.entries[static_cast<std::size_t>(t)].Sx.front());
    const double y = std::log(std::max(a, 1e-300));
    sx += t;
    sy += y;
    sxx += static_cast<double>(t) * t;
    sxy += t * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

}  // namespace nhf
