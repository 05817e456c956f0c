#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "nhfloquet/errors.hpp"
#include "nhfloquet/spectral.hpp"

using namespace nhf;

namespace {

// Greedy nearest-neighbour distance between two multisets of quasienergies, real part mod 2 pi.
double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const cplx& x : a) {
    auto best = b.end();
    double bd = INFINITY;
    for (auto it = b.begin(); it != b.end(); ++it) {
      double dr = std::remainder(x.real() - it->real(), 2 * kPi);
      double d = std::hypot(dr, x.imag() - it->imag());
      if (d < bd) {
        bd = d;
        best = it;
      }
    }
    worst = std::max(worst, bd);
    b.erase(best);
  }
  return worst;
}

std::vector<cplx> transfer_quasienergies(const ModelParams& p, const LatticeSpec& lat) {
  const auto tm = build_transfer_matrix(p, lat);
  std::vector<cplx> out;
  for (int i = 0; i < tm.eigenvalues.size(); ++i) out.push_back(quasienergy_from_eigenvalue(tm.eigenvalues(i)));
  return out;
}

std::vector<cplx> momentum_quasienergies(const ModelParams& p, const LatticeSpec& lat) {
  std::vector<cplx> out;
  for (double k : allowed_momenta(lat)) {
    const auto d = floquet_dispersion(p.J(), p.h(), k);
    out.push_back(d.epsilon[0]);
    out.push_back(d.epsilon[1]);
  }
  return out;
}

ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-kPi / 2, kPi / 2), b(-1.5 * kQuarterPi, 1.5 * kQuarterPi);
  return make_params(a(rng), b(rng), a(rng), b(rng), Units::Radians);
}

}  // namespace

TEST_CASE("kick forms: bond counting and zero coupling") {
  const auto p = make_params(0.3, 0.1, 0.2, -0.4);
  const auto open2 = build_kick_forms(p, {2, Boundary::Open});
  int bond_pairs = 0, field_pairs = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (std::abs(open2.bond.W(i, j)) > 0) ++bond_pairs;
      if (std::abs(open2.field.W(i, j)) > 0) ++field_pairs;
    }
  CHECK(bond_pairs == 1);
  CHECK(field_pairs == 2);
  CHECK(open2.bond.antisymmetry_residual() == 0.0);

  const auto zeroJ = build_kick_forms(make_params(0, 0, 0.4, 0.2), {8, Boundary::PeriodicEvenParity});
  CHECK(zeroJ.bond.W.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kick exponential matches the dense matrix exponential") {
  std::mt19937_64 rng(3);
  for (auto bc : {Boundary::Open, Boundary::PeriodicEvenParity, Boundary::PeriodicOddParity}) {
    const auto forms = build_kick_forms(random_params(rng), {6, bc});
    for (const auto* f : {&forms.bond, &forms.field}) {
      const CMatrix dense = (4.0 * f->W).exp();
      CHECK((kick_exponential(*f).dense() - dense).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("zero couplings give the identity transfer matrix") {
  const auto tm = build_transfer_matrix(make_params(0, 0, 0, 0), {8, Boundary::Open});
  CHECK((tm.M - CMatrix::Identity(16, 16)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("real couplings give a complex-orthogonal M with unimodular spectrum") {
  const auto tm = build_transfer_matrix(make_params(0.7, 0, 0.3, 0), {10, Boundary::PeriodicEvenParity});
  CHECK((tm.M.transpose() * tm.M - CMatrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < tm.eigenvalues.size(); ++i) CHECK(std::abs(std::abs(tm.eigenvalues(i)) - 1.0) < 1e-10);
  const auto rep = quasienergies_from_transfer(tm, Boundary::PeriodicEvenParity);
  for (const cplx& e : rep.quasienergies) CHECK(std::abs(e.imag()) < 1e-10);
  CHECK(rep.n_real_modes == 20);
}

TEST_CASE("transfer spectrum closes under mu -> 1/mu") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto tm = build_transfer_matrix(random_params(rng), {8, Boundary::Open});
    std::vector<cplx> eps, neg;
    for (int i = 0; i < tm.eigenvalues.size(); ++i) {
      eps.push_back(quasienergy_from_eigenvalue(tm.eigenvalues(i)));
      neg.push_back(-eps.back());
    }
    CHECK(multiset_distance(eps, neg) < 1e-8);
  }
}

TEST_CASE("imaginary couplings break unimodularity but keep reciprocal pairs") {
  const auto p = make_params(0, 0.1, 0, 0.1, Units::Radians);
  const LatticeSpec lat{8, Boundary::PeriodicEvenParity};
  const auto tm = build_transfer_matrix(p, lat);
  int unimodular = 0;
  for (int i = 0; i < tm.eigenvalues.size(); ++i)
    if (std::abs(std::abs(tm.eigenvalues(i)) - 1.0) < 1e-8) ++unimodular;
  CHECK(unimodular == 0);
  CHECK(multiset_distance(transfer_quasienergies(p, lat), momentum_quasienergies(p, lat)) < 1e-8);
}

TEST_CASE("real-space and momentum quasienergies agree (L = 4)") {
  std::mt19937_64 rng(5);
  const LatticeSpec lat{4, Boundary::PeriodicEvenParity};
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_params(rng);
    CHECK(multiset_distance(transfer_quasienergies(p, lat), momentum_quasienergies(p, lat)) < 1e-8);
  }
}

TEST_CASE("floquet dispersion matches a 2x2 matrix-exponential oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uk(-kPi, kPi);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_params(rng);
    const double k = uk(rng);
    // exp(i H_Z) and exp(i H_XX) separately, from the continuous block with one coupling off.
    const CMatrix U = (kI * continuous_block(0.0, p.h(), k)).exp() * (kI * continuous_block(p.J(), 0.0, k)).exp();
    Eigen::ComplexEigenSolver<CMatrix> es(U);
    std::vector<cplx> oracle{-kI * std::log(es.eigenvalues()(0)), -kI * std::log(es.eigenvalues()(1))};
    const auto d = floquet_dispersion(p.J(), p.h(), k);
    CHECK(multiset_distance({d.epsilon[0], d.epsilon[1]}, oracle) < 1e-9);
  }
}

TEST_CASE("floquet dispersion examples") {
  const cplx J{0.4, 0.3};
  CHECK(std::abs(floquet_dispersion(J, J, 0.0).epsilon[0]) < 1e-7);
  for (double k = -3.0; k <= 3.0; k += 0.25) {
    const auto d = floquet_dispersion(0.6, 0.2, k);
    CHECK(std::abs(d.epsilon[0].imag()) < 1e-12);
    CHECK(d.classification == ModeClass::Real);
  }
  // Dual line: a window of real modes alongside complex ones.
  int real = 0, complex = 0;
  const cplx Jd{kQuarterPi, 0.3 * kQuarterPi};
  for (int m = 0; m < 200; ++m) {
    const auto d = floquet_dispersion(Jd, Jd, -kPi + (m + 0.5) * 2 * kPi / 200);
    (d.classification == ModeClass::Real ? real : complex)++;
  }
  CHECK(real > 0);
  CHECK(complex > 0);
}

TEST_CASE("continuous dispersion examples") {
  CHECK(std::abs(dispersion_continuous(cplx{0.5, 0.2}, cplx{0.5, 0.2}, 0.0).epsilon[0]) < 1e-12);

  const auto d = dispersion_continuous(0.3, 0.1, kPi);
  CHECK(std::abs(std::abs(d.epsilon[0]) - 0.8) < 1e-12);
  Eigen::ComplexEigenSolver<CMatrix> es(continuous_block(0.3, 0.1, kPi));
  CHECK(std::abs(std::abs(es.eigenvalues()(0)) - 0.8) < 1e-12);

  // Exceptional point: the block is nilpotent but nonzero.
  const cplx Je{1, 0.5}, he{1, -0.5};
  const double k = std::acos(0.6);
  const auto e = dispersion_continuous(Je, he, k);
  CHECK(e.classification == ModeClass::Exceptional);
  CHECK(std::abs(e.epsilon[0]) < 1e-6);
  const CMatrix H = continuous_block(Je, he, k);
  CHECK((H * H).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(H.cwiseAbs().maxCoeff() > 0.5);
}

TEST_CASE("hermitian limit: all quasienergies real") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> a(-kPi / 2, kPi / 2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rep = spectrum_report(make_params(a(rng), 0, a(rng), 0, Units::Radians), {12, Boundary::Open});
    for (const cplx& e : rep.quasienergies) CHECK(std::abs(e.imag()) < 1e-10);
  }
}

TEST_CASE("real-mode census") {
  // beta_J = -beta_h keeps an extensive fraction of real modes.
  for (int L : {16, 32, 64}) {
    const auto c = count_real_modes(make_params(0.2, -0.1, 0.2, 0.1), {L, Boundary::PeriodicEvenParity});
    CHECK(c.density >= 0.5);
  }
  // Phase interior: at most a few real modes, density falling with L.
  const auto small = count_real_modes(make_params(0.2, -0.2, 0.2, 0.1), {16, Boundary::PeriodicEvenParity});
  const auto large = count_real_modes(make_params(0.2, -0.2, 0.2, 0.1), {128, Boundary::PeriodicEvenParity});
  CHECK(large.count <= 4);
  CHECK(large.density <= small.density);
  // J = h complex: only the k = 0 pair is real.
  const auto eq = count_real_modes(make_params(0.5, 0.4, 0.5, 0.4), {16, Boundary::PeriodicOddParity});
  CHECK(eq.count == 2);
}

TEST_CASE("edge-mode census on open chains") {
  const LatticeSpec lat{40, Boundary::Open};
  auto census = [&](double alpha, double beta_J, double beta_h) {
    const auto rep = spectrum_report(make_params(alpha, beta_J, alpha, beta_h), lat);
    return std::pair{rep.count_edges(EdgeKind::Zero), rep.count_edges(EdgeKind::Pi)};
  };
  const auto zero = census(0.5, -1.0, 0.5);
  CHECK(zero.first > 0);
  CHECK(zero.second == 0);
  const auto both = census(1.5, -0.1, 0.5);
  CHECK(both.first > 0);
  CHECK(both.second > 0);
  CHECK(census(0.5, -0.1, 0.5) == std::pair{0, 0});
  // The finite-size splitting of the pair is 4e-6 at L = 40 and falls below 1e-8 by L = 60.
  for (const auto& r : spectrum_report(make_params(0.5, -1.0, 0.5, 0.5), {60, Boundary::Open}).edge_modes)
    CHECK(std::abs(r.energy.imag()) < 1e-6);
  CHECK_THROWS_AS(detect_edge_modes(make_params(0.5, -1, 0.5, 0.5), {6, Boundary::Open}), ValidationError);
}

TEST_CASE("phase from the spectrum") {
  CHECK(spectral_phase(make_params(0.5, -1.5, 0.5, 0.5), 40) == PhaseLabel::ZeroMode);
  CHECK(spectral_phase(make_params(1.5, -0.1, 1.5, 0.5), 40) == PhaseLabel::ZeroPi);
  CHECK(spectral_phase(make_params(0.2, 0.1, 0.2, 0.1), 40) == PhaseLabel::CriticalLog);
}

TEST_CASE("pseudo-hermiticity certificates") {
  const auto herm = pseudo_hermiticity_certificate(make_params(0.4, 0, 0.3, 0), 0.7, false);
  CHECK((herm.eta - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(herm.residual < 1e-12);

  const auto cont = pseudo_hermiticity_certificate(make_params(1, 0.5, 1, -0.5, Units::Radians), kPi / 2, true);
  CHECK(cont.eta(0, 1).real() == doctest::Approx(0.5));
  CHECK(cont.eta(1, 0).real() == doctest::Approx(0.5));
  CHECK(cont.residual < 1e-10);
  CHECK(cont.certified);
  CHECK_THROWS_AS(pseudo_hermiticity_certificate(make_params(1, 0.5, 1, -0.5, Units::Radians), 0.0, true),
                  ValidationError);

  const auto dual = pseudo_hermiticity_certificate(make_params(1, 0.3, 1, 0.3), 1.1, false);
  CHECK(dual.certified);
  CHECK(std::abs(dual.eta(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(dual.eta(0, 0)) < 1e-15);
  CHECK(dual.residual < 1e-8);
}

// The metric acts mode by mode in momentum space, so the closure is a periodic-chain property.
TEST_CASE("dual-line spectra close under complex conjugation") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    const double b = u(rng);
    const auto p = make_params(1, b, 1, b);
    const auto eps = transfer_quasienergies(p, {12, trial % 2 ? Boundary::PeriodicOddParity : Boundary::PeriodicEvenParity});
    std::vector<cplx> conj;
    for (const cplx& e : eps) conj.push_back(std::conj(e));
    CHECK(multiset_distance(eps, conj) < 1e-8);
  }
}

TEST_CASE("floquet block hamiltonian exponentiates back to the block") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(rng);
    const CMatrix U = floquet_block(p.J(), p.h(), 0.9);
    const CMatrix H = floquet_block_hamiltonian(p.J(), p.h(), 0.9);
    CHECK(((-kI * H).exp() - U).cwiseAbs().maxCoeff() < 1e-9);
  }
}
