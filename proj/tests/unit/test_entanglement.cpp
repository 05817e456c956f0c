#include <doctest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "nhfloquet/entanglement.hpp"
#include "nhfloquet/errors.hpp"
#include "nhfloquet/spectral.hpp"
#include "nhfloquet/spin.hpp"
#include "oracle.hpp"

using namespace nhf;

namespace {

// Eigenvalues of rho_A for the leading `LA` sites, by explicit partial trace.
RVector rho_spectrum(const SpinState& psi, int LA) {
  const Eigen::Index dA = Eigen::Index(1) << LA, dB = psi.amplitudes.size() / dA;
  // Bits 0..LA-1 are the subsystem sites.
  CMatrix m(dA, dB);
  for (Eigen::Index s = 0; s < psi.amplitudes.size(); ++s) m(s % dA, s / dA) = psi.amplitudes(s);
  m /= psi.amplitudes.norm();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m * m.adjoint(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseMax(0.0);
}

double von_neumann(const RVector& p) {
  double s = 0.0;
  for (double x : p)
    if (x > 1e-300) s -= x * std::log(x);
  return s;
}

// Evolved Gaussian state of the dense simulator.
SpinState evolved_state(std::uint64_t seed, int L, int periods) {
  std::mt19937_64 rng(seed);
  const auto p = oracle::random_params(rng);
  auto psi = spin_product_state(oracle::random_signs(rng, L), Basis::Z);
  for (int t = 0; t < periods; ++t) apply_floquet_period(psi, p, {L, Boundary::Open});
  return psi;
}

CorrelationMatrix majorana_correlations(const SpinState& psi) { return {oracle::correlations(psi)}; }

const LatticeSpec kOpen6{6, Boundary::Open};

}  // namespace

TEST_CASE("entropy of simple spectra") {
  CHECK(entropy_from_spectrum(RVector::Zero(6)) == doctest::Approx(3 * std::log(2.0)));
  RVector pure(4);
  pure << -1, 1, -1, 1;
  CHECK(entropy_from_spectrum(pure) == doctest::Approx(0.0));
  CHECK(renyi_from_spectrum(RVector::Zero(2), 2) == doctest::Approx(std::log(2.0)));
  CHECK(renyi_from_spectrum(pure, 3) == doctest::Approx(0.0));
  CHECK(renyi_from_spectrum(RVector::Zero(2), 1) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("product states carry no entanglement") {
  const auto C = majorana_correlations(spin_product_state({1, -1, -1, 1, 1, -1}, Basis::Z));
  CHECK(entropy_from_correlations(C, {1, 3}, kOpen6).S_A == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(renyi_entropy(C, {2, 2}, kOpen6, 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mutual_information(C, {1, 2}, {4, 3}, kOpen6) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(tee(C, TeePartition{{1, 2, 2, 1}}).S_top == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("entropies match an explicit partial trace") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto psi = evolved_state(seed, 6, 7);
    const auto C = majorana_correlations(psi);
    const RVector p = rho_spectrum(psi, 3);
    const auto rep = entropy_from_correlations(C, {1, 3}, kOpen6, {2, 3});
    CHECK(rep.S_A == doctest::Approx(von_neumann(p)).epsilon(1e-9));
    CHECK(rep.renyi.at(2) == doctest::Approx(-std::log(p.squaredNorm())).epsilon(1e-9));
    CHECK(rep.renyi.at(3) == doctest::Approx(-0.5 * std::log(p.array().cube().sum())).epsilon(1e-9));
    CHECK(reduced_entropy_oracle(psi, {0, 1, 2}) == doctest::Approx(von_neumann(p)).epsilon(1e-9));
  }
}

TEST_CASE("eigenvalue form equals trace form") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    RMatrix A(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) A(i, j) = g(rng);
    A = A - A.transpose().eval();
    CMatrix H = kI * A.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    H *= 0.9 / es.eigenvalues().cwiseAbs().maxCoeff();
    const CMatrix I = CMatrix::Identity(8, 8);
    const CMatrix P = 0.5 * (I + H), Q = 0.5 * (I - H);
    // Over all 2 L_A eigenvalues the +-nu pairing makes the two halves equal.
    const double trace_form = -0.5 * ((P * P.log()).trace() + (Q * Q.log()).trace()).real();
    Eigen::SelfAdjointEigenSolver<CMatrix> hs(H, Eigen::EigenvaluesOnly);
    CHECK(entropy_from_spectrum(hs.eigenvalues()) == doctest::Approx(trace_form).epsilon(1e-10));
  }
}

TEST_CASE("frame and correlation spectra agree") {
  std::mt19937_64 rng(59);
  const LatticeSpec lat{12, Boundary::Open};
  const auto f = dominant_frame(build_transfer_matrix(oracle::random_params(rng), lat), 0.0);
  const auto C = correlation_from_frame(f);
  const std::vector<int> sites{2, 3, 4, 5, 6};
  CHECK((subsystem_spectrum(f, sites) - subsystem_spectrum(C, sites)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(entropy_from_frame(f, sites) == doctest::Approx(entropy_from_spectrum(subsystem_spectrum(C, sites))));
}

TEST_CASE("complementarity, subadditivity and mutual information") {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto C = majorana_correlations(evolved_state(seed, 6, 9));
    for (int LA = 1; LA < 6; ++LA) {
      const double SA = entropy_from_correlations(C, {1, LA}, kOpen6).S_A;
      const double Sc = entropy_from_correlations(C, {LA + 1, 6 - LA}, kOpen6).S_A;
      CHECK(SA == doctest::Approx(Sc).epsilon(1e-8));
      CHECK(SA >= -1e-12);
    }
    const double SA = entropy_from_correlations(C, {1, 2}, kOpen6).S_A;
    const double SB = entropy_from_correlations(C, {3, 2}, kOpen6).S_A;
    const double SAB = entropy_from_correlations(C, {1, 4}, kOpen6).S_A;
    CHECK(SAB <= SA + SB + 1e-9);
    CHECK(mutual_information(C, {1, 2}, {3, 2}, kOpen6) == doctest::Approx(SA + SB - SAB));
    const double whole = mutual_information(C, {1, 3}, {4, 3}, kOpen6);
    CHECK(whole == doctest::Approx(2 * entropy_from_correlations(C, {1, 3}, kOpen6).S_A).epsilon(1e-8));
  }
  const auto C = majorana_correlations(evolved_state(1, 6, 3));
  CHECK_THROWS_AS(mutual_information(C, {1, 3}, {3, 2}, kOpen6), ValidationError);
}

TEST_CASE("mutual information of a volume-law state matches the oracle") {
  const auto p = make_params(0.2, -0.1, 0.2, 0.1);
  const LatticeSpec lat{8, Boundary::Open};
  auto psi = spin_product_state({-1, 1, -1, 1, -1, 1, -1, 1}, Basis::Z);
  for (int t = 0; t < 40; ++t) apply_floquet_period(psi, p, lat);
  const auto C = majorana_correlations(psi);
  const double I = mutual_information(C, {1, 4}, {5, 4}, lat);
  CHECK(I > 0.0);
  CHECK(I == doctest::Approx(2 * von_neumann(rho_spectrum(psi, 4))).epsilon(1e-9));
}

TEST_CASE("overfull correlation spectra raise PurityViolation") {
  const auto C = majorana_correlations(spin_product_state({1, 1, 1}, Basis::Z));
  CorrelationMatrix bad{CMatrix::Identity(6, 6) + 1.5 * C.prime()};
  CHECK_THROWS_AS(entropy_from_correlations(bad, {1, 2}, {3, Boundary::Open}), PurityViolation);
}

TEST_CASE("tee is symmetric under exchanging the end segments") {
  // Odd L: the Neel state and the open chain are both reflection symmetric.
  const LatticeSpec lat{25, Boundary::Open};
  const auto kicks = FloquetKicks::from(make_params(0.2, -1.5, 0.2, -0.3), lat);
  QuenchConfig q;
  auto f = initial_frame(q, lat);
  for (int t = 0; t < 40; ++t) period_map(f, kicks);
  const double a = tee(f, TeePartition{{4, 7, 7, 7}}).S_top;
  const double b = tee(f, TeePartition{{7, 7, 4, 7}}).S_top;
  CHECK(a > 0.1);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
  CHECK(tee(correlation_from_frame(f), TeePartition{{4, 7, 7, 7}}).S_top == doctest::Approx(a).epsilon(1e-9));
  CHECK_THROWS_AS(tee(f, TeePartition{{4, 7, 7, 5}}), ValidationError);
}

TEST_CASE("fit_scaling recovers synthetic coefficients and laws") {
  std::vector<ScalingPoint> log_pts, vol_pts, area_pts;
  for (int L : {40, 60, 80, 100, 120, 160, 200}) {
    const int LA = L / 10;
    const double chord = std::log(L / kPi * std::sin(kPi * LA / L));
    log_pts.push_back({L, LA, chord / 6.0 + 0.54});
    vol_pts.push_back({L, LA, 0.3 * LA + 0.1});
    area_pts.push_back({L, LA, 0.7 + 1e-4 * ((L / 20) % 2)});
  }
  const auto lf = fit_scaling(log_pts);
  CHECK(lf.a == doctest::Approx(1.0 / 6).epsilon(1e-10));
  CHECK(lf.b == doctest::Approx(0.54).epsilon(1e-10));
  CHECK(lf.law == ScalingLaw::Log);
  const auto vf = fit_scaling(vol_pts);
  CHECK(vf.law == ScalingLaw::Volume);
  CHECK(vf.slope == doctest::Approx(0.3));
  CHECK(fit_scaling(area_pts).law == ScalingLaw::Area);
  CHECK_THROWS(fit_scaling({log_pts.begin(), log_pts.begin() + 2}));
}

TEST_CASE("tee collapse recovers synthetic scaling and rejects shuffled sizes") {
  const double beta0 = -0.3;
  CollapseCurves curves, shuffled;
  const std::vector<int> sizes{32, 48, 64, 96};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (int j = 0; j <= 60; ++j) {
      const double beta = -0.6 + 0.01 * j;
      const double S = std::log(2.0) * 0.5 * (1 - std::tanh((beta - beta0) * sizes[i] / 8.0));
      curves[sizes[i]].emplace_back(beta, S);
      shuffled[sizes[(i + 1) % sizes.size()]].emplace_back(beta, S);
    }
  }
  const auto r = tee_collapse(curves);
  CHECK(r.beta_J0 == doctest::Approx(beta0).epsilon(1e-3));
  CHECK(r.nu == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(tee_collapse(shuffled).collapse_residual > 10 * r.collapse_residual + 1e-6);
}
