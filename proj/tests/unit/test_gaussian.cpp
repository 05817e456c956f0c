#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "nhfloquet/entanglement.hpp"
#include "nhfloquet/errors.hpp"
#include "nhfloquet/gaussian.hpp"
#include "nhfloquet/spectral.hpp"
#include "nhfloquet/spin.hpp"
#include "oracle.hpp"

using namespace nhf;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

GaussianFrame frame_of(InitialState s, int L) {
  QuenchConfig q;
  q.initial_state = s;
  return initial_frame(q, {L, Boundary::Open});
}

}  // namespace

TEST_CASE("initial frames") {
  const auto up = correlation_from_frame(frame_of(InitialState::AllUp, 6));
  for (int j = 1; j <= 6; ++j) CHECK(up.z(j) == doctest::Approx(1.0));
  const CMatrix Cp = up.prime();
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      const bool partner = i / 2 == j / 2 && i != j;
      CHECK(std::abs(Cp(i, j)) == doctest::Approx(partner ? 1.0 : 0.0));
    }

  const auto neel = correlation_from_frame(frame_of(InitialState::NeelFermion, 6));
  for (int j = 1; j <= 6; ++j) CHECK(neel.z(j) == doctest::Approx(j % 2 ? -1.0 : 1.0));

  const auto down = correlation_from_frame(frame_of(InitialState::AllDown, 6));
  CHECK(max_abs(down.prime() + up.prime()) < 1e-15);

  QuenchConfig xq;
  xq.initial_state = InitialState::AntiferroSpins;
  CHECK_THROWS_AS(initial_frame(xq, {6, Boundary::Open}), UnsupportedError);
}

TEST_CASE("initial correlations satisfy the Majorana algebra and match the oracle") {
  std::mt19937_64 rng(41);
  const auto signs = oracle::random_signs(rng, 5);
  const auto C = correlation_from_frame(product_frame(signs));
  CHECK(C.anticommutator_residual() < 1e-15);
  CHECK(C.purity_residual() < 1e-15);
  CHECK(max_abs(C.C - oracle::correlations(spin_product_state(signs, Basis::Z))) < 1e-14);
}

TEST_CASE("identity drive leaves correlations unchanged") {
  auto f = frame_of(InitialState::NeelFermion, 8);
  const CMatrix before = correlation_from_frame(f).C;
  const auto kicks = FloquetKicks::from(make_params(0, 0, 0, 0), {8, Boundary::Open});
  for (int t = 0; t < 5; ++t) period_map(f, kicks);
  CHECK(max_abs(correlation_from_frame(f).C - before) < 1e-14);
}

TEST_CASE("full correlation matrix matches the dense oracle") {
  std::mt19937_64 rng(43);
  for (auto bc : {Boundary::Open, Boundary::PeriodicEvenParity}) {
    for (int trial = 0; trial < 5; ++trial) {
      const LatticeSpec lat{6, bc};
      const auto p = oracle::random_params(rng);
      // An even number of flips keeps the even parity sector for PBC.
      std::vector<int> signs{1, -1, -1, 1, 1, 1};
      auto f = product_frame(signs);
      auto psi = spin_product_state(signs, Basis::Z);
      const auto kicks = FloquetKicks::from(p, lat);
      for (int t = 0; t < 20; ++t) {
        period_map(f, kicks);
        apply_floquet_period(psi, p, lat);
      }
      CHECK(max_abs(correlation_from_frame(f).C - oracle::correlations(psi)) < 1e-8);
    }
  }
}

TEST_CASE("transfer-matrix and kick period maps agree") {
  std::mt19937_64 rng(47);
  const LatticeSpec lat{10, Boundary::Open};
  const auto p = oracle::random_params(rng);
  auto a = frame_of(InitialState::NeelFermion, 10);
  auto b = a;
  const auto kicks = FloquetKicks::from(p, lat);
  const auto tm = build_transfer_matrix(p, lat);
  for (int t = 0; t < 10; ++t) {
    period_map(a, kicks);
    period_map(b, tm);
  }
  CHECK(max_abs(correlation_from_frame(a).C - correlation_from_frame(b).C) < 1e-10);
  CHECK(a.norm_log == doctest::Approx(b.norm_log).epsilon(1e-10));
}

TEST_CASE("frame invariants hold after every period and purity survives 500 periods") {
  const LatticeSpec lat{64, Boundary::Open};
  const auto kicks = FloquetKicks::from(make_params(0.6, -0.7, 0.6, 0.4), lat);
  auto f = frame_of(InitialState::NeelFermion, 64);
  double iso = 0.0, ortho = 0.0;
  for (int t = 0; t < 500; ++t) {
    period_map(f, kicks);
    iso = std::max(iso, f.isotropy_residual());
    ortho = std::max(ortho, f.orthonormality_residual());
  }
  CHECK(iso < 1e-10);
  CHECK(ortho < 1e-10);
  CHECK(correlation_from_frame(f).purity_residual() < 1e-8);
  CHECK(f.period_count == 500);
}

TEST_CASE("unitary drive keeps norm_log at zero") {
  const LatticeSpec lat{16, Boundary::PeriodicEvenParity};
  const auto kicks = FloquetKicks::from(make_params(0.7, 0, 0.3, 0), lat);
  auto f = frame_of(InitialState::NeelFermion, 16);
  for (int t = 0; t < 50; ++t) {
    const double before = f.norm_log;
    period_map(f, kicks);
    CHECK(std::abs(f.norm_log - before) < 1e-10);
  }
}

TEST_CASE("strong imaginary field polarizes every spin") {
  const LatticeSpec lat{8, Boundary::Open};
  for (double beta : {2.0, -2.0}) {
    // A weak bond kick lets the Neel state leave the Z eigenbasis.
    const auto kicks = FloquetKicks::from(make_params(0.1, 0, 0, beta), lat);
    auto f = frame_of(InitialState::NeelFermion, 8);
    for (int t = 0; t < 20; ++t) period_map(f, kicks);
    const auto C = correlation_from_frame(f);
    // exp(i h Z) with Im h > 0 amplifies Z = -1; the bond kick leaves O(J^2) admixture.
    for (int j = 1; j <= 8; ++j) CHECK(std::abs(C.z(j) - (beta > 0 ? -1.0 : 1.0)) < 0.03);
  }
}

TEST_CASE("dominant frame is the long-time limit in a gapped phase") {
  const LatticeSpec lat{20, Boundary::Open};
  const auto p = make_params(0.5, -0.5, 0.5, 1.5);
  const auto tm = build_transfer_matrix(p, lat);
  const auto steady = correlation_from_frame(dominant_frame(tm));
  auto f = frame_of(InitialState::NeelFermion, 20);
  const auto kicks = FloquetKicks::from(p, lat);
  for (int t = 0; t < 400; ++t) period_map(f, kicks);
  CHECK(max_abs(correlation_from_frame(f).C - steady.C) < 1e-8);
}

TEST_CASE("bulk steady entropy is insensitive to the boundary condition") {
  const auto p = make_params(0.5, -0.5, 0.5, 1.5);
  const std::vector<int> block{35, 36, 37, 38, 39, 40, 41, 42, 43, 44};
  const double open = entropy_from_frame(dominant_frame(build_transfer_matrix(p, {80, Boundary::Open})), block);
  const double ring =
      entropy_from_frame(dominant_frame(build_transfer_matrix(p, {80, Boundary::PeriodicEvenParity})), block);
  CHECK(std::abs(open - ring) <= 0.02 * std::max(ring, 1e-3));
}

TEST_CASE("continuous evolution: integrator and exact propagator agree") {
  const LatticeSpec lat{8, Boundary::Open};
  const auto W = continuous_form(make_params(0.5, 0.1, 0.3, -0.2, Units::Radians), lat);
  const auto f0 = frame_of(InitialState::NeelFermion, 8);
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.05 * i);
  const auto Cs = evolve_continuous(correlation_from_frame(f0), W, grid);
  const auto frames = evolve_continuous_frames(f0, W, grid);
  REQUIRE(Cs.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(max_abs(Cs[i].C - correlation_from_frame(frames[i]).C) < 1e-6);
}

TEST_CASE("continuous evolution limits") {
  const LatticeSpec lat{6, Boundary::Open};
  const auto C0 = correlation_from_frame(frame_of(InitialState::NeelFermion, 6));
  const std::vector<double> grid{0.0, 0.1, 0.2};
  const auto still = evolve_continuous(C0, continuous_form(make_params(0, 0, 0, 0), lat), grid);
  for (const auto& C : still) CHECK(max_abs(C.C - C0.C) < 1e-14);
  const auto herm = evolve_continuous(C0, continuous_form(make_params(0.4, 0, 0.7, 0, Units::Radians), lat), grid);
  for (const auto& C : herm) {
    CHECK(C.purity_residual() < 1e-7);
    CHECK(std::abs(C.C.trace() - C0.C.trace()) < 1e-8);
  }
}

TEST_CASE("stroboscopic run records the initial state") {
  QuenchConfig q;
  q.n_periods = 30;
  StroboscopicOptions opt;
  opt.subsystem = {1, 4};
  const auto trace = stroboscopic_run(make_params(0.3, -0.2, 0.3, 0.1), {16, Boundary::PeriodicEvenParity}, q, opt);
  REQUIRE(trace.S_A.size() == 31);
  CHECK(trace.period.front() == 0);
  CHECK(trace.S_A.front() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(trace.S_A.back() > 0.0);
  for (double r : trace.purity_residual) CHECK(r < 1e-8);
}

TEST_CASE("correlation dumps are written with a sidecar") {
  const auto dir = std::filesystem::temp_directory_path() / "nhf_dump_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto C = correlation_from_frame(frame_of(InitialState::AllUp, 3));
  const auto path = dump_correlations(C, 7, dir.string());
  CHECK(std::filesystem::file_size(path) == 36 * sizeof(cplx));
  CHECK(std::filesystem::exists(dir / "C_7.json"));
  std::filesystem::remove_all(dir);
}
