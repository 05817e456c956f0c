#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nhfloquet/errors.hpp"
#include "nhfloquet/model.hpp"

using namespace nhf;

TEST_CASE("make_params converts quarter-pi units") {
  const auto p = make_params(0.2, -0.1, 0.2, 0.1, Units::Pi4);
  CHECK(p.alpha_J == doctest::Approx(0.05 * kPi));
  CHECK(p.beta_J == doctest::Approx(-0.025 * kPi));
  CHECK(p.alpha_h == doctest::Approx(0.05 * kPi));
  CHECK(p.beta_h == doctest::Approx(0.025 * kPi));
  CHECK(p.equal_alpha);
  CHECK_FALSE(p.identity);
}

TEST_CASE("make_params flags") {
  const auto sd = make_params(1, 0, 1, 0, Units::Pi4);
  CHECK(sd.self_dual);
  CHECK(sd.dual_line);
  CHECK(sd.hermitian());
  CHECK(make_params(0, 0, 0, 0, Units::Radians).identity);
  CHECK(make_params(1, 0.3, 1, -0.7).dual_line);
  CHECK_FALSE(make_params(1, 0.3, 1, -0.7).self_dual);
  CHECK_THROWS_AS(make_params(NAN, 0, 0, 0), ValidationError);
  CHECK_THROWS_AS(make_params(0, INFINITY, 0, 0), ValidationError);
}

TEST_CASE("unit conversion round-trips") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    CHECK(std::abs(to_radians(from_radians(x, Units::Pi4), Units::Pi4) - x) <= 4e-16 * std::abs(x) + 1e-300);
    CHECK(to_radians(x, Units::Radians) == x);
  }
}

TEST_CASE("phase labels from parameters") {
  CHECK(phase_label_from_params(make_params(0.5, -0.5, 0.5, 1.5)) == PhaseLabel::Trivial);
  CHECK(phase_label_from_params(make_params(1.5, -1.5, 1.5, 0.5)) == PhaseLabel::PiMode);
  CHECK(phase_label_from_params(make_params(0.5, -1.5, 0.5, 0.5)) == PhaseLabel::ZeroMode);
  CHECK(phase_label_from_params(make_params(1.5, -0.1, 1.5, 0.5)) == PhaseLabel::ZeroPi);
  CHECK(phase_label_from_params(make_params(0.2, -0.1, 0.2, 0.1)) == PhaseLabel::CriticalVolume);
  CHECK(phase_label_from_params(make_params(0.2, 0.1, 0.2, 0.1)) == PhaseLabel::CriticalLog);
  CHECK_THROWS_AS(phase_label_from_params(make_params(0.2, 0.1, 0.3, 0.1)), UnsupportedError);
}

TEST_CASE("fold_alpha") {
  CHECK(fold_alpha(0.3) == doctest::Approx(0.3));
  CHECK(fold_alpha(-0.3) == doctest::Approx(0.3));
  CHECK(fold_alpha(kPi - 0.3) == doctest::Approx(0.3));
  CHECK(fold_alpha(kPi + 0.3) == doctest::Approx(0.3));
}

TEST_CASE("lattice and subsystem validation") {
  CHECK_THROWS_AS((LatticeSpec{1, Boundary::Open}.validate()), ValidationError);
  CHECK_NOTHROW((LatticeSpec{2, Boundary::Open}.validate()));
  const LatticeSpec ring{6, Boundary::PeriodicEvenParity};
  CHECK(SubsystemSpec{5, 3}.sites(ring) == std::vector<int>{4, 5, 0});
  CHECK_THROWS_AS((SubsystemSpec{5, 3}.sites(LatticeSpec{6, Boundary::Open})), ValidationError);
  CHECK(ring.parity_sector() == Parity::Even);
  CHECK_FALSE(LatticeSpec{6, Boundary::Open}.parity_sector().has_value());
}

TEST_CASE("tee partition quarters cover the chain") {
  for (int L : {8, 10, 33, 64}) {
    const auto part = TeePartition::quarters(L);
    int total = 0;
    for (int x : part.lengths) {
      CHECK(x > 0);
      total += x;
    }
    CHECK(total == L);
    CHECK_NOTHROW(part.validate(L));
  }
}

TEST_CASE("initial state polarizations") {
  QuenchConfig q;
  q.initial_state = InitialState::NeelFermion;
  CHECK(q.polarizations(4) == std::vector<int>{-1, 1, -1, 1});
  q.initial_state = InitialState::AntiferroSpins;
  CHECK(q.polarization_basis() == Basis::X);
  CHECK(q.polarizations(3) == std::vector<int>{1, -1, 1});
  q.initial_state = InitialState::RandomProduct;
  q.seed = 99;
  const auto a = q.polarizations(20);
  CHECK(a == q.polarizations(20));
  q.seed = 100;
  CHECK(a != q.polarizations(20));
}

TEST_CASE("key-value config parsing") {
  std::istringstream in("# comment\nalpha = 0.5\n\nbc=open\nsizes = 8, 12,16\n");
  const auto cfg = KeyValueConfig::parse(in);
  CHECK(cfg.get_double("alpha") == 0.5);
  CHECK(cfg.get("bc") == "open");
  CHECK(cfg.get_list("sizes") == std::vector<double>{8, 12, 16});
  CHECK(cfg.get_int_or("L", 10) == 10);
  CHECK_THROWS_AS(cfg.get("missing"), ValidationError);
  CHECK_THROWS_AS(cfg.get_int("alpha"), ValidationError);
  std::istringstream bad("no equals sign\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(bad), ValidationError);
}

TEST_CASE("parsers reject unknown names") {
  CHECK(parse_boundary("obc") == Boundary::Open);
  CHECK_THROWS_AS(parse_boundary("twisted"), ValidationError);
  CHECK_THROWS_AS(parse_units("degrees"), ValidationError);
  CHECK_THROWS_AS(parse_initial_state("cat"), ValidationError);
}

TEST_CASE("resolve_run_config applies defaults and units") {
  std::istringstream in("alpha = 1\nbeta_J = -0.5\nL = 3\nbc = obc\ninitial_state = custom:1,-1,1\n");
  const auto rc = resolve_run_config(KeyValueConfig::parse(in));
  CHECK(rc.params.alpha_J == doctest::Approx(kQuarterPi));
  CHECK(rc.params.alpha_h == doctest::Approx(kQuarterPi));
  CHECK(rc.params.beta_J == doctest::Approx(-0.5 * kQuarterPi));
  CHECK(rc.lattice.L == 3);
  CHECK(rc.lattice.bc == Boundary::Open);
  CHECK(rc.quench.initial_state == InitialState::CustomProduct);
  CHECK(rc.quench.custom == std::vector<int>{1, -1, 1});
}
