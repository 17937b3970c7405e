#include "oracle/brute_force.hpp"

#include "qthermo/classical_jz.hpp"

#include <doctest.h>

using namespace qthermo;

namespace {

ClassicalParams params(double lambda, double g = 0.5) {
  ClassicalParams p;
  p.lambda = lambda;
  p.g = {g};
  return p;
}

void check_golden(const ClassicalModel& model, const char* key) {
  const nlohmann::json g = oracle::golden("oracle.json").at(key);
  auto ref = [&](const char* k) { return g.at(k).get<double>(); };
  ClassicalReport r = classical_report(model, 1.0, 1.0);
  REQUIRE(r.bare.has_value());
  CHECK(r.G_s == doctest::Approx(ref("G_s")).epsilon(1e-11));
  CHECK(r.bare->V == doctest::Approx(ref("V_bare")).epsilon(1e-10));
  CHECK(r.bare->U == doctest::Approx(ref("U_bare")).epsilon(1e-10));
  CHECK(r.bare->H == doctest::Approx(ref("H_bare")).epsilon(1e-10));
  CHECK(r.bare->S == doctest::Approx(ref("S_bare")).epsilon(1e-10));
  CHECK(std::abs(r.pm.V - ref("V_pm")) < 1e-10);
  CHECK(r.pm.U == doctest::Approx(ref("U_pm")).epsilon(1e-10));
  CHECK(r.pm.H == doctest::Approx(ref("H_pm")).epsilon(1e-10));
  CHECK(r.pm.S == doctest::Approx(ref("S_pm")).epsilon(1e-10));
  CHECK(r.pm.S_c == doctest::Approx(ref("S_c")).epsilon(1e-10));
  CHECK(r.pm.S_b == doctest::Approx(ref("S_b")).epsilon(1e-10));
  CHECK(std::abs(r.gap_V - ref("gap_V")) < 1e-10);
  CHECK(std::abs(r.gap_U - ref("gap_U")) < 1e-10);
}

}  // namespace

TEST_CASE("gauss_hermite") {
  const GaussHermiteRule& r = gauss_hermite(20);
  double w = 0.0, x2 = 0.0, x8 = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    w += r.w[i];
    x2 += r.w[i] * r.x[i] * r.x[i];
    x8 += r.w[i] * std::pow(r.x[i], 8);
  }
  CHECK(w == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
  CHECK(x2 == doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-14));
  CHECK(x8 == doctest::Approx(105.0 / 16.0 * std::sqrt(M_PI)).epsilon(1e-13));
  CHECK(&gauss_hermite(20) == &r);
  CHECK_THROWS(gauss_hermite(1));
}

TEST_CASE("phi potential") {
  ClassicalModel free(params(0.0, 0.0));
  for (double q : {-1.0, 0.3, 2.0}) CHECK(std::abs(free.phi(q, 1.0, 1.0)) < 1e-12);

  ClassicalModel quad(params(0.0, 0.5));
  for (double q : {-1.0, 0.3, 2.0}) {
    CHECK(quad.phi(q, 0.5, 1.0) == doctest::Approx(quad.phi(q, 2.0, 1.0)).epsilon(1e-12));
    CHECK(quad.phi(q, 1.0, 1.0) == doctest::Approx(-0.125 * q * q).epsilon(1e-12));
  }

  ClassicalModel piston(params(0.4));
  CHECK(std::abs(piston.dphi_dP_closed(0.7)) > 1e-3);
  auto phi_of_p = [&](double P) { return piston.phi(0.7, P, 1.0); };
  CHECK(oracle::central(phi_of_p, 1.0, 1e-4) == doctest::Approx(piston.dphi_dP_closed(0.7)).epsilon(1e-7));
  CHECK(piston.phi(0.7, 1.0, 2.0) == doctest::Approx(piston.phi_closed(0.7, 1.0)).epsilon(1e-12));
}

TEST_CASE("uncoupled bare block") {
  ClassicalModel free(params(0.0, 0.0));
  for (double beta : {0.5, 1.0, 3.0}) {
    BareBlock b = bare_report(free, 1.0, beta);
    CHECK(std::abs(b.V) < 1e-12);
    CHECK(b.U == doctest::Approx(1.0 / beta).epsilon(1e-12));
    ClassicalReport r = classical_report(free, 1.0, beta);
    CHECK(r.gap_V < 1e-8);
    CHECK(r.gap_U < 1e-8);
    CHECK(r.gap_H < 1e-8);
    CHECK(r.gap_S < 1e-8);
  }
  CHECK_THROWS_AS(bare_report(free, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("quadrature against the Gaussian closed form") {
  ClassicalParams p = params(0.4);
  p.omega_b = {1.0, 1.7};
  p.g = {0.5, 0.3};
  ClassicalModel m(p);
  for (double P : {0.0, 0.5, 1.0, 2.0})
    for (double beta : {0.5, 1.0, 2.0}) CHECK(relative_deviation(m.quadrature(P, beta), m.closed_form(P, beta)) < 1e-8);
}

TEST_CASE("golden classical points") {
  check_golden(ClassicalModel(params(0.4)), "classical_lambda0.4_P1_beta1");
  check_golden(ClassicalModel(params(0.0)), "classical_lambda0_P1_beta1");
}

TEST_CASE("bare and partial-molar volumes separate when the piston couples") {
  ClassicalReport r = classical_report(ClassicalModel(params(0.4)), 1.0, 1.0);
  CHECK(r.gap_V > 1e-4);
}

TEST_CASE("identities on a 5x5 grid") {
  ClassicalModel m(params(0.4));
  for (double P : {0.25, 0.5, 1.0, 1.5, 2.0})
    for (double beta : {0.5, 0.75, 1.0, 1.5, 2.0}) {
      CAPTURE(P);
      CAPTURE(beta);
      ClassicalReport r = classical_report(m, P, beta);
      CHECK(r.pm.residual_volume_fd < 1e-5);
      CHECK(r.pm.residual_entropy_fd < 1e-6);
      CHECK(r.pm.residual_enthalpy_fd < 1e-6);
      CHECK(r.pm.residual_volume_split < 1e-10);
      CHECK(r.pm.residual_enthalpy < 1e-10);
      CHECK(r.pm.residual_entropy_relation < 1e-10);
      CHECK(r.pm.residual_additivity < 1e-10);
      CHECK(r.bare->residual_enthalpy < 1e-10);
      CHECK(r.bare->residual_gibbs < 1e-10);
      REQUIRE(r.closed_form_deviation.has_value());
      CHECK(*r.closed_form_deviation < 1e-8);
    }
}

TEST_CASE("entropy gap needs a temperature-dependent phi") {
  // Quadratic bath: phi does not depend on beta, so the bare entropy equals
  // the thermodynamic one.
  BareBlock gaussian = bare_report(ClassicalModel(params(0.4)), 1.0, 1.0);
  CHECK(gaussian.entropy_gap < 1e-6);
  ClassicalParams p = params(0.4);
  p.eta = 0.3;
  ClassicalModel quartic(p);
  CHECK_FALSE(quartic.gaussian());
  BareBlock b = bare_report(quartic, 1.0, 1.0);
  CHECK(b.entropy_gap > 1e-6);
  CHECK_FALSE(classical_report(quartic, 1.0, 1.0).closed_form_deviation.has_value());
}

TEST_CASE("model validation") {
  ClassicalParams p = params(0.4);
  p.g = {0.5, 0.1};
  CHECK_THROWS_AS(ClassicalModel{p}, ConfigError);
  p = params(3.0);
  CHECK_THROWS_AS(ClassicalModel{p}, ConfigError);
  p = params(0.4);
  p.omega_b = {1, 1, 1, 1};
  p.g = {0, 0, 0, 0};
  CHECK_THROWS_AS(ClassicalModel{p}, ConfigError);
}
