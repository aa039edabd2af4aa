#include <doctest.h>

#include <cmath>
#include <random>

#include "poco/core.hpp"
#include "poco/oco.hpp"

using poco::BoxSet;
using poco::OgdParams;
using poco::OmdState;
using poco::SigmaOgdParams;
using poco::VectorXd;

namespace {

VectorXd vec1(double v) {
  VectorXd x(1);
  x(0) = v;
  return x;
}

}  // namespace

TEST_SUITE("oco") {

TEST_CASE("ogd step arithmetic and clamping") {
  const BoxSet<double> set(vec1(-1.0), vec1(1.0));
  CHECK(poco::ogd_step(vec1(0.0), vec1(2.0), OgdParams<double>{0.1}, set)(0) ==
        doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(poco::ogd_step(vec1(1.0), vec1(0.0), OgdParams<double>{0.7}, set)(0) == 1.0);
  CHECK(poco::ogd_step(vec1(0.9), vec1(-5.0), OgdParams<double>{0.1}, set)(0) == 1.0);

  CHECK_THROWS_AS(poco::ogd_step(vec1(0.0), VectorXd::Zero(2), OgdParams<double>{0.1}, set),
                  std::invalid_argument);
  CHECK_THROWS_AS(poco::ogd_step(vec1(0.0), vec1(1.0), OgdParams<double>{0.0}, set),
                  std::invalid_argument);
}

TEST_CASE("ogd default step") {
  const BoxSet<double> set = BoxSet<double>::symmetric(0.5, 2);  // diameter sqrt(2)
  CHECK(poco::ogd_default_step(set, 2.0, 100) ==
        doctest::Approx(std::sqrt(2.0) / 20.0).epsilon(1e-15));
  CHECK_THROWS_AS(poco::ogd_default_step(set, 0.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(poco::ogd_default_step(set, 1.0, 0), std::invalid_argument);
}

TEST_CASE("sigma-ogd step examples") {
  SUBCASE("eta = 1 reduces to a projected gradient step of size 1/gamma") {
    const BoxSet<double> set(vec1(-1.0), vec1(1.0));
    const VectorXd out =
        poco::sigma_ogd_step(vec1(0.0), vec1(2.0), SigmaOgdParams<double>{1.0, 2.0, 0.1}, set);
    CHECK(out(0) == -1.0);  // clamped from -1 exactly
  }
  SUBCASE("eta = 0.5 is a convex combination with the projected target") {
    const BoxSet<double> set(vec1(-2.0), vec1(2.0));
    const VectorXd out =
        poco::sigma_ogd_step(vec1(0.0), vec1(2.0), SigmaOgdParams<double>{0.5, 2.0, 0.1}, set);
    CHECK(out(0) == doctest::Approx(-0.5).epsilon(1e-15));
  }
  SUBCASE("zero gradient is a fixed point") {
    const BoxSet<double> set(vec1(-1.0), vec1(1.0));
    for (double eta : {0.25, 0.5, 1.0}) {
      const VectorXd out =
          poco::sigma_ogd_step(vec1(0.4), vec1(0.0), SigmaOgdParams<double>{eta, 3.0, 0.1}, set);
      CHECK(out(0) == doctest::Approx(0.4).epsilon(1e-15));
    }
  }
  SUBCASE("parameter validation") {
    const BoxSet<double> set(vec1(-1.0), vec1(1.0));
    CHECK_THROWS_AS(
        poco::sigma_ogd_step(vec1(0.0), vec1(1.0), SigmaOgdParams<double>{1.0, 0.0, 0.1}, set),
        std::invalid_argument);
    CHECK_THROWS_AS(
        poco::sigma_ogd_step(vec1(0.0), vec1(1.0), SigmaOgdParams<double>{1.5, 1.0, 0.1}, set),
        std::invalid_argument);
  }
}

TEST_CASE("sigma-ogd with eta = 1 agrees with ogd exactly") {
  std::mt19937_64 engine(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> dims(1, 5);
  std::uniform_int_distribution<int> exponents(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dims(engine);
    VectorXd lo(n), up(n), x(n), g(n);
    for (int i = 0; i < n; ++i) {
      const double a = gauss(engine), b = gauss(engine);
      lo(i) = std::min(a, b);
      up(i) = std::max(a, b);
      x(i) = lo(i) + (up(i) - lo(i)) * 0.5;
      g(i) = gauss(engine);
    }
    const BoxSet<double> set(lo, up);
    const double gamma = std::pow(2.0, exponents(engine));  // exact reciprocal
    const VectorXd a =
        poco::sigma_ogd_step(x, g, SigmaOgdParams<double>{1.0, gamma, 0.1}, set);
    const VectorXd b = poco::ogd_step(x, g, OgdParams<double>{1.0 / gamma}, set);
    CHECK(a == b);
  }
}

TEST_CASE("omd step examples") {
  const BoxSet<double> set(vec1(-1.0), vec1(1.0));
  SUBCASE("stationary with zero gradients") {
    const OmdState<double> state{vec1(0.3), 0.1};
    const auto [played, next] = poco::omd_step(state, vec1(0.0), vec1(0.0), set);
    CHECK(played(0) == 0.3);
    CHECK(next.secondary(0) == 0.3);
  }
  SUBCASE("arithmetic") {
    const OmdState<double> state{vec1(0.0), 0.1};
    const auto [played, next] = poco::omd_step(state, vec1(1.0), vec1(1.0), set);
    CHECK(next.secondary(0) == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(played(0) == doctest::Approx(-0.2).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch") {
    const OmdState<double> state{vec1(0.0), 0.1};
    CHECK_THROWS_AS(poco::omd_step(state, VectorXd(VectorXd::Zero(2)), vec1(0.0), set),
                    std::invalid_argument);
  }
}

TEST_CASE("omd with perfect hints contracts on a fixed quadratic") {
  // f(x) = x^2, revealed gradient 2 x_t, hint evaluated at the updated
  // secondary iterate. Distance to the round optimum (the origin) must be
  // monotone non-increasing.
  const BoxSet<double> set(vec1(-1.0), vec1(1.0));
  OmdState<double> state{vec1(0.8), 0.1};
  VectorXd x = state.secondary;
  double previous = std::abs(x(0));
  for (int k = 0; k < 100; ++k) {
    const VectorXd revealed = 2.0 * x;
    const VectorXd secondary_next = poco::project(set, state.secondary - state.eta * revealed);
    const VectorXd hint = 2.0 * secondary_next;
    auto [played, next] = poco::omd_step(state, revealed, hint, set);
    state = next;
    x = played;
    CHECK(std::abs(x(0)) <= previous + 1e-15);
    previous = std::abs(x(0));
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("steppers stay feasible") {
  std::mt19937_64 engine(23);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    VectorXd lo(3), up(3), x(3), g(3);
    for (int i = 0; i < 3; ++i) {
      const double a = gauss(engine), b = gauss(engine);
      lo(i) = std::min(a, b);
      up(i) = std::max(a, b);
      x(i) = 0.5 * (lo(i) + up(i));
      g(i) = 5.0 * gauss(engine);
    }
    const BoxSet<double> set(lo, up);
    CHECK(set.contains(poco::ogd_step(x, g, OgdParams<double>{0.3}, set)));
    CHECK(set.contains(poco::sigma_ogd_step(x, g, SigmaOgdParams<double>{0.7, 2.0, 0.1}, set),
                       1e-12));
    const OmdState<double> state{x, 0.3};
    const auto [played, next] = poco::omd_step(state, g, g, set);
    CHECK(set.contains(played));
    CHECK(set.contains(next.secondary));
  }
}

}  // TEST_SUITE
