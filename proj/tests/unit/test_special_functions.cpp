#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "aoicache/errors.hpp"
#include "aoicache/special_functions.hpp"
#include "quadrature.hpp"

using namespace aoicache;
using aoicache::testing::e1_quadrature;
using aoicache::testing::e1_scaled_quadrature;
using aoicache::testing::integrate;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) {
    xs.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  return xs;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("quadrature oracle integrates known closed forms") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0).value ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 40.0).value ==
        doctest::Approx(-std::expm1(-40.0)).epsilon(1e-14));
  // Peaked integrand that needs adaptive refinement.
  const double a = 1e-3;
  const auto r = integrate([a](double x) { return a / (x * x + a * a); }, -1.0, 1.0);
  CHECK(r.value == doctest::Approx(2.0 * std::atan(1.0 / a)).epsilon(1e-13));
  CHECK(r.panels > 1);
}

TEST_CASE("quadrature oracle reproduces tabulated E1 values") {
  // Abramowitz & Stegun table 5.1.
  CHECK(rel_err(e1_quadrature(1.0), 0.219383934395520) < 1e-13);
  CHECK(rel_err(e1_quadrature(0.5), 0.559773594776161) < 1e-13);
  CHECK(rel_err(e1_quadrature(2.0), 0.048900510708061) < 1e-12);
  CHECK(rel_err(e1_quadrature(10.0), 4.156968929685324e-06) < 1e-12);
}

TEST_CASE("E1 matches the reference values") {
  CHECK(exp_integral_e1(1.0) == doctest::Approx(0.2193839344).epsilon(1e-10));
  CHECK(exp_integral_e1(10.0) == doctest::Approx(4.15697e-6).epsilon(1e-5));
}

TEST_CASE("E1 agrees with quadrature to 1e-10 over [1e-8, 700]") {
  double worst = 0.0;
  for (double x : log_grid(1e-8, 700.0, 120)) {
    const double want = e1_quadrature(x);
    const double got = exp_integral_e1(x);
    worst = std::max(worst, rel_err(got, want));
    INFO("x = " << x);
    CHECK(rel_err(got, want) <= 1e-10);
  }
  MESSAGE("max relative error " << worst);
}

TEST_CASE("E1 is continuous across the series / continued-fraction split") {
  const double below = exp_integral_e1(std::nextafter(1.0, 0.0));
  const double at = exp_integral_e1(1.0);
  const double above = exp_integral_e1(std::nextafter(1.0, 2.0));
  CHECK(rel_err(below, at) < 1e-13);
  CHECK(rel_err(above, at) < 1e-13);
}

TEST_CASE("scaled E1 agrees with its own quadrature far beyond underflow") {
  for (double x : log_grid(1e-6, 1e6, 60)) {
    INFO("x = " << x);
    CHECK(rel_err(exp_integral_e1_scaled(x), e1_scaled_quadrature(x)) <= 1e-10);
  }
  for (double x : log_grid(1e-6, 600.0, 40)) {
    INFO("x = " << x);
    CHECK(rel_err(exp_integral_e1_scaled(x), std::exp(x) * exp_integral_e1(x)) <= 1e-12);
  }
  // Asymptotically e^x E1(x) ~ 1/x.
  CHECK(exp_integral_e1_scaled(1e8) * 1e8 == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("E1 respects the classical bounds") {
  for (double x : log_grid(1e-6, 500.0, 200)) {
    const double e1 = exp_integral_e1(x);
    INFO("x = " << x);
    CHECK(e1 <= std::exp(-x) / x);
    CHECK(0.5 * std::exp(-x) * std::log1p(2.0 / x) < e1);
    CHECK(e1 < std::exp(-x) * std::log1p(1.0 / x));
  }
}

TEST_CASE("E1 is strictly decreasing") {
  double prev = std::numeric_limits<double>::infinity();
  for (double x : log_grid(1e-8, 700.0, 300)) {
    const double e1 = exp_integral_e1(x);
    CHECK(e1 < prev);
    prev = e1;
  }
}

TEST_CASE("E1 rejects arguments outside its domain") {
  CHECK_THROWS_AS(exp_integral_e1(0.0), DomainError);
  CHECK_THROWS_AS(exp_integral_e1(-1.0), DomainError);
  CHECK_THROWS_AS(exp_integral_e1(std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(exp_integral_e1_scaled(0.0), DomainError);
  CHECK_THROWS_AS(exp_integral_e1_scaled(-3.0), DomainError);
}
