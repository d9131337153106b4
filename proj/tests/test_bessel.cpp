#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "csradar/bessel.hpp"

using namespace csradar;

TEST_CASE("J1 matches tabulated values to 1e-10") {
  // Abramowitz & Stegun / DLMF reference values.
  CHECK(std::abs(bessel_j1(0.0) - 0.0) < 1e-15);
  CHECK(std::abs(bessel_j1(0.5) - 0.2422684576748739) < 1e-10);
  CHECK(std::abs(bessel_j1(1.0) - 0.4400505857449335) < 1e-10);
  CHECK(std::abs(bessel_j1(2.0) - 0.5767248077568734) < 1e-10);
  CHECK(std::abs(bessel_j1(4.0) - (-0.0660433280235491)) < 1e-10);
  CHECK(std::abs(bessel_j1(5.0) - (-0.3275791375914652)) < 1e-10);
  CHECK(std::abs(bessel_j1(8.0) - 0.2346363468539146) < 1e-10);
  CHECK(std::abs(bessel_j1(10.0) - 0.0434727461688614) < 1e-10);
}

TEST_CASE("J1 agrees with the standard library across the working range") {
  for (double x = 0.0; x <= 60.0; x += 0.37) {
    CHECK(std::abs(bessel_j1(x) - std::cyl_bessel_j(1.0, x)) < 1e-11);
  }
  for (double x : {100.0, 500.0, 1047.9, 2100.0}) {
    CHECK(std::abs(bessel_j1(x) - std::cyl_bessel_j(1.0, x)) < 1e-11);
  }
}

TEST_CASE("J1 is odd") {
  for (double x : {0.3, 1.7, 9.4, 15.2}) {
    CHECK(bessel_j1(-x) == doctest::Approx(-bessel_j1(x)));
  }
}

TEST_CASE("varsigma limit and decay") {
  const double r = 10.0;
  const double lambda = 0.06;
  CHECK(varsigma(0.0, r, lambda) == doctest::Approx(1.0));
  CHECK(varsigma(1e-12, r, lambda) == doctest::Approx(1.0));
  // large arguments decay like x^{-3/2}
  CHECK(std::abs(varsigma(2.0, r, lambda)) < 1e-3);
}
