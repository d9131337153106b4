#include "csradar/bessel.hpp"

#include <cmath>
#include <cstdlib>

#include "csradar/types.hpp"

namespace csradar {

namespace {

double j1_series(double x) {
  // J1(x) = sum_k (-1)^k (x/2)^{2k+1} / (k! (k+1)!)
  const double half = x / 2.0;
  double term = half;
  double sum = term;
  for (int k = 1; k <= 40; ++k) {
    term *= -(half * half) / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double j1_integral(double x) {
  // Equispaced trapezoid on [0, pi] for (1/pi) int cos(t - x sin t) dt.
  // Aliasing error is O(J_{2N-1}(x)), negligible for N >~ 1.4|x| + 16.
  const int n = static_cast<int>(1.4 * std::abs(x)) + 32;
  const double h = kPi / n;
  double sum = 0.5 * (std::cos(0.0) + std::cos(n * h - x * std::sin(n * h)));
  for (int k = 1; k < n; ++k) {
    const double t = k * h;
    sum += std::cos(t - x * std::sin(t));
  }
  return sum * h / kPi;
}

}  // namespace

double bessel_j1(double x) {
  const double ax = std::abs(x);
  const double val = ax <= 12.0 ? j1_series(ax) : j1_integral(ax);
  return x < 0 ? -val : val;  // J1 is odd
}

double varsigma(double x, double disk_radius_m, double wavelength_m) {
  const double arg = x * kPi * disk_radius_m / wavelength_m;
  if (std::abs(arg) < 1e-8) {
    return 1.0 - arg * arg / 8.0;
  }
  return 2.0 * bessel_j1(arg) / arg;
}

}  // namespace csradar
