#pragma once

namespace csradar {

/// First-order Bessel function of the first kind, J_1(x).
/// Power series for |x| <= 12; the integral representation
/// (1/pi) int_0^pi cos(t - x sin t) dt evaluated by an equispaced
/// trapezoidal rule beyond, which converges superexponentially once the
/// node count passes ~1.4|x|. Accurate to better than 1e-12 over the range
/// used here.
double bessel_j1(double x);

/// varsigma(x) = 2 J_1(x * pi * r / lambda) / (x * pi * r / lambda),
/// with the x -> 0 limit of 1.
double varsigma(double x, double disk_radius_m, double wavelength_m);

}  // namespace csradar
