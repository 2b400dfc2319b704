#pragma once

// Complex log-gamma, Hurwitz zeta on vertical lines, and J0.

#include <array>
#include <cmath>
#include <complex>

#include "racebias/error.hpp"

namespace racebias {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {

// B_{2k} / (2k (2k-1)), k = 1..10
inline constexpr std::array<double, 10> kStirling = {
    1.0 / 12.0,          -1.0 / 360.0,        1.0 / 1260.0,           -1.0 / 1680.0,        1.0 / 1188.0,
    -691.0 / 360360.0,   1.0 / 156.0,         -3617.0 / 122400.0,     43867.0 / 244188.0,   -174611.0 / 125400.0};

// B_{2j} / (2j)!, j = 1..18
inline constexpr std::array<double, 18> kBernoulliOverFactorial = {
    1.6666666666666666e-01 / 2.0,
    -3.3333333333333333e-02 / 24.0,
    2.3809523809523808e-02 / 720.0,
    -3.3333333333333333e-02 / 40320.0,
    7.5757575757575760e-02 / 3628800.0,
    -2.5311355311355310e-01 / 479001600.0,
    1.1666666666666667e+00 / 87178291200.0,
    -7.0921568627450980e+00 / 20922789888000.0,
    5.4971177944862156e+01 / 6402373705728000.0,
    -5.2912424242424242e+02 / 2432902008176640000.0,
    6.1921231884057970e+03 / 1.1240007277776077e+21,
    -8.6580253113553110e+04 / 6.2044840173323941e+23,
    1.4255171666666667e+06 / 4.0329146112660565e+26,
    -2.7298231067816092e+07 / 3.0488834461171386e+29,
    6.0158087390064240e+08 / 2.6525285981219107e+32,
    -1.5116315767092157e+10 / 2.6313083693369353e+35,
    4.2961464306116670e+11 / 2.9523279903960414e+38,
    -1.3711655205088332e+13 / 3.7199332678990125e+41};

}  // namespace detail

/// Analytic continuation of log Gamma(z) along Re z > 0 (continuous in Im z,
/// not the principal log of Gamma).
inline cplx log_gamma(cplx z) {
  if (!(z.real() > 0.0)) fail(ErrorKind::OutOfRange, "log_gamma needs Re z > 0");
  cplx shift = 0.0;
  while (z.real() < 15.0) {
    shift += std::log(z);
    z += 1.0;
  }
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx series = 0.0, p = inv;
  for (double c : detail::kStirling) {
    series += c * p;
    p *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + series - shift;
}

/// Hurwitz zeta(s, a) for 0 < a <= 1 and s != 1, by Euler-Maclaurin.
inline cplx hurwitz_zeta(cplx s, double a) {
  if (!(a > 0.0 && a <= 1.0)) fail(ErrorKind::OutOfRange, "hurwitz_zeta needs 0 < a <= 1");
  if (std::abs(s - 1.0) < 1e-12) fail(ErrorKind::OutOfRange, "hurwitz_zeta pole at s = 1");
  const double sigma = s.real(), t = s.imag();
  const int N = static_cast<int>(std::ceil(std::abs(t) / 2.0)) + 30;
  auto power = [&](double base) {  // base^{-s}
    const double lb = std::log(base);
    const double mag = std::exp(-sigma * lb);
    return cplx(mag * std::cos(t * lb), -mag * std::sin(t * lb));
  };
  cplx head = 0.0;
  for (int k = 0; k < N; ++k) head += power(k + a);
  const double b = N + a;
  const cplx bs = power(b);
  cplx tail = b * bs / (s - 1.0) + 0.5 * bs;
  // sum_j B_{2j}/(2j)! * s(s+1)...(s+2j-2) * b^{-s-2j+1}
  cplx rising = s;
  cplx bp = bs / b;
  const double inv_b2 = 1.0 / (b * b);
  for (std::size_t j = 0; j < detail::kBernoulliOverFactorial.size(); ++j) {
    const cplx term = detail::kBernoulliOverFactorial[j] * rising * bp;
    tail += term;
    if (std::abs(term) < 1e-17 * std::abs(tail)) break;
    const double m = 2.0 * static_cast<double>(j) + 1.0;
    rising *= (s + m) * (s + m + 1.0);
    bp *= inv_b2;
  }
  return head + tail;
}

/// Bessel function of the first kind of order zero.
inline double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

}  // namespace racebias
