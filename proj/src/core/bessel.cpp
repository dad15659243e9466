#include "core/bessel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hylab {

namespace {

constexpr double kSwitchover = 12.0;

double series(double nu, double x) {
  // J_nu(x) = (x/2)^nu sum_k (-1)^k (x^2/4)^k / (k! Gamma(nu+k+1))
  const double q = 0.25 * x * x;
  double term = std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0));
  if (x == 0.0) term = (nu == 0.0) ? 1.0 : 0.0;
  double sum = term;
  for (int k = 0; k < 80; ++k) {
    term *= -q / ((k + 1.0) * (nu + k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

double asymptotic(double nu, double x) {
  // J_nu(x) ~ sqrt(2/(pi x)) [cos(chi) P - sin(chi) Q],
  // chi = x - nu pi/2 - pi/4, with the Hankel coefficient recursion
  // a_k = a_{k-1} (4 nu^2 - (2k-1)^2) / (8 k x). Terminates exactly for
  // half-integer nu; otherwise truncated at the smallest term.
  const double mu = 4.0 * nu * nu;
  double p = 0.0, qq = 0.0;
  double a = 1.0;
  double prev = std::abs(a);
  for (int k = 0;; ++k) {
    if (k % 2 == 0)
      p += (k % 4 == 0) ? a : -a;
    else
      qq += (k % 4 == 1) ? a : -a;
    const int m = 2 * k + 1;
    a *= (mu - m * m) / ((k + 1) * 8.0 * x);
    const double mag = std::abs(a);
    if (mag < 1e-18 || mag > prev || k >= 40) break;
    prev = mag;
  }
  const double chi = x - nu * 0.5 * std::numbers::pi - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) *
         (std::cos(chi) * p - std::sin(chi) * qq);
}

}  // namespace

double bessel_j(double nu, double x) {
  if (nu < 0.0 || x < 0.0) throw std::invalid_argument("bessel_j: nu, x >= 0");
  return (x < kSwitchover) ? series(nu, x) : asymptotic(nu, x);
}

double bessel_j0(double x) {
  return (x < kSwitchover) ? series(0.0, x) : asymptotic(0.0, x);
}

double bessel_j1(double x) {
  return (x < kSwitchover) ? series(1.0, x) : asymptotic(1.0, x);
}

}  // namespace hylab
