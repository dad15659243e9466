#include "core/transforms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "core/bessel.hpp"

namespace hylab {

namespace {

void check_dim(int d) {
  if (d != 1 && d != 2) throw std::invalid_argument("dimension must be 1 or 2");
}

}  // namespace

double unit_ball_volume(int d) {
  check_dim(d);
  return d == 1 ? 2.0 : std::numbers::pi;
}

double ball_transform(int d, double rho) {
  check_dim(d);
  if (rho < 0.0) throw std::invalid_argument("ball_transform: rho >= 0");
  const double z = 2.0 * std::numbers::pi * rho;
  if (d == 1) {
    if (z < 1e-4) {
      const double z2 = z * z;
      return 2.0 * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
    }
    return std::sin(z) / (std::numbers::pi * rho);
  }
  if (z < 1e-3) {
    const double z2 = z * z;
    return std::numbers::pi * (1.0 - z2 / 8.0 + z2 * z2 / 192.0);
  }
  return bessel_j1(z) / rho;
}

double ball_envelope_const(int d) {
  check_dim(d);
  return d == 1 ? 2.1 : 3.5;
}

double ball_envelope_sharp(int d) {
  check_dim(d);
  return d == 1 ? 1.0 / std::numbers::pi : 0.34;
}

double tail_bound(int d, double q, double xi) {
  check_dim(d);
  const double s = q * (d + 1) * 0.5;
  if (!(s > d)) throw std::invalid_argument("tail_bound: q (d+1)/2 must exceed d");
  if (!(xi >= 0.0)) throw std::invalid_argument("tail_bound: xi >= 0");
  const double sigma = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
  const double c = ball_envelope_const(d);
  return sigma * std::pow(c, q) * std::pow(1.0 + xi, -(s - d)) / (s - d);
}

double envelope_tail(int d, double p, double xi) {
  check_dim(d);
  const double s = p * (d + 1) * 0.5;
  if (!(s > d)) throw std::invalid_argument("envelope_tail: p (d+1)/2 must exceed d");
  if (!(xi >= 1.0)) throw std::invalid_argument("envelope_tail: xi >= 1");
  const double sigma = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
  const double a = ball_envelope_sharp(d);
  return sigma * std::pow(a, p) * std::pow(xi, -(s - d)) / (s - d);
}

}  // namespace hylab
