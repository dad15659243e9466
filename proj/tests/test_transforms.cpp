#include "core/transforms.hpp"

#include "core/numerics.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace hylab;

namespace {

// Direct quadrature of the centered unit ball transform at radius rho.
double transform_by_quadrature(int d, double rho) {
  const Quadrature gl = gauss_legendre(24);
  if (d == 1) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
      acc += gl.weights[i] * std::cos(2.0 * std::numbers::pi * gl.nodes[i] * rho);
    return acc;
  }
  // Radial form: 2 pi times the integral over r in (0,1) of r J0(2 pi r rho),
  // with J0 expanded through its own angular integral.
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double r = 0.5 * (gl.nodes[i] + 1.0);
    double j0 = 0.0;
    const int m = 256;
    for (int k = 0; k < m; ++k) {
      const double th = std::numbers::pi * (k + 0.5) / m;
      j0 += std::cos(2.0 * std::numbers::pi * r * rho * std::cos(th));
    }
    j0 /= m;
    acc += 0.5 * gl.weights[i] * 2.0 * std::numbers::pi * r * j0;
  }
  return acc;
}

}  // namespace

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == 2.0);
  CHECK(std::abs(unit_ball_volume(2) - std::numbers::pi) < 1e-15);
}

TEST_CASE("ball transform matches direct quadrature in d=1") {
  CHECK(std::abs(ball_transform(1, 0.0) - 2.0) < 1e-15);
  for (double rho : {0.1, 0.5, 1.0, 2.3, 7.7}) {
    const double expect = std::sin(2.0 * std::numbers::pi * rho) /
                          (std::numbers::pi * rho);
    CHECK(std::abs(ball_transform(1, rho) - expect) < 1e-14);
    CHECK(std::abs(ball_transform(1, rho) - transform_by_quadrature(1, rho)) <
          1e-10);
  }
}

TEST_CASE("ball transform matches direct quadrature in d=2") {
  CHECK(std::abs(ball_transform(2, 0.0) - std::numbers::pi) < 1e-14);
  for (double rho : {0.3, 1.1, 2.7}) {
    CHECK(std::abs(ball_transform(2, rho) - transform_by_quadrature(2, rho)) <
          1e-8);
    const double viaj1 = std::cyl_bessel_j(1, 2.0 * std::numbers::pi * rho) / rho;
    CHECK(std::abs(ball_transform(2, rho) - viaj1) < 1e-10);
  }
  // Continuity through the small-argument switchover.
  CHECK(std::abs(ball_transform(2, 1e-9) - std::numbers::pi) < 1e-8);
}

TEST_CASE("envelope constant dominates the sampled transform") {
  for (int d : {1, 2}) {
    const double c = ball_envelope_const(d);
    const double p = 0.5 * (d + 1);
    double worst = 0.0;
    for (int i = 0; i <= 5000; ++i) {
      const double rho = 0.01 * i;
      const double ratio =
          std::abs(ball_transform(d, rho)) * std::pow(1.0 + rho, p);
      worst = std::max(worst, ratio);
    }
    CHECK(worst <= c);
    // The constant is an envelope, not a wild overestimate.
    CHECK(worst > 0.4 * c);
    CHECK(ball_envelope_sharp(d) <= c);
  }
}

TEST_CASE("tail bound dominates the numeric frequency tail") {
  // q-th power of the transform integrated over |xi| > cutoff, d=1, against
  // the closed-form dominating bound.
  const double q = 4.0, cutoff = 6.0;
  const Quadrature gl = gauss_legendre(16);
  double numeric = 0.0;
  for (double lo = cutoff; lo < 300.0; lo += 0.25) {
    const double mid = lo + 0.125, half = 0.125;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double xi = mid + half * gl.nodes[i];
      numeric += half * gl.weights[i] * std::pow(std::abs(ball_transform(1, xi)), q);
    }
  }
  numeric *= 2.0;  // both signs
  const double bound = tail_bound(1, q, cutoff);
  CHECK(bound >= numeric);
  CHECK(bound < 1.0);
  // Monotone in the cutoff.
  CHECK(tail_bound(1, q, 12.0) < bound);
  CHECK(tail_bound(2, q, 12.0) < tail_bound(2, q, 6.0));
}

TEST_CASE("envelope tail integrates the decay power") {
  // envelope_tail(d, p, xi) bounds the integral of the envelope to the p-th
  // power outside radius xi; halving behavior pins the exponent.
  const double t6 = envelope_tail(1, 4.0, 6.0);
  const double t12 = envelope_tail(1, 4.0, 12.0);
  CHECK(t6 > 0.0);
  CHECK(t12 < t6);
  // ratio approximates 2^{-(s-d)} with s = q(d+1)/2 = 4, d = 1.
  const double ratio = t12 / t6;
  CHECK(ratio < 0.2);
  CHECK(ratio > 0.05);
}
