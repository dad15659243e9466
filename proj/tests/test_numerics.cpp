#include "core/numerics.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace hylab;

TEST_CASE("pairwise sum is accurate on many equal terms") {
  std::vector<double> v(100000, 0.1);
  CHECK(std::abs(pairwise_sum(v) - 10000.0) < 1e-9);
  CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("indexed sums agree between serial and parallel form") {
  auto f = [](std::size_t i) {
    return std::sin(0.001 * static_cast<double>(i)) /
           (1.0 + static_cast<double>(i % 7));
  };
  const double a = indexed_sum(50000, f);
  const double b = parallel_indexed_sum(50000, f);
  CHECK(a == b);
}

TEST_CASE("seeded rng reproduces its stream and respects bounds") {
  Rng a(99), b(99), c(100);
  bool same = true, diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    same = same && x == b.uniform();
    diff = diff || x != c.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(same);
  CHECK(diff);
  Rng d(7);
  for (int i = 0; i < 100; ++i) {
    const double x = d.uniform(-2.0, 5.0);
    CHECK(x >= -2.0);
    CHECK(x < 5.0);
  }
}

TEST_CASE("fnv1a64 matches the reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xabcull) == "0000000000000abc");
}

TEST_CASE("line fits recover exact coefficients") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double xi : x) y.push_back(2.0 * xi + 1.0);
  const LineFit f = fit_line(x, y);
  CHECK(std::abs(f.slope - 2.0) < 1e-12);
  CHECK(std::abs(f.intercept - 1.0) < 1e-12);
  CHECK(f.r2 > 1.0 - 1e-12);

  std::vector<double> lx{0.01, 0.02, 0.04, 0.08}, ly;
  for (double xi : lx) ly.push_back(3.0 * xi * xi);
  const LineFit g = fit_loglog(lx, ly);
  CHECK(std::abs(g.slope - 2.0) < 1e-10);
}

TEST_CASE("gauss-legendre weights integrate high-degree monomials") {
  const Quadrature q = gauss_legendre(12);
  double wsum = 0.0, m22 = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    wsum += q.weights[i];
    m22 += q.weights[i] * std::pow(q.nodes[i], 22);
  }
  CHECK(std::abs(wsum - 2.0) < 1e-14);
  CHECK(std::abs(m22 - 2.0 / 23.0) < 1e-14);
}

TEST_CASE("cubic interpolant tracks a smooth function and stays in range") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 64; ++i) {
    xs.push_back(3.0 * i / 64.0);
    ys.push_back(std::cos(xs.back()));
  }
  const CubicInterpolant ci(xs, ys);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = 3.0 * i / 999.0;
    worst = std::max(worst, std::abs(ci(x) - std::cos(x)));
  }
  CHECK(worst < 1e-4);

  // Monotone data must stay monotone through the interpolant.
  std::vector<double> mx, my;
  for (int i = 0; i <= 20; ++i) {
    mx.push_back(i / 20.0);
    my.push_back(mx.back() * mx.back() * mx.back());
  }
  const CubicInterpolant mono(mx, my);
  double prev = mono(0.0);
  for (int i = 1; i <= 400; ++i) {
    const double cur = mono(i / 400.0);
    CHECK(cur >= prev - 1e-14);
    prev = cur;
  }
}

TEST_CASE("oscillatory power tail matches brute-force quadrature") {
  // integral over [xi, infinity) of t^{-beta} e^{2 pi i a t}; brute force on
  // [xi, 200] panel by panel, analytic bound for the rest.
  const double beta = 2.0, a = 1.0, xi = 10.0;
  const Quadrature gl = gauss_legendre(8);
  std::complex<double> brute = 0.0;
  const double period = 1.0 / a;
  for (double lo = xi; lo < 200.0; lo += period / 4.0) {
    const double hi = std::min(lo + period / 4.0, 200.0);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
      const double t = mid + half * gl.nodes[j];
      brute += half * gl.weights[j] * std::pow(t, -beta) *
               std::exp(std::complex<double>(0.0, 2.0 * std::numbers::pi * a * t));
    }
  }
  const std::complex<double> tail = osc_power_tail(beta, a, xi);
  // Remainder beyond 200 is below (1/(2 pi a)) * beta * 200^{-beta-1} + edge
  // term; comfortably inside 1e-5.
  CHECK(std::abs(tail - brute) < 2e-5);
  CHECK(osc_tail_cos(beta, a, xi) == doctest::Approx(tail.real()).epsilon(1e-12));
  CHECK(osc_tail_sin(beta, a, xi) == doctest::Approx(tail.imag()).epsilon(1e-12));
}

TEST_CASE("power-of-two fft matches the direct transform") {
  const int n = 64;
  Rng rng(3);
  std::vector<std::complex<double>> a(n), direct(n);
  for (auto& z : a) z = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  for (int k = 0; k < n; ++k) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < n; ++j)
      s += a[j] * std::exp(std::complex<double>(
               0.0, -2.0 * std::numbers::pi * j * k / n));
    direct[k] = s;
  }
  std::vector<std::complex<double>> b = a;
  fft_pow2(b);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(b[k] - direct[k]));
  CHECK(worst < 1e-11);
}

TEST_CASE("nelder-mead finds a quadratic minimum deterministically") {
  auto f = [](std::span<const double> x) {
    return (x[0] - 2.0) * (x[0] - 2.0) + (x[1] + 1.0) * (x[1] + 1.0);
  };
  const std::vector<double> start{0.0, 0.0};
  double f1 = 0.0, f2 = 0.0;
  const std::vector<double> m1 = nelder_mead(f, start, 0.5, 400, &f1);
  const std::vector<double> m2 = nelder_mead(f, start, 0.5, 400, &f2);
  CHECK(f1 == f2);
  CHECK(f1 < 1e-7);
  CHECK(std::abs(m1[0] - 2.0) < 1e-4);
  CHECK(std::abs(m1[1] + 1.0) < 1e-4);
  CHECK(m1 == m2);
}

TEST_CASE("significant-digit formatting is stable") {
  CHECK(format_sig(1.0 / 3.0) == "0.333333333333");
  CHECK(format_sig(16.0 / 3.0, 6) == "5.33333");
  CHECK(format_sig(0.0) == "0");
}
