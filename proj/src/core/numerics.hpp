#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hylab {

// Pairwise (cascade) summation. Deterministic for a fixed input order and
// accurate to O(log n) ulp growth, which keeps repeated runs byte-identical.
double pairwise_sum(std::span<const double> v);

// sum_i f(i) for i in [0, n), accumulated pairwise in index order.
double indexed_sum(std::size_t n, const std::function<double(std::size_t)>& f);

// Deterministic parallel map-reduce: the index range is cut into fixed-size
// blocks, each block is summed pairwise, and block sums are combined in block
// order, so the result is independent of the thread count.
double parallel_indexed_sum(std::size_t n, const std::function<double(std::size_t)>& f);

// Runs body(i) for i in [0, n) across a fixed thread pool. Each index runs
// exactly once; iterations must not race on shared state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Seeded PRNG with an explicit uniform construction (53 high bits of
// mt19937_64 output), reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t bits() { return gen_(); }
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t index(std::uint64_t n);  // [0, n), rejection sampled

 private:
  std::mt19937_64 gen_;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least-squares line through (x_i, y_i).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Least-squares line through (log x_i, log y_i). Requires positive data.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

// Monotone (Fritsch-Carlson) cubic Hermite interpolant on a sorted grid.
// Never overshoots the data, which keeps interpolated kernels nonnegative
// wherever the sampled values are. Evaluation clamps to the endpoint values
// outside the grid.
class CubicInterpolant {
 public:
  CubicInterpolant() = default;
  CubicInterpolant(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  bool empty() const { return x_.empty(); }
  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }
  std::span<const double> xs() const { return x_; }
  std::span<const double> ys() const { return y_; }

 private:
  std::vector<double> x_, y_, m_;
};

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1], nodes ascending. Newton iteration on the
// Legendre polynomial; exact for polynomial degree <= 2n-1.
Quadrature gauss_legendre(int n);

// int_xi^inf rho^{-beta} e^{i a rho} d rho for beta > 1, a >= 0, xi > 0.
// a*xi >= 32 uses the integration-by-parts descent (each level gains a factor
// (beta+k)/(a xi)); smaller a*xi integrates the smooth stretch up to
// a*rho = 32 on a log grid first. Absolute error is O(1e-12 * xi^(1-beta)).
std::complex<double> osc_power_tail(double beta, double a, double xi);

// Real projections of osc_power_tail, defined for any sign of a.
double osc_tail_cos(double beta, double a, double xi);
double osc_tail_sin(double beta, double a, double xi);

// In-place forward FFT (kernel e^{-2 pi i jk/n}) for power-of-two lengths.
// Twiddles come from a per-call root table, so results are deterministic and
// accurate to a few ulp regardless of length.
void fft_pow2(std::span<std::complex<double>> a);

// Deterministic Nelder-Mead minimization from one starting simplex (x0 plus
// step-scaled unit offsets). Returns the best point; fout receives its value.
std::vector<double> nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, double step, int max_iter, double* fout);

// FNV-1a 64-bit hash, used to stamp configurations into output files.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Shortest decimal form with the given significant digits (default 12,
// the project-wide output precision).
std::string format_sig(double v, int digits = 12);

}  // namespace hylab
