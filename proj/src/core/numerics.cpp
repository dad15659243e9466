#include "core/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace hylab {

namespace {

double pairwise_range(const double* v, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_range(v, half) + pairwise_range(v + half, n - half);
}

double pairwise_fn(std::size_t lo, std::size_t n,
                   const std::function<double(std::size_t)>& f) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f(lo + i);
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_fn(lo, half, f) + pairwise_fn(lo + half, n - half, f);
}

unsigned worker_count() {
  static const unsigned n = [] {
    if (const char* env = std::getenv("HYLAB_THREADS")) {
      const long v = std::atol(env);
      if (v >= 1 && v <= 256) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return std::clamp(hw, 1u, 16u);
  }();
  return n;
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
  return pairwise_range(v.data(), v.size());
}

double indexed_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
  return pairwise_fn(0, n, f);
}

double parallel_indexed_sum(std::size_t n,
                            const std::function<double(std::size_t)>& f) {
  const unsigned workers = worker_count();
  if (workers == 1 || n < 4096) return pairwise_fn(0, n, f);
  // Block size is fixed by n alone so partial sums do not depend on the
  // number of threads.
  const std::size_t block = 2048;
  const std::size_t nblocks = (n + block - 1) / block;
  std::vector<double> partial(nblocks, 0.0);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      const std::size_t lo = b * block;
      partial[b] = pairwise_fn(lo, std::min(block, n - lo), f);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  return pairwise_range(partial.data(), partial.size());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = worker_count();
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  const unsigned use = std::min<std::size_t>(workers, n) - 1;
  for (unsigned t = 0; t < use; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
}

std::uint64_t Rng::index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    const std::uint64_t x = bits();
    if (x < limit) return x % n;
  }
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("fit_line: need >= 2 points");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return out;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("fit_loglog: data must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

CubicInterpolant::CubicInterpolant(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || n != y_.size())
    throw std::invalid_argument("CubicInterpolant: need >= 2 sorted points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw std::invalid_argument("CubicInterpolant: abscissae not increasing");
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  m_[0] = d[0];
  m_[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i)
    m_[i] = (d[i - 1] * d[i] > 0.0) ? 0.5 * (d[i - 1] + d[i]) : 0.0;
  // Fritsch-Carlson limiter keeps the interpolant monotone on each cell.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      m_[i] = m_[i + 1] = 0.0;
      continue;
    }
    const double a = m_[i] / d[i], b = m_[i + 1] / d[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double t = 3.0 / std::sqrt(s);
      m_[i] = t * a * d[i];
      m_[i + 1] = t * b * d[i];
    }
  }
}

double CubicInterpolant::operator()(double x) const {
  if (x_.empty()) throw std::logic_error("CubicInterpolant: empty");
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h * h10 * m_[i] + h01 * y_[i + 1] + h * h11 * m_[i + 1];
}

Quadrature gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

namespace {

// Descent requires a*xi large enough that (beta+k)/(a*xi) < 1 for the first
// levels. The smallest term of the descent series is ~ e^{-a xi}, so 32
// leaves the truncation remainder below 2e-13 relative to the lead term.
constexpr double kDescentThreshold = 32.0;

std::complex<double> osc_tail_descent(double beta, double a, double xi) {
  const std::complex<double> i_over_a(0.0, 1.0 / a);
  const std::complex<double> phase = std::exp(std::complex<double>(0.0, a * xi));
  std::complex<double> sum = 0.0;
  std::complex<double> coef = 1.0;  // prod_j (beta+j) * (i/a)^k accumulated
  double pw = std::pow(xi, -beta);
  for (int k = 0; k < 64; ++k) {
    const std::complex<double> term = i_over_a * coef * phase * pw;
    sum += term;
    if (std::abs(term) < 1e-17 * (1.0 + std::abs(sum))) return sum;
    coef *= -(beta + k) * i_over_a;
    pw /= xi;
    if ((beta + k) > a * xi) break;  // past the smallest term, stop
  }
  return sum;
}

}  // namespace

std::complex<double> osc_power_tail(double beta, double a, double xi) {
  if (!(beta > 1.0) || !(xi > 0.0) || a < 0.0)
    throw std::invalid_argument("osc_power_tail: need beta > 1, xi > 0, a >= 0");
  if (a == 0.0) return std::pow(xi, 1.0 - beta) / (beta - 1.0);
  if (a * xi >= kDescentThreshold) return osc_tail_descent(beta, a, xi);
  // Integrate the slowly oscillating stretch [xi, xi2] on a log grid, then
  // descend from xi2 where the phase is fast enough.
  const double xi2 = kDescentThreshold / a;
  const double t0 = std::log(xi), t1 = std::log(xi2);
  static const Quadrature gl = gauss_legendre(12);
  // Panel density set by the phase rate: a*e^t <= 32 rad per unit t.
  const int panels = std::max(8, static_cast<int>(std::ceil((t1 - t0) * 8.0)));
  std::complex<double> acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = t0 + (t1 - t0) * p / panels;
    const double hi = t0 + (t1 - t0) * (p + 1) / panels;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    std::complex<double> ps = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double t = mid + half * gl.nodes[k];
      const double rho = std::exp(t);
      ps += gl.weights[k] *
            std::exp(std::complex<double>((1.0 - beta) * t, a * rho));
    }
    acc += half * ps;
  }
  return acc + osc_tail_descent(beta, a, xi2);
}

double osc_tail_cos(double beta, double a, double xi) {
  return osc_power_tail(beta, std::abs(a), xi).real();
}

double osc_tail_sin(double beta, double a, double xi) {
  const double s = osc_power_tail(beta, std::abs(a), xi).imag();
  return a < 0.0 ? -s : s;
}

void fft_pow2(std::span<std::complex<double>> a) {
  const std::size_t n = a.size();
  if (n < 2) return;
  if ((n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  // One root table for the full length; level `len` strides it by n/len.
  const std::size_t half = n / 2;
  std::vector<std::complex<double>> roots(half);
  const double step = -2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < half; ++k) {
    const double ang = step * static_cast<double>(k);
    roots[k] = {std::cos(ang), std::sin(ang)};
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t blk = 0; blk < n; blk += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w = roots[k * stride];
        const std::complex<double> u = a[blk + k];
        const std::complex<double> t = w * a[blk + k + len / 2];
        a[blk + k] = u + t;
        a[blk + k + len / 2] = u - t;
      }
    }
  }
}

std::vector<double> nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, double step, int max_iter, double* fout) {
  const std::size_t dim = x0.size();
  struct Vertex {
    std::vector<double> x;
    double fx;
  };
  std::vector<Vertex> simplex(dim + 1);
  for (std::size_t v = 0; v <= dim; ++v) {
    simplex[v].x.assign(x0.begin(), x0.end());
    if (v > 0) simplex[v].x[v - 1] += step;
    simplex[v].fx = f(simplex[v].x);
  }
  const auto by_value = [](const Vertex& l, const Vertex& r) { return l.fx < r.fx; };

  std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
  for (int it = 0; it < max_iter; ++it) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    const Vertex& best = simplex.front();
    Vertex& worst = simplex.back();
    double spread = 0.0;
    for (std::size_t v = 1; v <= dim; ++v) spread = std::max(spread, std::abs(simplex[v].fx - best.fx));
    if (spread < 1e-14 * (1.0 + std::abs(best.fx))) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v < dim; ++v)
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(dim);

    for (std::size_t i = 0; i < dim; ++i) xr[i] = centroid[i] + (centroid[i] - worst.x[i]);
    const double fr = f(xr);
    if (fr < best.fx) {
      for (std::size_t i = 0; i < dim; ++i) xe[i] = centroid[i] + 2.0 * (centroid[i] - worst.x[i]);
      const double fe = f(xe);
      if (fe < fr) {
        worst.x = xe;
        worst.fx = fe;
      } else {
        worst.x = xr;
        worst.fx = fr;
      }
      continue;
    }
    if (fr < simplex[dim - 1].fx) {
      worst.x = xr;
      worst.fx = fr;
      continue;
    }
    const bool outside = fr < worst.fx;
    const Vertex& base = outside ? Vertex{xr, fr} : worst;
    for (std::size_t i = 0; i < dim; ++i) xc[i] = centroid[i] + 0.5 * (base.x[i] - centroid[i]);
    const double fc = f(xc);
    if (fc < base.fx) {
      worst.x = xc;
      worst.fx = fc;
      continue;
    }
    for (std::size_t v = 1; v <= dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i)
        simplex[v].x[i] = best.x[i] + 0.5 * (simplex[v].x[i] - best.x[i]);
      simplex[v].fx = f(simplex[v].x);
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), by_value);
  if (fout != nullptr) *fout = simplex.front().fx;
  return simplex.front().x;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace hylab
