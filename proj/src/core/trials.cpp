#include "core/trials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "core/numerics.hpp"
#include "core/transforms.hpp"

namespace hylab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double stable_sinc(double z) {
  if (std::abs(z) < 1e-4) {
    const double z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

std::complex<double> cis(double t) { return {std::cos(t), std::sin(t)}; }

// phi(z) = int_0^1 e^{-izt} t dt; the closed form loses accuracy below
// |z| ~ 1 where the series is exact to machine precision.
std::complex<double> lower_exp_moment(double z) {
  if (std::abs(z) <= 1.0) {
    std::complex<double> term(0.5, 0.0);
    std::complex<double> sum = term;
    const std::complex<double> miz(0.0, -z);
    for (int k = 1; k < 24; ++k) {
      term *= miz * ((k + 1.0) / (k * (k + 2.0)));
      sum += term;
      if (std::abs(term) < 1e-18) break;
    }
    return sum;
  }
  const std::complex<double> e = cis(-z);
  return (1.0 - e * std::complex<double>(1.0, z)) / (z * z);
}

}  // namespace

AffineMap AffineMap::identity(int d) {
  AffineMap a;
  a.dim = d;
  return a;
}

AffineMap AffineMap::line(double a0, double b0) {
  if (a0 == 0.0) throw std::invalid_argument("AffineMap::line: singular");
  AffineMap a;
  a.dim = 1;
  a.m[0][0] = a0;
  a.v[0] = b0;
  return a;
}

AffineMap AffineMap::linear2(double a00, double a01, double a10, double a11) {
  AffineMap a;
  a.dim = 2;
  a.m[0][0] = a00;
  a.m[0][1] = a01;
  a.m[1][0] = a10;
  a.m[1][1] = a11;
  if (a.det() == 0.0) throw std::invalid_argument("AffineMap::linear2: singular");
  return a;
}

AffineMap AffineMap::rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return linear2(c, -s, s, c);
}

double AffineMap::det() const {
  return dim == 1 ? m[0][0] : m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

AffineMap AffineMap::inverse() const {
  const double d = det();
  if (d == 0.0) throw std::invalid_argument("AffineMap::inverse: singular");
  AffineMap out;
  out.dim = dim;
  if (dim == 1) {
    out.m[0][0] = 1.0 / m[0][0];
    out.v[0] = -v[0] / m[0][0];
    return out;
  }
  out.m[0][0] = m[1][1] / d;
  out.m[0][1] = -m[0][1] / d;
  out.m[1][0] = -m[1][0] / d;
  out.m[1][1] = m[0][0] / d;
  out.v[0] = -(out.m[0][0] * v[0] + out.m[0][1] * v[1]);
  out.v[1] = -(out.m[1][0] * v[0] + out.m[1][1] * v[1]);
  return out;
}

Point AffineMap::operator()(Point x) const {
  if (dim == 1) return {m[0][0] * x[0] + v[0], 0.0};
  return {m[0][0] * x[0] + m[0][1] * x[1] + v[0],
          m[1][0] * x[0] + m[1][1] * x[1] + v[1]};
}

SupportSet SupportSet::ball(int d, double radius) {
  if (d != 1 && d != 2) throw std::invalid_argument("SupportSet: dim 1 or 2");
  if (!(radius > 0.0)) throw std::invalid_argument("SupportSet: radius > 0");
  SupportSet e;
  e.dim_ = d;
  e.shape_ = Shape::kBall;
  e.radius_ = radius;
  e.rho_max_ = radius;
  return e;
}

SupportSet SupportSet::intervals(std::vector<std::pair<double, double>> parts) {
  if (parts.empty()) throw std::invalid_argument("SupportSet: empty union");
  for (auto& [a, b] : parts) {
    if (a > b) std::swap(a, b);
    if (a == b) throw std::invalid_argument("SupportSet: degenerate interval");
  }
  std::sort(parts.begin(), parts.end());
  std::vector<std::pair<double, double>> merged{parts.front()};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, parts[i].second);
    else
      merged.push_back(parts[i]);
  }
  SupportSet e;
  e.dim_ = 1;
  e.shape_ = Shape::kIntervals;
  e.iv_ = std::move(merged);
  return e;
}

SupportSet SupportSet::radial_modes(double base,
                                    std::span<const std::array<double, 3>> modes) {
  if (!(base > 0.0)) throw std::invalid_argument("SupportSet: base > 0");
  double swing = 0.0;
  std::vector<std::array<double, 3>> ms(modes.begin(), modes.end());
  for (const auto& m : ms) swing += std::abs(m[1]);
  if (!(swing < 1.0))
    throw std::invalid_argument("SupportSet: radial modes exceed the base radius");
  return radial_fn([base, ms = std::move(ms)](double theta) {
    double r = 1.0;
    for (const auto& m : ms) r += m[1] * std::cos(m[0] * theta + m[2]);
    return base * r;
  });
}

SupportSet SupportSet::radial_fn(std::function<double(double)> rho) {
  constexpr int kAngles = 8192;
  std::vector<double> theta(kAngles + 1), r(kAngles + 1);
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= kAngles; ++j) {
    theta[j] = kTwoPi * j / kAngles;
    r[j] = rho(theta[j]);
    if (!(r[j] > 0.0)) throw std::invalid_argument("SupportSet: rho must stay positive");
    hi = std::max(hi, r[j]);
    lo = std::min(lo, r[j]);
  }
  double slope = 0.0;
  for (int j = 0; j < kAngles; ++j)
    slope = std::max(slope, std::abs(r[j + 1] - r[j]) * kAngles / kTwoPi);
  SupportSet e;
  e.dim_ = 2;
  e.shape_ = Shape::kRadialBoundary;
  e.rho_ = [table = CubicInterpolant(std::move(theta), std::move(r))](double t) {
    double w = std::fmod(t, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return table(w);
  };
  e.rho_max_ = hi * 1.0000001;
  e.rho_min_ = lo * 0.9999999;
  // Factor 2 covers cubic overshoot between samples.
  e.rho_lip_ = 2.0 * slope;
  return e;
}

double SupportSet::measure() const {
  switch (shape_) {
    case Shape::kBall:
      return unit_ball_volume(dim_) * std::pow(radius_, dim_);
    case Shape::kIntervals: {
      double s = 0.0;
      for (const auto& [a, b] : iv_) s += b - a;
      return s;
    }
    case Shape::kRadialBoundary: {
      const int n = 8192;
      std::vector<double> vals(n);
      for (int j = 0; j < n; ++j) {
        const double r = rho_(kTwoPi * j / n);
        vals[j] = 0.5 * r * r;
      }
      return pairwise_sum(vals) * kTwoPi / n;
    }
  }
  return 0.0;
}

bool SupportSet::contains(Point x) const {
  switch (shape_) {
    case Shape::kBall:
      return (dim_ == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1])) <= radius_;
    case Shape::kIntervals:
      for (const auto& [a, b] : iv_)
        if (x[0] >= a && x[0] <= b) return true;
      return false;
    case Shape::kRadialBoundary: {
      const double r = std::hypot(x[0], x[1]);
      if (r == 0.0) return true;
      return r <= rho_(std::atan2(x[1], x[0]));
    }
  }
  return false;
}

double SupportSet::bounding_radius() const {
  switch (shape_) {
    case Shape::kBall:
      return radius_;
    case Shape::kIntervals: {
      double r = 0.0;
      for (const auto& [a, b] : iv_) r = std::max({r, std::abs(a), std::abs(b)});
      return r;
    }
    case Shape::kRadialBoundary:
      return rho_max_;
  }
  return 0.0;
}

double SupportSet::inner_radius() const {
  switch (shape_) {
    case Shape::kBall:
      return radius_;
    case Shape::kIntervals:
      return 0.0;
    case Shape::kRadialBoundary:
      return rho_min_;
  }
  return 0.0;
}

double SupportSet::sym_diff_ball() const {
  switch (shape_) {
    case Shape::kBall:
      return unit_ball_volume(dim_) * std::abs(std::pow(radius_, dim_) - 1.0);
    case Shape::kIntervals: {
      double inter = 0.0, total = 0.0;
      for (const auto& [a, b] : iv_) {
        total += b - a;
        inter += std::max(0.0, std::min(b, 1.0) - std::max(a, -1.0));
      }
      return total + 2.0 - 2.0 * inter;
    }
    case Shape::kRadialBoundary: {
      const int n = 8192;
      std::vector<double> vals(n);
      for (int j = 0; j < n; ++j) {
        const double r = rho_(kTwoPi * j / n);
        vals[j] = 0.5 * std::abs(r * r - 1.0);
      }
      return pairwise_sum(vals) * kTwoPi / n;
    }
  }
  return 0.0;
}

SupportSet SupportSet::apply_affine(const AffineMap& a) const {
  if (a.dim != dim_) throw std::invalid_argument("apply_affine: dimension mismatch");
  if (dim_ == 1) {
    std::vector<std::pair<double, double>> parts;
    if (shape_ == Shape::kBall)
      parts = {{a({-radius_, 0.0})[0], a({radius_, 0.0})[0]}};
    else
      for (const auto& [lo, hi] : iv_)
        parts.emplace_back(a({lo, 0.0})[0], a({hi, 0.0})[0]);
    return intervals(std::move(parts));
  }
  if (a.v[0] != 0.0 || a.v[1] != 0.0)
    throw std::invalid_argument(
        "apply_affine: translations of star-shaped sets are not supported");
  const AffineMap inv = a.inverse();
  if (shape_ == Shape::kBall) {
    const double r0 = radius_;
    return radial_fn([inv, r0](double theta) {
      const Point w = inv({std::cos(theta), std::sin(theta)});
      return r0 / std::hypot(w[0], w[1]);
    });
  }
  if (shape_ != Shape::kRadialBoundary)
    throw std::invalid_argument("apply_affine: unsupported shape");
  const auto rho0 = rho_;
  return radial_fn([inv, rho0](double theta) {
    const Point w = inv({std::cos(theta), std::sin(theta)});
    const double wn = std::hypot(w[0], w[1]);
    return rho0(std::atan2(w[1], w[0])) / wn;
  });
}

TrialFunction TrialFunction::indicator(SupportSet e) { return TrialFunction(std::move(e)); }

TrialFunction TrialFunction::with_modulus(FieldFn f) const {
  TrialFunction t(*this);
  t.f_ = std::move(f);
  t.mod_kind_ = ModKind::kGeneral;
  return t;
}

TrialFunction TrialFunction::with_phase(FieldFn g) const {
  TrialFunction t(*this);
  t.g_ = std::move(g);
  t.phase_kind_ = PhaseKind::kGeneral;
  return t;
}

TrialFunction TrialFunction::with_constant_modulus(double c) const {
  if (!(c >= 0.0)) throw std::invalid_argument("with_constant_modulus: c >= 0");
  TrialFunction t(*this);
  t.f_ = nullptr;
  t.mod_kind_ = c == 1.0 ? ModKind::kUnit : ModKind::kConstant;
  t.mod_value_ = c;
  return t;
}

TrialFunction TrialFunction::with_linear_phase(Point alpha, double beta) const {
  TrialFunction t(*this);
  t.g_ = nullptr;
  const bool zero = alpha[0] == 0.0 && alpha[1] == 0.0 && beta == 0.0;
  t.phase_kind_ = zero ? PhaseKind::kZero : PhaseKind::kLinear;
  t.slope_ = alpha;
  t.offset_ = beta;
  return t;
}

double TrialFunction::modulus_at(Point x) const {
  return mod_kind_ == ModKind::kGeneral ? f_(x) : mod_value_;
}

double TrialFunction::phase_at(Point x) const {
  switch (phase_kind_) {
    case PhaseKind::kZero:
      return 0.0;
    case PhaseKind::kLinear:
      return slope_[0] * x[0] + slope_[1] * x[1] + offset_;
    case PhaseKind::kGeneral:
      return g_(x);
  }
  return 0.0;
}

TrialFunction TrialFunction::precompose(const AffineMap& a) const {
  TrialFunction t(*this);
  t.support_ = support_.apply_affine(a);
  const AffineMap inv = a.inverse();
  if (mod_kind_ == ModKind::kGeneral) {
    t.f_ = [inv, f = f_](Point x) { return f(inv(x)); };
  }
  if (phase_kind_ == PhaseKind::kLinear) {
    // alpha . (M^{-1} x + c) + beta stays linear with slope M^{-T} alpha.
    t.slope_ = {inv.m[0][0] * slope_[0] + inv.m[1][0] * slope_[1],
                inv.m[0][1] * slope_[0] + inv.m[1][1] * slope_[1]};
    t.offset_ = offset_ + slope_[0] * inv.v[0] + slope_[1] * inv.v[1];
  } else if (phase_kind_ == PhaseKind::kGeneral) {
    t.g_ = [inv, g = g_](Point x) { return g(inv(x)); };
  }
  return t;
}

namespace {

// Fraction of [lo, hi] covered by the interval union (d=1 sets only).
double overlap_1d(const SupportSet& e, double lo, double hi) {
  double cov = 0.0;
  if (e.shape() == Shape::kBall) {
    cov = std::max(0.0, std::min(hi, e.ball_radius()) - std::max(lo, -e.ball_radius()));
  } else {
    for (const auto& [a, b] : e.parts())
      cov += std::max(0.0, std::min(hi, b) - std::max(lo, a));
  }
  return cov / (hi - lo);
}

double coverage_2d(const SupportSet& e, double cx, double cy, double h) {
  const double half = 0.5 * h;
  const double diag = half * std::numbers::sqrt2;
  const double r = std::hypot(cx, cy);
  if (r + diag <= e.inner_radius()) return 1.0;
  if (r - diag >= e.bounding_radius()) return 0.0;

  // Star-shaped boundaries admit an exact cell classification: the radius
  // swing across the cell is bounded by the slope bound times the subtended
  // angle, so only cells the curve actually crosses get subsampled.
  if (e.shape() == Shape::kRadialBoundary && r > 2.0 * diag) {
    const double swing = e.radial_slope_bound() * 1.2 * diag / r;
    const double rho_c = e.rho(std::atan2(cy, cx));
    if (r + diag <= rho_c - swing) return 1.0;
    if (r - diag >= rho_c + swing) return 0.0;
  }

  // 32x32 midpoint subsample keeps the boundary staircase noise well under
  // the frequency-side error estimates it feeds.
  constexpr int kSub = 32;
  int inside = 0;
  for (int a = 0; a < kSub; ++a)
    for (int b = 0; b < kSub; ++b) {
      const double x = cx - half + (a + 0.5) * h / kSub;
      const double y = cy - half + (b + 0.5) * h / kSub;
      if (e.contains({x, y})) ++inside;
    }
  return inside / double(kSub * kSub);
}

}  // namespace

Grid make_grid(const TrialFunction& t, int n, double box) {
  Grid g;
  g.dim = t.dim();
  g.n = n > 0 ? n : (g.dim == 1 ? 4096 : 256);
  g.box = box > 0.0 ? box : std::max(t.support().bounding_radius(), 1.0);
  if (t.support().bounding_radius() > g.box * (1.0 + 1e-12))
    throw std::invalid_argument("make_grid: box does not cover the support");
  g.h = 2.0 * g.box / g.n;
  g.reliable_freq = 0.25 / g.h;
  g.axis.resize(g.n);
  for (int i = 0; i < g.n; ++i) g.axis[i] = -g.box + (i + 0.5) * g.h;

  const std::size_t cells = g.dim == 1 ? g.n : static_cast<std::size_t>(g.n) * g.n;
  g.pts.resize(cells);
  g.cov.resize(cells);
  g.w.resize(cells);
  g.mod = std::vector<double>(cells, 1.0);
  g.phase = std::vector<double>(cells, 0.0);
  g.val.resize(cells);

  const auto& e = t.support();
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      g.pts[i] = {g.axis[i], 0.0};
      g.cov[i] = overlap_1d(e, g.axis[i] - 0.5 * g.h, g.axis[i] + 0.5 * g.h);
    }
  } else {
    parallel_for(g.n, [&](std::size_t row) {
      for (int col = 0; col < g.n; ++col) {
        const std::size_t i = row * g.n + col;
        g.pts[i] = {g.axis[col], g.axis[row]};
        g.cov[i] = coverage_2d(e, g.axis[col], g.axis[row], g.h);
      }
    });
  }
  const double cell = std::pow(g.h, g.dim);
  for (std::size_t i = 0; i < cells; ++i) {
    g.w[i] = cell * g.cov[i];
    if (g.cov[i] > 0.0) {
      g.mod[i] = t.modulus_at(g.pts[i]);
      g.phase[i] = t.phase_at(g.pts[i]);
    }
    g.val[i] = g.mod[i] * cis(g.phase[i]);
  }
  g.measure_est = pairwise_sum(g.w);
  return g;
}

std::vector<double> ball_coverage(const Grid& g) {
  std::vector<double> cov(g.pts.size());
  const SupportSet b = SupportSet::ball(g.dim);
  if (g.dim == 1) {
    for (std::size_t i = 0; i < cov.size(); ++i)
      cov[i] = overlap_1d(b, g.pts[i][0] - 0.5 * g.h, g.pts[i][0] + 0.5 * g.h);
  } else {
    for (std::size_t i = 0; i < cov.size(); ++i)
      cov[i] = coverage_2d(b, g.pts[i][0], g.pts[i][1], g.h);
  }
  return cov;
}

std::complex<double> trial_transform(const Grid& g, Point xi, TransformDiag* diag) {
  if (diag) {
    diag->reliable_freq = g.reliable_freq;
    diag->beyond_reliable = std::max(std::abs(xi[0]), std::abs(xi[1])) > g.reliable_freq;
  }
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < g.pts.size(); ++i) {
    if (g.w[i] == 0.0) continue;
    const double phase = -kTwoPi * (g.pts[i][0] * xi[0] + g.pts[i][1] * xi[1]);
    acc += g.w[i] * g.val[i] * cis(phase);
  }
  return acc;
}

void transform_line(const Grid& g, Point u, double xi0, double dxi,
                    std::span<std::complex<double>> out) {
  const std::size_t nk = out.size();
  const std::size_t cells = g.pts.size();
  const std::size_t block = 1024;
  const std::size_t nblocks = (cells + block - 1) / block;
  std::vector<std::vector<std::complex<double>>> partial(
      nblocks, std::vector<std::complex<double>>(nk, 0.0));
  parallel_for(nblocks, [&](std::size_t b) {
    auto& acc = partial[b];
    const std::size_t lo = b * block, hi = std::min(cells, lo + block);
    for (std::size_t i = lo; i < hi; ++i) {
      if (g.w[i] == 0.0) continue;
      const double base = -kTwoPi * (g.pts[i][0] * u[0] + g.pts[i][1] * u[1]);
      const std::complex<double> c = g.w[i] * g.val[i];
      std::complex<double> phase = cis(base * xi0);
      const std::complex<double> step = cis(base * dxi);
      for (std::size_t k = 0; k < nk; ++k) {
        acc[k] += c * phase;
        phase *= step;
      }
    }
  });
  std::fill(out.begin(), out.end(), std::complex<double>(0.0, 0.0));
  for (std::size_t b = 0; b < nblocks; ++b)
    for (std::size_t k = 0; k < nk; ++k) out[k] += partial[b][k];
}

std::complex<double> interval_transform(const SupportSet& e, double xi) {
  if (e.dim() != 1) throw std::invalid_argument("interval_transform: d=1 only");
  std::vector<std::pair<double, double>> parts;
  if (e.shape() == Shape::kBall)
    parts = {{-e.ball_radius(), e.ball_radius()}};
  else
    parts = e.parts();
  std::complex<double> acc = 0.0;
  for (const auto& [a, b] : parts) {
    const double len = b - a, mid = 0.5 * (a + b);
    acc += len * stable_sinc(std::numbers::pi * len * xi) * cis(-kTwoPi * mid * xi);
  }
  return acc;
}

std::complex<double> support_transform_2d(const SupportSet& e, Point xi) {
  if (e.dim() != 2) throw std::invalid_argument("support_transform_2d: d=2 only");
  const double s = std::hypot(xi[0], xi[1]);
  const double phi_xi = (s == 0.0) ? 0.0 : std::atan2(xi[1], xi[0]);
  const double bandwidth = kTwoPi * s * e.bounding_radius();
  int ntheta = static_cast<int>(
      2.0 * (bandwidth + 12.0 * std::cbrt(bandwidth + 1.0) + 16.0));
  ntheta = std::max(256, (ntheta + 7) / 8 * 8);
  std::vector<double> re(ntheta), im(ntheta);
  for (int j = 0; j < ntheta; ++j) {
    const double theta = kTwoPi * j / ntheta;
    const double r = e.shape() == Shape::kBall ? e.ball_radius() : e.rho(theta);
    const double a = kTwoPi * s * std::cos(theta - phi_xi);
    const std::complex<double> v = r * r * lower_exp_moment(a * r);
    re[j] = v.real();
    im[j] = v.imag();
  }
  const double scale = kTwoPi / ntheta;
  return {scale * pairwise_sum(re), scale * pairwise_sum(im)};
}

}  // namespace hylab
