#include "core/distances.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "core/numerics.hpp"

namespace hylab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::complex<double> cis(double t) { return {std::cos(t), std::sin(t)}; }

std::vector<std::pair<double, double>> as_parts(const SupportSet& e) {
  if (e.shape() == Shape::kBall)
    return {{-e.ball_radius(), e.ball_radius()}};
  return e.parts();
}

EllipsoidFit fit_interval_1d(const SupportSet& e) {
  const auto parts = as_parts(e);
  const double len = e.measure();
  const double half = 0.5 * len;

  std::vector<double> candidates;
  for (const auto& [a, b] : parts) {
    candidates.push_back(a - half);
    candidates.push_back(a + half);
    candidates.push_back(b - half);
    candidates.push_back(b + half);
  }
  double best_overlap = -1.0, best_c = 0.0;
  for (const double c : candidates) {
    double ov = 0.0;
    for (const auto& [a, b] : parts)
      ov += std::max(0.0, std::min(b, c + half) - std::max(a, c - half));
    if (ov > best_overlap) {
      best_overlap = ov;
      best_c = c;
    }
  }

  EllipsoidFit fit;
  fit.value = (2.0 * len - 2.0 * best_overlap) / len;
  fit.params.dim = 1;
  fit.params.center = {best_c, 0.0};
  fit.params.radii[0] = half;
  return fit;
}

struct RadialTable {
  std::vector<double> cos_t, sin_t, rho_sq;
  double dtheta = 0.0;
};

RadialTable radial_table(const SupportSet& e, int n) {
  RadialTable t;
  t.cos_t.resize(n);
  t.sin_t.resize(n);
  t.rho_sq.resize(n);
  t.dtheta = kTwoPi / n;
  for (int j = 0; j < n; ++j) {
    const double theta = t.dtheta * j;
    t.cos_t[j] = std::cos(theta);
    t.sin_t[j] = std::sin(theta);
    const double r = e.shape() == Shape::kBall ? e.ball_radius() : e.rho(theta);
    t.rho_sq[j] = r * r;
  }
  return t;
}

// (1/2) int |rho_E^2 - rho_Ell^2| dtheta, normalized by |E|. Parameters are
// (c1, c2, a, angle) with the minor axis pinned by volume matching. Configs
// with the origin outside the ellipse have no radial representation and are
// pushed away by a graded penalty.
double ellipse_objective(std::span<const double> p, const RadialTable& t,
                         double volume) {
  const double a = p[2];
  const double r0 = std::sqrt(volume / std::numbers::pi);
  if (!(a > 0.05 * r0) || !(a < 20.0 * r0)) return 1.0e3 + std::abs(a);
  const double b = volume / (std::numbers::pi * a);
  const double c = std::cos(p[3]), s = std::sin(p[3]);
  // Rows of M = diag(1/a, 1/b) R(-angle).
  const double m00 = c / a, m01 = s / a;
  const double m10 = -s / b, m11 = c / b;
  const double z0 = m00 * p[0] + m01 * p[1];
  const double z1 = m10 * p[0] + m11 * p[1];
  const double zn = z0 * z0 + z1 * z1;
  if (zn >= 0.98 * 0.98) return 10.0 + zn;

  const int n = static_cast<int>(t.rho_sq.size());
  std::vector<double> diff(n);
  for (int j = 0; j < n; ++j) {
    const double p0 = m00 * t.cos_t[j] + m01 * t.sin_t[j];
    const double p1 = m10 * t.cos_t[j] + m11 * t.sin_t[j];
    const double pa = p0 * p0 + p1 * p1;
    const double pb = p0 * z0 + p1 * z1;
    const double root = (pb + std::sqrt(pb * pb - pa * (zn - 1.0))) / pa;
    diff[j] = std::abs(t.rho_sq[j] - root * root);
  }
  return 0.5 * pairwise_sum(diff) * t.dtheta / volume;
}

EllipsoidFit fit_ellipse_2d(const SupportSet& e) {
  const double volume = e.measure();
  const double r0 = std::sqrt(volume / std::numbers::pi);
  const RadialTable coarse = radial_table(e, 1024);

  // Area centroid from the boundary radii, used as an alternative start.
  double cx = 0.0, cy = 0.0;
  for (std::size_t j = 0; j < coarse.rho_sq.size(); ++j) {
    const double r3 = coarse.rho_sq[j] * std::sqrt(coarse.rho_sq[j]);
    cx += r3 / 3.0 * coarse.cos_t[j] * coarse.dtheta;
    cy += r3 / 3.0 * coarse.sin_t[j] * coarse.dtheta;
  }
  cx /= volume;
  cy /= volume;

  const auto objective = [&coarse, volume](std::span<const double> p) {
    return ellipse_objective(p, coarse, volume);
  };

  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  for (const auto& [ox, oy] : {std::pair{0.0, 0.0}, std::pair{cx, cy}}) {
    for (const double fa : {0.85, 1.0, 1.2}) {
      for (const double ang : {0.0, 0.25 * std::numbers::pi}) {
        const std::vector<double> x0{ox, oy, fa * r0, ang};
        double fv = 0.0;
        const auto x = nelder_mead(objective, x0, 0.08 * r0, 240, &fv);
        if (fv < best_f) {
          best_f = fv;
          best_x = x;
        }
      }
    }
  }

  EllipsoidFit fit;
  fit.converged = best_f < 10.0;
  const RadialTable fine = radial_table(e, 4096);
  fit.value = ellipse_objective(best_x, fine, volume);
  fit.params.dim = 2;
  fit.params.center = {best_x[0], best_x[1]};
  fit.params.radii[0] = best_x[2];
  fit.params.radii[1] = volume / (std::numbers::pi * best_x[2]);
  fit.params.angle = best_x[3];
  return fit;
}

struct PhaseSamples {
  std::vector<Point> pts;
  std::vector<std::complex<double>> a;  // w e^{ig}
  std::vector<int> col;                 // x-axis cell index (d=2 factoring)
  std::vector<double> axis;
  double measure = 0.0;
};

PhaseSamples phase_samples(const TrialFunction& t) {
  const Grid g = make_grid(t, t.dim() == 1 ? 2048 : 256);
  PhaseSamples s;
  s.axis = g.axis;
  s.measure = g.measure_est;
  for (std::size_t i = 0; i < g.pts.size(); ++i) {
    if (g.w[i] == 0.0) continue;
    s.pts.push_back(g.pts[i]);
    s.a.push_back(g.w[i] * cis(g.phase[i]));
    s.col.push_back(static_cast<int>(i % g.n));
  }
  return s;
}

std::complex<double> modulated_sum(const PhaseSamples& s, Point alpha) {
  std::complex<double> acc = 0.0;
  for (std::size_t j = 0; j < s.pts.size(); ++j)
    acc += s.a[j] * cis(-(alpha[0] * s.pts[j][0] + alpha[1] * s.pts[j][1]));
  return acc;
}

double golden_max_1d(const PhaseSamples& s, double lo, double hi, double* arg) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = std::abs(modulated_sum(s, {x1, 0.0}));
  double f2 = std::abs(modulated_sum(s, {x2, 0.0}));
  for (int it = 0; it < 70; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = std::abs(modulated_sum(s, {x2, 0.0}));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = std::abs(modulated_sum(s, {x1, 0.0}));
    }
  }
  *arg = 0.5 * (a + b);
  return std::abs(modulated_sum(s, {*arg, 0.0}));
}

AffineFit affine_fit_1d(const PhaseSamples& s) {
  const double span = 48.0, step = 0.25;
  const int nk = static_cast<int>(2.0 * span / step) + 1;
  int best_k = 0;
  double best_f = -1.0;
  for (int k = 0; k < nk; ++k) {
    const double alpha = -span + k * step;
    const double f = std::abs(modulated_sum(s, {alpha, 0.0}));
    if (f > best_f) {
      best_f = f;
      best_k = k;
    }
  }
  const double coarse_alpha = -span + best_k * step;
  double alpha = 0.0;
  const double f =
      golden_max_1d(s, coarse_alpha - step, coarse_alpha + step, &alpha);

  AffineFit fit;
  fit.converged = best_k != 0 && best_k != nk - 1;
  fit.alpha = {alpha, 0.0};
  fit.b = std::arg(modulated_sum(s, fit.alpha));
  fit.value = std::sqrt(std::max(0.0, 2.0 * s.measure - 2.0 * f));
  return fit;
}

AffineFit affine_fit_2d(const PhaseSamples& s) {
  const double span = 16.0, step = 0.5;
  const int nk = static_cast<int>(2.0 * span / step) + 1;

  // T(alpha) factors through per-column partial sums, so the coarse scan is
  // two cheap passes instead of one quadratic one.
  const std::size_t ncols = s.axis.size();
  std::vector<std::complex<double>> inner(ncols * nk, 0.0);
  for (std::size_t j = 0; j < s.pts.size(); ++j) {
    for (int k2 = 0; k2 < nk; ++k2) {
      const double a2 = -span + k2 * step;
      inner[static_cast<std::size_t>(s.col[j]) * nk + k2] +=
          s.a[j] * cis(-a2 * s.pts[j][1]);
    }
  }
  double best_f = -1.0;
  Point best_alpha{0.0, 0.0};
  bool interior = true;
  std::vector<std::complex<double>> colph(ncols);
  for (int k1 = 0; k1 < nk; ++k1) {
    const double a1 = -span + k1 * step;
    for (std::size_t c = 0; c < ncols; ++c) colph[c] = cis(-a1 * s.axis[c]);
    for (int k2 = 0; k2 < nk; ++k2) {
      std::complex<double> acc = 0.0;
      for (std::size_t c = 0; c < ncols; ++c)
        acc += inner[c * nk + k2] * colph[c];
      const double f = std::abs(acc);
      if (f > best_f) {
        best_f = f;
        best_alpha = {a1, -span + k2 * step};
        interior = k1 != 0 && k1 != nk - 1 && k2 != 0 && k2 != nk - 1;
      }
    }
  }

  const auto neg = [&s](std::span<const double> p) {
    return -std::abs(modulated_sum(s, {p[0], p[1]}));
  };
  double fneg = 0.0;
  const auto x = nelder_mead(neg, std::vector<double>{best_alpha[0], best_alpha[1]},
                             0.5 * step, 200, &fneg);

  AffineFit fit;
  fit.converged = interior;
  fit.alpha = {x[0], x[1]};
  fit.b = std::arg(modulated_sum(s, fit.alpha));
  fit.value = std::sqrt(std::max(0.0, 2.0 * s.measure + 2.0 * fneg));
  return fit;
}

}  // namespace

double EllipsoidParams::volume() const {
  if (dim == 1) return 2.0 * radii[0];
  return std::numbers::pi * radii[0] * radii[1];
}

AffineMap EllipsoidParams::map_from_ball() const {
  if (dim == 1) return AffineMap::line(radii[0], center[0]);
  const double c = std::cos(angle), s = std::sin(angle);
  AffineMap m = AffineMap::linear2(radii[0] * c, -radii[1] * s,
                                   radii[0] * s, radii[1] * c);
  m.v[0] = center[0];
  m.v[1] = center[1];
  return m;
}

EllipsoidFit dist_ellipsoids(const SupportSet& e) {
  if (e.dim() == 1) return fit_interval_1d(e);
  return fit_ellipse_2d(e);
}

AffineFit dist_affine_modulation(const TrialFunction& t) {
  if (t.linear_phase()) {
    AffineFit fit;
    fit.alpha = t.phase_slope();
    fit.b = t.phase_offset();
    return fit;
  }
  const PhaseSamples s = phase_samples(t);
  if (s.pts.empty()) throw std::invalid_argument("dist_affine_modulation: empty support");
  return t.dim() == 1 ? affine_fit_1d(s) : affine_fit_2d(s);
}

}  // namespace hylab
