#include "core/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "core/kernels.hpp"

namespace hylab {
namespace {

using Fn1 = std::function<double(double)>;

// Closed-form kernels at q = 4, d = 1: L is the two-fold and K the
// three-fold convolution power of the unit-interval indicator.
double l4(double r) {
  r = std::abs(r);
  return r < 2.0 ? 2.0 - r : 0.0;
}

double k4(double r) {
  r = std::abs(r);
  if (r < 1.0) return 3.0 - r * r;
  if (r < 3.0) return 0.5 * (3.0 - r) * (3.0 - r);
  return 0.0;
}

bool closed_form_case(double q, int d) { return d == 1 && q == 4.0; }

int default_pair_n(int d) { return d == 1 ? 2048 : 64; }

struct QuadTerms {
  double linear = 0.0;   // <K, Re h>, without the q factor
  double im_sum = 0.0;   // <Im h, Im h>+
  double im_diff = 0.0;  // <Im h, Im h>-
  double re_sum = 0.0;   // <Re h, Re h>+
  double re_diff = 0.0;  // <Re h, Re h>-
  double h_pow = 0.0;    // integral of |h|^{q'}
};

// ---------------------------------------------------------------------------
// Segment route: d = 1 interval supports with smooth fields. All integrals
// are Gauss panels whose edges include every kink (segment corners and the
// kernel's breakpoints), so the accuracy is set by machine precision, not by
// a lattice pitch. Only wired for q = 4 where K and L have closed forms.

struct Segment {
  double lo = 0.0, hi = 0.0;
  bool in_e = false, in_b = false;
};

std::vector<std::pair<double, double>> interval_parts(const SupportSet& e) {
  if (e.shape() == Shape::kIntervals) return e.parts();
  const double r = e.ball_radius();
  return {{-r, r}};
}

std::vector<Segment> build_segments(const TrialFunction& t) {
  const auto parts = interval_parts(t.support());
  std::vector<double> cuts{-1.0, 1.0};
  for (const auto& [a, b] : parts) {
    cuts.push_back(a);
    cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < 1e-14; }),
             cuts.end());
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Segment s{cuts[i], cuts[i + 1], false, false};
    if (s.hi - s.lo < 1e-14) continue;
    const double mid = 0.5 * (s.lo + s.hi);
    for (const auto& [a, b] : parts) s.in_e = s.in_e || (mid > a && mid < b);
    s.in_b = std::abs(mid) < 1.0;
    if (s.in_e || s.in_b) segs.push_back(s);
  }
  return segs;
}

Fn1 segment_re(const TrialFunction& t, const Segment& s) {
  const double drop = s.in_b ? 1.0 : 0.0;
  if (!s.in_e) return [drop](double) { return -drop; };
  return [&t, drop](double x) {
    const Point p{x, 0.0};
    return t.modulus_at(p) * std::cos(t.phase_at(p)) - drop;
  };
}

Fn1 segment_im(const TrialFunction& t, const Segment& s) {
  if (!s.in_e) return [](double) { return 0.0; };
  return [&t](double x) {
    const Point p{x, 0.0};
    return t.modulus_at(p) * std::sin(t.phase_at(p));
  };
}

// Gauss panels over [lo, hi], split at the interior cut points and capped at
// the given width.
double panel_integral(double lo, double hi, std::span<const double> cuts,
                      double width, const Quadrature& gl, const Fn1& f) {
  if (hi - lo <= 0.0) return 0.0;
  std::vector<double> edges{lo, hi};
  for (double c : cuts)
    if (c > lo + 1e-14 && c < hi - 1e-14) edges.push_back(c);
  std::sort(edges.begin(), edges.end());
  std::vector<double> partial;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const int np =
        std::max(1, static_cast<int>(std::ceil((edges[i + 1] - edges[i]) / width)));
    const double hp = (edges[i + 1] - edges[i]) / np;
    for (int p = 0; p < np; ++p) {
      const double c = edges[i] + (p + 0.5) * hp;
      double acc = 0.0;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k)
        acc += gl.weights[k] * f(c + 0.5 * hp * gl.nodes[k]);
      partial.push_back(0.5 * hp * acc);
    }
  }
  return pairwise_sum(partial);
}

// integral over A x B of u(x) v(y) L(x + sign y), rotated to s = x + sign y
// so the kernel's kinks become vertical panel edges. The inner x-range is
// linear in s between the corner cuts.
double segment_pair(const Segment& A, const Segment& B, int sign, const Fn1& u,
                    const Fn1& v, const Fn1& L, double width,
                    const Quadrature& outer, const Quadrature& inner) {
  const double a1 = A.lo, b1 = A.hi;
  const double a2 = sign > 0 ? B.lo : -B.hi;
  const double b2 = sign > 0 ? B.hi : -B.lo;
  const double slo = a1 + a2, shi = b1 + b2;
  std::vector<double> cuts{a1 + b2, b1 + a2, -2.0, 0.0, 2.0};
  const auto cross = [&](double s) {
    const double xlo = std::max(a1, s - b2);
    const double xhi = std::min(b1, s - a2);
    if (xhi <= xlo) return 0.0;
    const double c = 0.5 * (xlo + xhi), hw = 0.5 * (xhi - xlo);
    double acc = 0.0;
    for (std::size_t k = 0; k < inner.nodes.size(); ++k) {
      const double x = c + hw * inner.nodes[k];
      acc += inner.weights[k] * u(x) * v(sign * (s - x));
    }
    return hw * acc * L(s);
  };
  return panel_integral(slo, shi, cuts, width, outer, cross);
}

QuadTerms segment_terms(const TrialFunction& t, double q, int n_gauss) {
  const auto segs = build_segments(t);
  const Quadrature gl = gauss_legendre(n_gauss);
  const double width = n_gauss >= 12 ? 0.25 : 0.375;
  const double qp = q / (q - 1.0);
  const std::vector<double> kcuts{-3.0, -1.0, 1.0, 3.0};
  const bool no_im = t.zero_phase();

  std::vector<Fn1> re(segs.size()), im(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    re[i] = segment_re(t, segs[i]);
    im[i] = segment_im(t, segs[i]);
  }

  QuadTerms out;
  std::vector<double> lin, hp;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    lin.push_back(panel_integral(
        segs[i].lo, segs[i].hi, kcuts, width, gl,
        [&](double x) { return k4(x) * re[i](x); }));
    hp.push_back(panel_integral(
        segs[i].lo, segs[i].hi, kcuts, width, gl, [&](double x) {
          const double a = re[i](x), b = im[i](x);
          return std::pow(a * a + b * b, 0.5 * qp);
        }));
  }
  out.linear = pairwise_sum(lin);
  out.h_pow = pairwise_sum(hp);

  std::vector<double> rs, rd, is, id;
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (std::size_t j = 0; j < segs.size(); ++j) {
      rs.push_back(segment_pair(segs[i], segs[j], +1, re[i], re[j], l4, width,
                                gl, gl));
      rd.push_back(segment_pair(segs[i], segs[j], -1, re[i], re[j], l4, width,
                                gl, gl));
      if (!no_im) {
        is.push_back(segment_pair(segs[i], segs[j], +1, im[i], im[j], l4,
                                  width, gl, gl));
        id.push_back(segment_pair(segs[i], segs[j], -1, im[i], im[j], l4,
                                  width, gl, gl));
      }
    }
  out.re_sum = pairwise_sum(rs);
  out.re_diff = pairwise_sum(rd);
  out.im_sum = no_im ? 0.0 : pairwise_sum(is);
  out.im_diff = no_im ? 0.0 : pairwise_sum(id);
  return out;
}

// ---------------------------------------------------------------------------
// Grid route: coverage-weighted midpoint samples on a shared lattice. Both
// pairings reduce to kernel lookups on the sum and difference lattices, so
// the double sum is O(active^2) with O(n) kernel evaluations.

struct GridFields {
  Grid grid;
  std::vector<double> re, im;     // coverage-weighted samples
  std::vector<std::size_t> live;  // cells where either field is nonzero
};

GridFields make_fields(const TrialFunction& t, int n, double box) {
  GridFields f;
  f.grid = make_grid(t, n, box);
  const Grid gb = make_grid(TrialFunction::indicator(SupportSet::ball(t.dim())),
                            n, f.grid.box);
  const std::size_t m = f.grid.pts.size();
  f.re.resize(m);
  f.im.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    f.re[i] = f.grid.cov[i] * f.grid.mod[i] * std::cos(f.grid.phase[i]) -
              gb.cov[i];
    f.im[i] = f.grid.cov[i] * f.grid.mod[i] * std::sin(f.grid.phase[i]);
    if (f.re[i] != 0.0 || f.im[i] != 0.0) f.live.push_back(i);
  }
  return f;
}

// L on the lattice of center sums (index j + k along each axis) and center
// differences (index |j - k|).
struct LatticeKernel {
  int n = 0, dim = 1;
  std::vector<double> sum, diff;

  double at_sum(std::size_t a, std::size_t b) const {
    if (dim == 1) return sum[a + b];
    const std::size_t w = 2 * static_cast<std::size_t>(n) - 1;
    const std::size_t ra = a / n, rb = b / n;
    return sum[(ra + rb) * w + (a % n + b % n)];
  }
  double at_diff(std::size_t a, std::size_t b) const {
    if (dim == 1) return diff[a >= b ? a - b : b - a];
    const std::size_t ra = a / n, rb = b / n;
    const std::size_t dr = ra >= rb ? ra - rb : rb - ra;
    const std::size_t ca = a % n, cb = b % n;
    return diff[dr * n + (ca >= cb ? ca - cb : cb - ca)];
  }
};

LatticeKernel make_lattice(const Grid& g, const Fn1& L) {
  LatticeKernel lk;
  lk.n = g.n;
  lk.dim = g.dim;
  const std::size_t n = static_cast<std::size_t>(g.n);
  if (g.dim == 1) {
    lk.sum.resize(2 * n - 1);
    lk.diff.resize(n);
    for (std::size_t m = 0; m < lk.sum.size(); ++m)
      lk.sum[m] = L(std::abs(-2.0 * g.box + (m + 1.0) * g.h));
    for (std::size_t m = 0; m < n; ++m) lk.diff[m] = L(m * g.h);
  } else {
    const std::size_t w = 2 * n - 1;
    lk.sum.resize(w * w);
    lk.diff.resize(n * n);
    for (std::size_t a = 0; a < w; ++a)
      for (std::size_t b = 0; b < w; ++b) {
        const double y = -2.0 * g.box + (a + 1.0) * g.h;
        const double x = -2.0 * g.box + (b + 1.0) * g.h;
        lk.sum[a * w + b] = L(std::hypot(x, y));
      }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        lk.diff[a * n + b] = L(std::hypot(b * g.h, a * g.h));
  }
  return lk;
}

// <u, u>+ and <u, u>- by the symmetric half of the double sum. Row partials
// keep the reduction order fixed.
std::pair<double, double> lattice_pair(std::span<const double> u,
                                       const GridFields& f,
                                       const LatticeKernel& lk) {
  const auto& live = f.live;
  std::vector<double> rows_s(live.size()), rows_d(live.size());
  for (std::size_t ii = 0; ii < live.size(); ++ii) {
    const std::size_t a = live[ii];
    if (u[a] == 0.0) continue;
    double accs = 0.5 * u[a] * u[a] * lk.at_sum(a, a);
    double accd = 0.5 * u[a] * u[a] * lk.at_diff(a, a);
    for (std::size_t jj = ii + 1; jj < live.size(); ++jj) {
      const std::size_t b = live[jj];
      const double uv = u[a] * u[b];
      accs += uv * lk.at_sum(a, b);
      accd += uv * lk.at_diff(a, b);
    }
    rows_s[ii] = accs;
    rows_d[ii] = accd;
  }
  const double cell = std::pow(f.grid.h, f.grid.dim);
  return {2.0 * cell * cell * pairwise_sum(rows_s),
          2.0 * cell * cell * pairwise_sum(rows_d)};
}

QuadTerms grid_terms(const TrialFunction& t, double q, int n, double box,
                     const Kernel& kk, const Kernel& ll) {
  const GridFields f = make_fields(t, n, box);
  const Fn1 lfn = [&ll](double r) { return ll(r); };
  const LatticeKernel lk = make_lattice(f.grid, lfn);
  const double cell = std::pow(f.grid.h, f.grid.dim);
  const double qp = q / (q - 1.0);

  QuadTerms out;
  std::vector<double> lin(f.live.size()), hp(f.live.size());
  for (std::size_t ii = 0; ii < f.live.size(); ++ii) {
    const std::size_t a = f.live[ii];
    const Point& p = f.grid.pts[a];
    const double r = f.grid.dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
    lin[ii] = cell * kk(r) * f.re[a];
    hp[ii] = cell * std::pow(f.re[a] * f.re[a] + f.im[a] * f.im[a], 0.5 * qp);
  }
  out.linear = pairwise_sum(lin);
  out.h_pow = pairwise_sum(hp);

  auto [rs, rd] = lattice_pair(f.re, f, lk);
  out.re_sum = rs;
  out.re_diff = rd;
  if (!t.zero_phase()) {
    auto [is, id] = lattice_pair(f.im, f, lk);
    out.im_sum = is;
    out.im_diff = id;
  }
  return out;
}

void apply_coefficients(const QuadTerms& terms, double q, ExpansionTerms* out) {
  out->linear = q * terms.linear;
  out->quad_im_sum = -0.25 * q * (q - 2.0) * terms.im_sum;
  out->quad_im_diff = 0.25 * q * q * terms.im_diff;
  out->quad_re_sum = 0.25 * q * (q - 2.0) * terms.re_sum;
  out->quad_re_diff = 0.25 * q * q * terms.re_diff;
  out->h_norm = std::pow(std::max(terms.h_pow, 0.0), (q - 1.0) / q);
}

void require_q(double q, const char* who) {
  if (!(q > 3.0))
    throw std::invalid_argument(std::string(who) + ": requires q > 3");
}

}  // namespace

ExpansionTerms expand_about_ball(const TrialFunction& t, double q,
                                 const ExpandOptions& opt) {
  require_q(q, "expand_about_ball");
  if (opt.grid_n < 0)
    throw std::invalid_argument("expand_about_ball: negative grid_n");
  const int d = t.dim();

  ExpansionTerms out;
  out.q = q;
  bool smooth = closed_form_case(q, d) &&
                t.support().shape() != Shape::kRadialBoundary;
  if (opt.route == PairRoute::kGrid) smooth = false;
  if (opt.route == PairRoute::kSegments && !smooth)
    throw std::invalid_argument(
        "expand_about_ball: segment route needs q = 4, d = 1, intervals");
  const bool structured = t.constant_modulus() && t.linear_phase();

  NormOptions no = opt.norm;
  // Structured trials ride the exact norm path; a tight tolerance there makes
  // the base and direct values cancel to well below the cubic remainder.
  if (no.tol == 0.0 && smooth && structured) no.tol = 1e-9;
  const NormResult nb =
      norm_q(TrialFunction::indicator(SupportSet::ball(d)), q, no);
  const NormResult nt = norm_q(t, q, no);
  out.base = nb.value;
  out.direct = nt.value;

  QuadTerms fine, coarse;
  if (smooth) {
    fine = segment_terms(t, q, 12);
    coarse = segment_terms(t, q, 8);
  } else {
    const int n = opt.grid_n > 0 ? opt.grid_n : default_pair_n(d);
    const auto kk = kernel_registry(KernelKind::kK, q, d);
    const auto ll = kernel_registry(KernelKind::kL, q, d);
    const Grid probe = make_grid(t, 8, opt.box);
    fine = grid_terms(t, q, n, probe.box, *kk, *ll);
    coarse = grid_terms(t, q, std::max(n / 2, 16), probe.box, *kk, *ll);
  }
  apply_coefficients(fine, q, &out);
  out.predicted = out.base + out.linear + out.quad_im_sum + out.quad_im_diff +
                  out.quad_re_sum + out.quad_re_diff;
  out.residual = out.direct - out.predicted;

  ExpansionTerms alt;
  apply_coefficients(coarse, q, &alt);
  const double pair_budget =
      std::abs(out.linear - alt.linear) +
      std::abs(out.quad_im_sum - alt.quad_im_sum) +
      std::abs(out.quad_im_diff - alt.quad_im_diff) +
      std::abs(out.quad_re_sum - alt.quad_re_sum) +
      std::abs(out.quad_re_diff - alt.quad_re_diff);
  out.budget = nb.budget() + nt.budget() + pair_budget +
               1e-14 * (std::abs(out.base) + std::abs(out.direct));
  out.small_enough = out.h_norm <= kExpandThreshold;
  return out;
}

SupportSplitTerms expand_support_split(const TrialFunction& t, double q,
                                       const ExpandOptions& opt) {
  require_q(q, "expand_support_split");
  const int d = t.dim();
  const SupportSet& e = t.support();

  SupportSplitTerms out;
  out.q = q;
  NormOptions no = opt.norm;
  const NormResult nb =
      norm_q(TrialFunction::indicator(SupportSet::ball(d)), q, no);
  const NormResult ne = norm_q(TrialFunction::indicator(e), q, no);
  const NormResult nt = norm_q(t, q, no);
  out.base = nb.value;
  out.support_norm = ne.value;
  out.direct = nt.value;

  // Ball-restricted trial: original fields on E, neutral fields on B \ E.
  TrialFunction core = TrialFunction::indicator(SupportSet::ball(d));
  double core_budget = 0.0;
  if (t.unit_modulus() && t.zero_phase()) {
    const NormResult nc = norm_q(core, q, no);
    out.core_norm = nc.value;
    core_budget = nc.budget();
  } else {
    core = core.with_modulus([t](Point p) {
                 return t.support().contains(p) ? t.modulus_at(p) : 1.0;
               })
               .with_phase([t](Point p) {
                 return t.support().contains(p) ? t.phase_at(p) : 0.0;
               });
    const NormResult nc = norm_q(core, q, no);
    out.core_norm = nc.value;
    core_budget = nc.budget();
  }

  // Linear correction on E \ B.
  double lin_budget = 0.0;
  if (d == 1) {
    const auto kk = kernel_registry(KernelKind::kK, q, d);
    const Fn1 kfn = closed_form_case(q, d)
                        ? Fn1(k4)
                        : Fn1([kk](double r) { return (*kk)(r); });
    const auto segs = build_segments(t);
    const std::vector<double> kcuts{-3.0, -1.0, 1.0, 3.0};
    const auto eval = [&](int n_gauss, double width) {
      const Quadrature gl = gauss_legendre(n_gauss);
      std::vector<double> acc;
      for (const auto& s : segs) {
        if (!s.in_e || s.in_b) continue;
        acc.push_back(panel_integral(
            s.lo, s.hi, kcuts, width, gl, [&](double x) {
              const Point p{x, 0.0};
              return kfn(std::abs(x)) *
                     (t.modulus_at(p) * std::cos(t.phase_at(p)) - 1.0);
            }));
      }
      return pairwise_sum(acc);
    };
    const double fine = eval(12, 0.25);
    lin_budget = q * std::abs(fine - eval(8, 0.375));
    out.outside_linear = q * fine;
  } else {
    const auto kk = kernel_registry(KernelKind::kK, q, d);
    const auto eval = [&](int n) {
      const Grid ge = make_grid(t, n, opt.box);
      const Grid gb = make_grid(
          TrialFunction::indicator(SupportSet::ball(d)), n, ge.box);
      const double cell = std::pow(ge.h, d);
      std::vector<double> acc(ge.pts.size());
      for (std::size_t i = 0; i < ge.pts.size(); ++i) {
        const double outside = std::max(0.0, ge.cov[i] - gb.cov[i]);
        if (outside == 0.0) continue;
        const Point& p = ge.pts[i];
        acc[i] = cell * outside * (*kk)(std::hypot(p[0], p[1])) *
                 (ge.mod[i] * std::cos(ge.phase[i]) - 1.0);
      }
      return pairwise_sum(acc);
    };
    const int n = opt.grid_n > 0 ? opt.grid_n : 128;
    const double fine = eval(n);
    lin_budget = q * std::abs(fine - eval(std::max(n / 2, 32)));
    out.outside_linear = q * fine;
  }

  out.predicted = out.support_norm + out.outside_linear - out.base + out.core_norm;
  out.residual = out.direct - out.predicted;
  out.budget = nb.budget() + ne.budget() + nt.budget() + core_budget +
               lin_budget + 1e-14 * std::abs(out.base);
  return out;
}

FrequencyBoundReport frequency_upper_bound(const FieldFn& f, const FieldFn& g,
                                           double eps, double q, int d,
                                           const ExpandOptions& opt) {
  require_q(q, "frequency_upper_bound");
  if (!(eps > 0.0) || !(eps < 1.5707963267948966))
    throw std::invalid_argument(
        "frequency_upper_bound: eps must lie in (0, pi/2)");

  FrequencyBoundReport out;
  out.q = q;
  out.eps = eps;

  const auto kk = kernel_registry(KernelKind::kK, q, d);
  const auto ll = kernel_registry(KernelKind::kL, q, d);
  out.inf_k = closed_form_case(q, d) ? k4(1.0) : kk->min_on(1.0);
  if (!(out.inf_k > 0.0))
    throw std::runtime_error(
        "frequency_upper_bound: kernel not positive on the ball at this q");

  const TrialFunction ball = TrialFunction::indicator(SupportSet::ball(d));
  const TrialFunction trial = ball.with_modulus(f).with_phase(g);
  NormOptions no = opt.norm;
  const NormResult nb = norm_q(ball, q, no);
  const NormResult nt = norm_q(trial, q, no);
  out.base = nb.value;
  out.direct = nt.value;

  struct Masses {
    double high = 0.0, neg = 0.0, drop = 0.0, quad_k = 0.0;
    double g2 = 0.0, f1 = 0.0, glow2 = 0.0;
    double pair_s = 0.0, pair_d = 0.0;
  };
  const Fn1 kfn = closed_form_case(q, d)
                      ? Fn1(k4)
                      : Fn1([kk](double r) { return (*kk)(r); });
  const auto eval = [&](int n) {
    Masses m;
    GridFields fields;
    fields.grid = make_grid(ball, n, 1.0);
    const Grid& gr = fields.grid;
    const std::size_t cells = gr.pts.size();
    fields.re.assign(cells, 0.0);
    fields.im.assign(cells, 0.0);
    std::vector<double> high(cells, 0.0), neg(cells, 0.0), drop(cells, 0.0);
    std::vector<double> qk(cells, 0.0), g2(cells, 0.0), f1(cells, 0.0);
    std::vector<double> gl2(cells, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
      if (gr.cov[i] == 0.0) continue;
      const double w = gr.w[i];
      const double gv = g(gr.pts[i]);
      const double fv = f(gr.pts[i]);
      g2[i] = w * gv * gv;
      f1[i] = w * std::abs(fv - 1.0);
      if (std::abs(gv) > eps) {
        high[i] = w;
        const double c = std::cos(gv);
        if (c < 0.0)
          neg[i] = w;
        else
          drop[i] = w * (1.0 - c);
      } else {
        const Point& p = gr.pts[i];
        const double r = d == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
        qk[i] = w * kfn(r) * gv * gv;
        gl2[i] = w * gv * gv;
        fields.im[i] = gr.cov[i] * gv;  // low-phase field for the pairings
        fields.live.push_back(i);
      }
    }
    m.high = pairwise_sum(high);
    m.neg = pairwise_sum(neg);
    m.drop = pairwise_sum(drop);
    m.quad_k = pairwise_sum(qk);
    m.g2 = pairwise_sum(g2);
    m.f1 = pairwise_sum(f1);
    m.glow2 = pairwise_sum(gl2);
    const Fn1 lfn = [&ll](double r) { return (*ll)(r); };
    const LatticeKernel lk = make_lattice(gr, lfn);
    auto [ps, pd] = lattice_pair(fields.im, fields, lk);
    m.pair_s = ps;
    m.pair_d = pd;
    return m;
  };

  const int n = opt.grid_n > 0 ? opt.grid_n : (d == 1 ? 4096 : 96);
  const Masses fine = eval(n);
  const Masses half = eval(std::max(n / 2, 32));

  out.high_measure = fine.high;
  out.neg_cos_measure = fine.neg;
  out.cos_drop = fine.drop;
  out.drop_term = -q * out.inf_k * (out.cos_drop + out.neg_cos_measure);
  out.quad_k = -0.5 * q * fine.quad_k;
  out.quad_sum = -0.25 * q * (q - 2.0) * fine.pair_s;
  out.quad_diff = 0.25 * q * q * fine.pair_d;
  out.bound =
      out.base + out.drop_term + out.quad_k + out.quad_sum + out.quad_diff;
  out.margin = out.bound - out.direct;

  const double mass_budget =
      q * out.inf_k * (std::abs(fine.drop - half.drop) +
                       std::abs(fine.neg - half.neg)) +
      0.5 * q * std::abs(fine.quad_k - half.quad_k) +
      0.25 * q * (q - 2.0) * std::abs(fine.pair_s - half.pair_s) +
      0.25 * q * q * std::abs(fine.pair_d - half.pair_d);
  out.budget = nb.budget() + nt.budget() + mass_budget + 1e-12;

  out.g_l2 = std::sqrt(std::max(fine.g2, 0.0));
  out.f_l1 = fine.f1;
  out.hypothesis_ok =
      out.g_l2 <= kExpandThreshold && out.f_l1 <= kExpandThreshold;
  const double glow = std::sqrt(std::max(fine.glow2, 0.0));
  out.error_scale = out.g_l2 * out.g_l2 * out.g_l2 + out.f_l1 * out.f_l1 +
                    out.f_l1 * out.g_l2 +
                    std::sqrt(std::max(out.high_measure, 0.0)) * out.g_l2 *
                        out.g_l2 +
                    eps * eps * glow * glow;
  return out;
}

ScalingReport remainder_scaling(
    const std::function<TrialFunction(double)>& family, double q,
    std::span<const double> ts, const ExpandOptions& opt) {
  require_q(q, "remainder_scaling");
  if (ts.size() < 5)
    throw std::invalid_argument("remainder_scaling: need at least 5 points");
  for (double t : ts)
    if (!(t > 0.0) || t > 0.2)
      throw std::invalid_argument(
          "remainder_scaling: points must lie in (0, 0.2]");
  const double ratio = ts[1] / ts[0];
  if (!(ratio > 1.01) && !(ratio < 0.99))
    throw std::invalid_argument("remainder_scaling: points must be geometric");
  for (std::size_t i = 0; i + 1 < ts.size(); ++i)
    if (std::abs(ts[i + 1] / ts[i] / ratio - 1.0) > 0.1)
      throw std::invalid_argument("remainder_scaling: points must be geometric");

  ScalingReport rep;
  for (double t : ts) {
    const ExpansionTerms e = expand_about_ball(family(t), q, opt);
    rep.ts.push_back(t);
    rep.residuals.push_back(std::abs(e.residual));
    rep.budgets.push_back(e.budget);
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.ts.size(); ++i) {
    const bool use = rep.residuals[i] > 3.0 * rep.budgets[i];
    rep.used.push_back(use);
    if (use) {
      xs.push_back(rep.ts[i]);
      ys.push_back(rep.residuals[i]);
    }
  }
  rep.used_count = static_cast<int>(xs.size());
  rep.ok = rep.used_count >= 3;
  if (rep.ok) rep.fit = fit_loglog(xs, ys);
  return rep;
}

}  // namespace hylab
