#include "hylab.h"

#include <algorithm>
#include <array>
#include <cstring>
#include <exception>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core/kernels.hpp"
#include "core/norms.hpp"
#include "core/spectral.hpp"
#include "core/stability.hpp"
#include "core/taylor.hpp"
#include "core/trials.hpp"

using namespace hylab;

struct hy_trial {
  TrialFunction fn;
};

namespace {

thread_local std::string g_error;

void set_error(const char* what) { g_error = what ? what : "unknown error"; }

template <class F>
int guarded(F&& body) noexcept {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return HY_INVALID;
  } catch (const std::exception& e) {
    set_error(e.what());
    return HY_NUMERIC;
  } catch (...) {
    set_error("unknown error");
    return HY_NUMERIC;
  }
}

template <class F>
hy_trial* guarded_trial(F&& make) noexcept {
  try {
    return new hy_trial{make()};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  } catch (...) {
    set_error("unknown error");
    return nullptr;
  }
}

int require(bool ok, const char* what) {
  if (!ok) {
    set_error(what);
    return HY_INVALID;
  }
  return HY_OK;
}

NormOptions to_norm(const hy_norm_options* o) {
  NormOptions n;
  if (o) {
    n.tol = o->tol;
    n.grid_n = o->grid_n;
    n.freq_cutoff = o->freq_cutoff;
    n.box = o->box;
    n.force_grid = o->force_grid != 0;
  }
  return n;
}

ExpandOptions to_expand(const hy_norm_options* o, int route) {
  ExpandOptions e;
  switch (route) {
    case HY_ROUTE_GRID:
      e.route = PairRoute::kGrid;
      break;
    case HY_ROUTE_SEGMENTS:
      e.route = PairRoute::kSegments;
      break;
    default:
      e.route = PairRoute::kAuto;
      break;
  }
  e.norm = to_norm(o);
  return e;
}

KernelKind to_kind(int kind) {
  if (kind != HY_KERNEL_K && kind != HY_KERNEL_L)
    throw std::invalid_argument("kernel kind must be HY_KERNEL_K or HY_KERNEL_L");
  return kind == HY_KERNEL_K ? KernelKind::kK : KernelKind::kL;
}

void fill_deficit(const DeficitReport& dr, hy_deficit_result* out) {
  out->q = dr.q;
  out->deficit = dr.deficit;
  out->budget = dr.budget;
  out->ball_value = dr.ball_value;
  out->trial_value = dr.trial_value;
  out->dist_modulus = dr.dist_modulus;
  out->dist_phase_sq = dr.dist_phase_sq;
  out->dist_shape_sq = dr.dist_shape_sq;
  out->implied_c = dr.implied_c;
  out->optimizer_converged = dr.optimizer_converged ? 1 : 0;
  out->sign_certified = dr.sign_certified() ? 1 : 0;
}

}  // namespace

extern "C" {

const char* hy_version(void) { return HY_VERSION; }

const char* hy_last_error(void) { return g_error.c_str(); }

hy_trial* hy_trial_ball(int d) {
  return guarded_trial(
      [&] { return TrialFunction::indicator(SupportSet::ball(d)); });
}

hy_trial* hy_trial_intervals(const double* bounds, int count) {
  return guarded_trial([&] {
    if (!bounds || count < 1)
      throw std::invalid_argument("hy_trial_intervals: need at least one pair");
    std::vector<std::pair<double, double>> parts(count);
    for (int i = 0; i < count; ++i)
      parts[i] = {bounds[2 * i], bounds[2 * i + 1]};
    return TrialFunction::indicator(SupportSet::intervals(std::move(parts)));
  });
}

hy_trial* hy_trial_radial(double base, const double* modes, int count) {
  return guarded_trial([&] {
    if (count < 0 || (count > 0 && !modes))
      throw std::invalid_argument("hy_trial_radial: modes missing");
    std::vector<std::array<double, 3>> ms(count);
    for (int i = 0; i < count; ++i)
      ms[i] = {modes[3 * i], modes[3 * i + 1], modes[3 * i + 2]};
    return TrialFunction::indicator(SupportSet::radial_modes(base, ms));
  });
}

void hy_trial_free(hy_trial* t) { delete t; }

int hy_trial_dim(const hy_trial* t) { return t ? t->fn.dim() : 0; }

int hy_trial_constant_modulus(hy_trial* t, double value) {
  return guarded([&]() -> int {
    if (int rc = require(t != nullptr, "null trial")) return rc;
    t->fn = t->fn.with_constant_modulus(value);
    return HY_OK;
  });
}

int hy_trial_linear_phase(hy_trial* t, double slope_x, double slope_y,
                          double offset) {
  return guarded([&]() -> int {
    if (int rc = require(t != nullptr, "null trial")) return rc;
    t->fn = t->fn.with_linear_phase({slope_x, slope_y}, offset);
    return HY_OK;
  });
}

int hy_trial_quadratic_phase(hy_trial* t, double coeff) {
  return guarded([&]() -> int {
    if (int rc = require(t != nullptr, "null trial")) return rc;
    t->fn = t->fn.with_phase(
        [coeff](Point x) { return coeff * (x[0] * x[0] + x[1] * x[1]); });
    return HY_OK;
  });
}

int hy_norm(const hy_trial* t, double q, const hy_norm_options* opt,
            hy_norm_result* out) {
  return guarded([&]() -> int {
    if (int rc = require(t && out, "null argument")) return rc;
    const NormResult r = norm_q(t->fn, q, to_norm(opt));
    out->q = r.q;
    out->value = r.value;
    out->integral = r.integral;
    out->tail = r.tail;
    out->quad_error = r.quad_error;
    out->grid_error = r.grid_error;
    out->freq_cutoff = r.freq_cutoff;
    out->reliable_freq = r.reliable_freq;
    out->budget = r.budget();
    out->grid_n = r.grid_n;
    out->path = static_cast<int>(r.path);
    return HY_OK;
  });
}

int hy_deficit(const hy_trial* t, double q, const hy_norm_options* opt,
               hy_deficit_result* out) {
  return guarded([&]() -> int {
    if (int rc = require(t && out, "null argument")) return rc;
    fill_deficit(deficit(t->fn, q, to_norm(opt)), out);
    return HY_OK;
  });
}

int hy_kernel_describe(int kind, double q, int d, hy_kernel_info* out) {
  return guarded([&]() -> int {
    if (int rc = require(out != nullptr, "null output")) return rc;
    const auto k = kernel_registry(to_kind(kind), q, d);
    const KernelInfo& i = k->info();
    out->q = i.q;
    out->r_max = i.r_max;
    out->dr = i.dr;
    out->tail_radius = i.tail_radius;
    out->tail_tolerance = i.tail_tolerance;
    out->freq_cutoff = i.freq_cutoff;
    out->tail_bound = i.tail_bound;
    out->quad_error = i.quad_error;
    out->config_hash = i.config_hash;
    out->kind = kind;
    out->d = i.d;
    return HY_OK;
  });
}

int hy_kernel_eval(int kind, double q, int d, double r, double* value) {
  return guarded([&]() -> int {
    if (int rc = require(value != nullptr, "null output")) return rc;
    const auto k = kernel_registry(to_kind(kind), q, d);
    *value = (*k)(r);
    return HY_OK;
  });
}

int hy_expand(const hy_trial* t, double q, const hy_norm_options* opt,
              int route, hy_expansion_result* out) {
  return guarded([&]() -> int {
    if (int rc = require(t && out, "null argument")) return rc;
    const ExpansionTerms e = expand_about_ball(t->fn, q, to_expand(opt, route));
    out->q = e.q;
    out->base = e.base;
    out->linear = e.linear;
    out->quad_im_sum = e.quad_im_sum;
    out->quad_im_diff = e.quad_im_diff;
    out->quad_re_sum = e.quad_re_sum;
    out->quad_re_diff = e.quad_re_diff;
    out->predicted = e.predicted;
    out->direct = e.direct;
    out->residual = e.residual;
    out->budget = e.budget;
    out->h_norm = e.h_norm;
    out->small_enough = e.small_enough ? 1 : 0;
    return HY_OK;
  });
}

int hy_support_split(const hy_trial* t, double q, const hy_norm_options* opt,
                     hy_split_result* out) {
  return guarded([&]() -> int {
    if (int rc = require(t && out, "null argument")) return rc;
    const SupportSplitTerms s =
        expand_support_split(t->fn, q, to_expand(opt, HY_ROUTE_AUTO));
    out->q = s.q;
    out->support_norm = s.support_norm;
    out->outside_linear = s.outside_linear;
    out->base = s.base;
    out->core_norm = s.core_norm;
    out->predicted = s.predicted;
    out->direct = s.direct;
    out->residual = s.residual;
    out->budget = s.budget;
    return HY_OK;
  });
}

int hy_frequency_bound(const hy_trial* t, double q, double eps,
                       const hy_norm_options* opt, hy_frequency_result* out) {
  return guarded([&]() -> int {
    if (int rc = require(t && out, "null argument")) return rc;
    if (int rc = require(t->fn.support().shape() == Shape::kBall,
                         "frequency bound needs a ball-supported trial"))
      return rc;
    const TrialFunction fn = t->fn;
    const FieldFn f = [fn](Point x) { return fn.modulus_at(x); };
    const FieldFn g = [fn](Point x) { return fn.phase_at(x); };
    const FrequencyBoundReport r = frequency_upper_bound(
        f, g, eps, q, fn.dim(), to_expand(opt, HY_ROUTE_AUTO));
    out->q = r.q;
    out->eps = r.eps;
    out->base = r.base;
    out->high_measure = r.high_measure;
    out->neg_cos_measure = r.neg_cos_measure;
    out->cos_drop = r.cos_drop;
    out->inf_k = r.inf_k;
    out->drop_term = r.drop_term;
    out->quad_k = r.quad_k;
    out->quad_sum = r.quad_sum;
    out->quad_diff = r.quad_diff;
    out->bound = r.bound;
    out->direct = r.direct;
    out->margin = r.margin;
    out->budget = r.budget;
    out->error_scale = r.error_scale;
    out->g_l2 = r.g_l2;
    out->f_l1 = r.f_l1;
    out->hypothesis_ok = r.hypothesis_ok ? 1 : 0;
    return HY_OK;
  });
}

int hy_spectrum(double q, int d, int grid_n, int angular_n, int count,
                hy_eigen_row* rows, double* asymmetry, double* commutator) {
  return guarded([&]() -> int {
    if (int rc = require(rows != nullptr && count > 0, "null rows")) return rc;
    SpectralOptions opt;
    opt.grid_n = grid_n;
    if (angular_n > 0) opt.angular_n = angular_n;
    const OperatorT t = build_t(q, d, opt);
    const EigenSystem eig = eigensystem(t, count);
    const int got = static_cast<int>(eig.values.size());
    if (int rc = require(got >= count, "grid too small for requested count"))
      return rc;
    for (int i = 0; i < count; ++i) {
      rows[i].value = eig.values[i];
      rows[i].h_overlap = eig.h_overlap[i];
      rows[i].parity = static_cast<int>(eig.parity[i]);
    }
    if (asymmetry) *asymmetry = t.asymmetry;
    if (commutator) *commutator = eig.reflect_commutator;
    return HY_OK;
  });
}

int hy_gap(double q, int d, int grid_n, hy_gap_result* out) {
  return guarded([&]() -> int {
    if (int rc = require(out != nullptr, "null output")) return rc;
    SpectralOptions opt;
    opt.grid_n = grid_n;
    const GapReport g = gap_estimate(q, d, opt);
    out->q = g.q;
    out->c = g.c;
    out->c_coarse = g.c_coarse;
    out->drift = g.drift;
    out->null_residual = g.null_residual;
    out->d = g.d;
    out->n = g.n;
    out->truncation_n = g.truncation_n;
    out->positive = g.positive ? 1 : 0;
    return HY_OK;
  });
}

int hy_certificate_run(const hy_trial* t, double q,
                       const hy_certificate_options* opt, hy_certificate* out) {
  return guarded([&]() -> int {
    if (int rc = require(t && out, "null argument")) return rc;
    CertificateOptions co;
    if (opt) {
      co.norm = to_norm(&opt->norm);
      if (opt->threshold_m > 0.0) co.threshold_m = opt->threshold_m;
      if (opt->threshold_n > 0.0) co.threshold_n = opt->threshold_n;
      co.precompose = opt->skip_precompose == 0;
    }
    const StabilityCertificate c = stability_certificate(t->fn, q, co);
    out->q = c.q;
    out->deficit = c.deficit.deficit;
    out->budget = c.deficit.budget;
    out->ball_value = c.deficit.ball_value;
    out->trial_value = c.deficit.trial_value;
    out->dist_modulus = c.deficit.dist_modulus;
    out->dist_phase_sq = c.deficit.dist_phase_sq;
    out->dist_shape_sq = c.deficit.dist_shape_sq;
    out->implied_c = c.deficit.implied_c;
    out->modulus_mag = c.case_report.modulus_mag;
    out->support_mag = c.case_report.support_mag;
    out->freq_mag = c.case_report.freq_mag;
    out->case_label = static_cast<int>(c.case_report.label);
    out->certified = c.certified ? 1 : 0;
    out->hypothesis_ok = c.case_report.hypothesis_ok ? 1 : 0;
    out->normalized = c.normalized ? 1 : 0;
    out->translation_dropped = c.translation_dropped ? 1 : 0;
    out->optimizer_converged = c.deficit.optimizer_converged ? 1 : 0;
    return HY_OK;
  });
}

int hy_sweep(int family, double q, int d, const double* params, int count,
             const hy_norm_options* opt, hy_sweep_point* points,
             hy_sweep_fit* fit) {
  return guarded([&]() -> int {
    if (int rc = require(params && points && fit && count > 0, "null argument"))
      return rc;
    SweepOptions so;
    so.norm = to_norm(opt);
    const std::span<const double> ps(params, static_cast<std::size_t>(count));
    const SweepReport rep = [&] {
      switch (family) {
        case HY_FAMILY_MODULUS:
          return optimality_sweep(SweepFamily::kModulus, q, ps, so);
        case HY_FAMILY_PHASE_QUADRATIC:
          return optimality_sweep(SweepFamily::kPhaseQuadratic, q, ps, so);
        case HY_FAMILY_PHASE_AFFINE:
          return optimality_sweep(SweepFamily::kPhaseAffine, q, ps, so);
        case HY_FAMILY_SUPPORT:
          return support_sweep(q, d, ps, so);
        default:
          throw std::invalid_argument("unknown sweep family");
      }
    }();
    for (int i = 0; i < count; ++i) {
      points[i].param = rep.points[i].param;
      points[i].deficit = rep.points[i].deficit;
      points[i].budget = rep.points[i].budget;
      points[i].distance = rep.points[i].distance;
      points[i].used = rep.points[i].used ? 1 : 0;
    }
    fit->slope = rep.fit.slope;
    fit->intercept = rep.fit.intercept;
    fit->r2 = rep.fit.r2;
    fit->used_count = rep.used_count;
    fit->ok = rep.ok ? 1 : 0;
    fit->degenerate = rep.degenerate ? 1 : 0;
    return HY_OK;
  });
}

int hy_sign_suite(double q, int d, int trials, double eps,
                  unsigned long long seed, const hy_norm_options* opt,
                  hy_suite_result* out) {
  return guarded([&]() -> int {
    if (int rc = require(out != nullptr, "null output")) return rc;
    const SignSuiteReport r =
        randomized_sign_suite(q, d, trials, eps, seed, to_norm(opt));
    out->q = r.q;
    out->min_margin = r.min_margin;
    out->min_implied_c = r.min_implied_c;
    out->d = r.d;
    out->trials = r.trials;
    out->failures = r.failures;
    out->certified = r.certified;
    out->positive_c = r.positive_c;
    out->pass = r.pass ? 1 : 0;
    return HY_OK;
  });
}

int hy_q_scan(const hy_trial* t, double q_lo, double q_hi, double dq,
              const hy_norm_options* opt, hy_scan_point* points, int capacity,
              int* count, double* max_jump) {
  return guarded([&]() -> int {
    if (int rc = require(t && count, "null argument")) return rc;
    const QScanResult r = q_scan(t->fn, q_lo, q_hi, dq, to_norm(opt));
    const int n = static_cast<int>(r.points.size());
    *count = n;
    if (!points) return HY_OK;
    if (int rc = require(capacity >= n, "scan capacity too small")) return rc;
    for (int i = 0; i < n; ++i) {
      points[i].q = r.points[i].q;
      points[i].norm_root = r.points[i].norm_root;
    }
    if (max_jump) *max_jump = r.max_jump;
    return HY_OK;
  });
}

}  // extern "C"
