#pragma once

#include <functional>
#include <span>
#include <vector>

#include "core/norms.hpp"
#include "core/numerics.hpp"
#include "core/trials.hpp"

namespace hylab {

// How the kernel pairings are evaluated. kAuto picks kSegments whenever the
// closed-form kernels apply (q = 4, d = 1, interval-type support) and falls
// back to the shared lattice otherwise. Keeping both routes addressable lets
// tests cross-check one against the other.
enum class PairRoute { kAuto, kGrid, kSegments };

struct ExpandOptions {
  int grid_n = 0;    // pairing grid cells per axis; 0: 2048 (d=1), 64 (d=2)
  double box = 0.0;  // shared grid half-width; 0: max(bound(E), 1)
  PairRoute route = PairRoute::kAuto;
  NormOptions norm;  // forwarded to the direct norm evaluations
};

// Perturbation size past which an expansion report is flagged: beyond it the
// cubic remainder no longer provably trails the quadratic terms.
inline constexpr double kExpandThreshold = 0.3;

// Term-by-term second-order expansion of norm_q(t)^q about the unit-ball
// indicator, with h = f e^{ig} 1_E - 1_B. Pairings against the kernel L:
//   <u, v>+ = integral u(x) v(y) L(x + y) dx dy
//   <u, v>- = integral u(x) v(y) L(x - y) dx dy
struct ExpansionTerms {
  double q = 0.0;
  double base = 0.0;          // indicator value at the unit ball
  double linear = 0.0;        // q <K, Re h>
  double quad_im_sum = 0.0;   // -(1/4) q (q-2) <Im h, Im h>+
  double quad_im_diff = 0.0;  // +(1/4) q^2     <Im h, Im h>-
  double quad_re_sum = 0.0;   // +(1/4) q (q-2) <Re h, Re h>+
  double quad_re_diff = 0.0;  // +(1/4) q^2     <Re h, Re h>-
  double predicted = 0.0;     // base + linear + the four quadratic terms
  double direct = 0.0;        // norm_q(t)^q evaluated independently
  double residual = 0.0;      // direct - predicted; third order in h
  double budget = 0.0;        // quadrature allowance on the residual
  double h_norm = 0.0;        // ||h||_{q'}, the expansion's small parameter
  bool small_enough = true;   // h_norm <= kExpandThreshold
};

ExpansionTerms expand_about_ball(const TrialFunction& t, double q,
                                 const ExpandOptions& opt = {});

// Decomposition isolating the support's contribution: the trial's value is
// the bare-support indicator value, plus a linear term carried by E \ B,
// minus the ball value, plus the value of the ball-restricted trial (fields
// kept on the intersection with E, modulus 1 / phase 0 on the rest of the
// ball). The residual collects everything of higher order.
struct SupportSplitTerms {
  double q = 0.0;
  double support_norm = 0.0;    // indicator value of E alone
  double outside_linear = 0.0;  // q <K, (f cos g - 1) restricted to E \ B>
  double base = 0.0;
  double core_norm = 0.0;       // value of the ball-restricted trial
  double predicted = 0.0;       // support_norm + outside_linear - base + core_norm
  double direct = 0.0;
  double residual = 0.0;
  double budget = 0.0;
};

SupportSplitTerms expand_support_split(const TrialFunction& t, double q,
                                       const ExpandOptions& opt = {});

// Upper bound for a ball-supported trial f e^{ig} 1_B driven by the phase
// level sets: mass where |g| > eps is discarded at the kernel's ball minimum,
// the small-phase remainder enters the quadratic terms. The bound drops
// cubic-order corrections, so margin >= -(budget + O(error_scale)).
struct FrequencyBoundReport {
  double q = 0.0;
  double eps = 0.0;
  double base = 0.0;
  double high_measure = 0.0;     // |{x in B : |g(x)| > eps}|
  double neg_cos_measure = 0.0;  // high-set part with cos g < 0
  double cos_drop = 0.0;         // integral of 1 - cos g over the rest of it
  double inf_k = 0.0;            // min of K over the ball (must be positive)
  double drop_term = 0.0;        // -q inf_k (cos_drop + neg_cos_measure)
  double quad_k = 0.0;           // -(q/2) <K, g^2> over the small-phase set
  double quad_sum = 0.0;         // -(1/4) q (q-2) <g_low, g_low>+
  double quad_diff = 0.0;        // +(1/4) q^2     <g_low, g_low>-
  double bound = 0.0;            // base + drop_term + quad_k + quad_sum + quad_diff
  double direct = 0.0;           // value of f e^{ig} 1_B
  double margin = 0.0;           // bound - direct
  double budget = 0.0;           // quadrature allowance alone
  double error_scale = 0.0;      // size of the dropped cubic-order terms
  double g_l2 = 0.0;             // ||g||_{L2(B)}
  double f_l1 = 0.0;             // ||f - 1||_{L1(B)}
  bool hypothesis_ok = true;     // g_l2 and f_l1 within kExpandThreshold
};

FrequencyBoundReport frequency_upper_bound(const FieldFn& f, const FieldFn& g,
                                           double eps, double q, int d,
                                           const ExpandOptions& opt = {});

// Log-log fit of |residual| along a one-parameter trial family. Points whose
// residual sits inside 3x the quadrature budget are excluded from the fit.
struct ScalingReport {
  std::vector<double> ts;
  std::vector<double> residuals;
  std::vector<double> budgets;
  std::vector<bool> used;
  LineFit fit;          // over the used points, log-log
  int used_count = 0;
  bool ok = false;      // at least 3 usable points
};

// ts must be >= 5 geometric points in (0, 0.2].
ScalingReport remainder_scaling(
    const std::function<TrialFunction(double)>& family, double q,
    std::span<const double> ts, const ExpandOptions& opt = {});

}  // namespace hylab
