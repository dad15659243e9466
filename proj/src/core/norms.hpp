#pragma once

#include <vector>

#include "core/trials.hpp"

namespace hylab {

// Evaluation route picked for a norm. Exact routes apply when the trial is an
// indicator times a constant modulus and an affine phase (the norm is then
// scaling- and modulation-invariant); grid routes handle general fields.
enum class NormPath { kExactIntervals, kRadialBall, kGrid1d, kGrid2d };

struct NormOptions {
  double tol = 0.0;          // target absolute accuracy; 0: 1e-6 (d=1), 1e-4 (d=2)
  int grid_n = 0;            // spatial cells per axis; 0: path default
  double freq_cutoff = 0.0;  // integration cutoff; 0: smallest with tail <= tol/2
  double box = 0.0;          // force the spatial box (matched-grid comparisons)
  // Route even structured trials through the grid path. Deficits set this so
  // the reference ball shares the trial's quadrature cell for cell.
  bool force_grid = false;
};

struct NormResult {
  double q = 0.0;
  double value = 0.0;       // window integral plus the tail allowance
  double integral = 0.0;    // int_{|xi| <= cutoff} |T|^q
  double tail = 0.0;        // closed-form allowance beyond the cutoff
  double quad_error = 0.0;  // frequency-quadrature estimate (step halving)
  double grid_error = 0.0;  // spatial-grid estimate (n halving); grid paths
  double freq_cutoff = 0.0;
  double inner_integral = 0.0;  // same integral restricted to inner_cutoff
  double inner_cutoff = 0.0;
  int grid_n = 0;
  double reliable_freq = 0.0;  // 0 on exact paths
  NormPath path = NormPath::kExactIntervals;

  double budget() const { return quad_error + grid_error + tail; }
};

// ||t^||_q^q for q > 2. Throws std::runtime_error when the requested
// tolerance needs frequencies beyond what any supported grid resolves.
NormResult norm_q(const TrialFunction& t, double q, const NormOptions& opt = {});

// ||1_E * ... * 1_E||_2^2 with m >= 2 factors; equals norm_q(1_E, 2m) by
// Plancherel. d=1 handles any interval union (lattice convolution); d=2
// handles the ball via the lens area in closed form, m = 2 only.
double convolution_norm_oracle(const SupportSet& e, int m);

struct DeficitReport {
  double q = 0.0;
  // ||1_B^||_q^q (|E|/|B|)^{q-1} - ||t^||_q^q, evaluated after rescaling the
  // trial to |E| = |B| so both norms share one quadrature.
  double deficit = 0.0;
  double budget = 0.0;  // certified two-sided allowance on deficit
  double ball_value = 0.0;
  double trial_value = 0.0;
  double dist_modulus = 0.0;   // ||f - 1||_{L1(E)} in the normalized frame
  double dist_phase_sq = 0.0;  // dist_E(e^{ig}, affine modulations)^2
  double dist_shape_sq = 0.0;  // dist(E, ellipsoids)^2
  double implied_c = 0.0;      // deficit / (sum of distance terms)
  bool optimizer_converged = true;

  // True when the certified interval around deficit excludes zero.
  bool sign_certified() const { return deficit > budget || deficit < -budget; }
};

DeficitReport deficit(const TrialFunction& t, double q, const NormOptions& opt = {});

struct QScanPoint {
  double q = 0.0;
  double norm_root = 0.0;  // ||t^||_q, the q-th root
};

struct QScanResult {
  std::vector<QScanPoint> points;
  double max_jump = 0.0;  // largest |root_{i+1} - root_i|
};

QScanResult q_scan(const TrialFunction& t, double q_lo, double q_hi, double dq,
                   const NormOptions& opt = {});

}  // namespace hylab
