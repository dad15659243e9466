#pragma once

#include <span>
#include <vector>

#include "core/distances.hpp"
#include "core/norms.hpp"
#include "core/numerics.hpp"
#include "core/trials.hpp"

namespace hylab {

enum class CaseLabel { kModulus, kSupport, kFrequency };

// The three perturbation magnitudes and which one dominates. Ties resolve in
// the order modulus, support, frequency, so every trial gets exactly one
// label. The thresholds M and N weight the comparison; the theory only needs
// some fixed choice, so they are configurable with a common default.
struct CaseReport {
  CaseLabel label = CaseLabel::kModulus;
  double threshold_m = 10.0;
  double threshold_n = 10.0;
  double modulus_mag = 0.0;  // ||f - 1||_{L1(E)}^{1/2}
  double support_mag = 0.0;  // M N |E symdiff B|
  double freq_mag = 0.0;     // N ||g||_{L2(E)}
  bool hypothesis_ok = true;  // |E| <= |B| as the case propositions assume
};

CaseReport case_classify(const TrialFunction& t, double m = 10.0,
                         double n = 10.0);

struct CertificateOptions {
  NormOptions norm;
  bool precompose = true;  // normalize by the fitted ellipsoid and affine phase
  double threshold_m = 10.0;
  double threshold_n = 10.0;
};

// Deficit, distances, and the implied stability constant for one trial. The
// support is first mapped to a near-ball by the inverse of the fitted
// ellipsoid map and the phase is reduced by its fitted affine part; both
// operations leave the deficit invariant but make the distance terms the
// residual ones the case analysis works with.
struct StabilityCertificate {
  double q = 0.0;
  DeficitReport deficit;
  EllipsoidFit shape_fit;  // fitted on the raw support
  AffineFit phase_fit;     // fitted after the shape normalization
  CaseReport case_report;
  bool normalized = false;
  bool translation_dropped = false;  // d=2 shape maps keep their center
  bool certified = false;  // deficit > budget with a positive implied c
};

StabilityCertificate stability_certificate(const TrialFunction& t, double q,
                                           const CertificateOptions& opt = {});

enum class SweepFamily {
  kModulus,         // f = 1 - eta on B
  kPhaseQuadratic,  // g = t x^2 on B
  kPhaseAffine,     // g = t x on B; exact extremizers, expect the noise floor
  kSupport,         // d=1 gap shift / d=2 boundary mode, volume preserving
};

struct SweepPoint {
  double param = 0.0;
  double deficit = 0.0;
  double budget = 0.0;
  double distance = 0.0;  // the family's own distance term
  bool used = false;      // above the noise floor and fit-eligible
};

struct SweepReport {
  SweepFamily family = SweepFamily::kModulus;
  double q = 0.0;
  int d = 1;
  std::vector<SweepPoint> points;
  LineFit fit;  // log(deficit) against log(distance) over used points
  int used_count = 0;
  bool ok = false;          // enough points above the floor to fit
  bool degenerate = false;  // every point sat at the noise floor
};

struct SweepOptions {
  NormOptions norm;
};

// params must be >= 5 geometric values in (0, 0.2].
SweepReport optimality_sweep(SweepFamily family, double q,
                             std::span<const double> params,
                             const SweepOptions& opt = {});

SweepReport support_sweep(double q, int d, std::span<const double> params,
                          const SweepOptions& opt = {});

struct SignSuiteReport {
  double q = 0.0;
  int d = 1;
  int trials = 0;
  int failures = 0;       // deficit below -budget, the sign the theory forbids
  int certified = 0;      // certified interval excludes zero
  int positive_c = 0;     // certified trials whose implied c is positive
  double min_margin = 0.0;     // min of deficit + budget over all trials
  double min_implied_c = 0.0;  // min implied c over certified trials
  bool pass = false;
};

// Randomized deficit-sign check: seeded trials rotate through small modulus,
// support, and phase perturbations of the ball, each at most eps in its own
// magnitude. Every deficit must clear -budget, and certified trials must
// report a positive implied constant.
SignSuiteReport randomized_sign_suite(double q, int d, int trials, double eps,
                                      std::uint64_t seed,
                                      const NormOptions& opt = {});

}  // namespace hylab
