#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/numerics.hpp"

namespace hylab {

enum class KernelKind { kK, kL };

// K has frequency profile |b|^{q-2} b, L has |b|^{q-2}, b the unit-ball
// transform. Both are real and radial; even q makes them iterated indicator
// convolutions with compact support (radius q-1 for K, q-2 for L).
struct KernelInfo {
  KernelKind kind = KernelKind::kK;
  double q = 4.0;
  int d = 1;
  double r_max = 0.0;          // last sampled radius
  double dr = 0.0;             // radial sample spacing
  double tail_radius = 0.0;    // treated as 0 beyond this radius
  double tail_tolerance = 0.0; // declared bound on |value| past tail_radius
  double freq_cutoff = 0.0;    // accepted inversion used [0, 2*freq_cutoff]
  double tail_bound = 0.0;     // bound on the uncompleted frequency tail
  double quad_error = 0.0;     // sup disagreement between the two cutoffs
  std::uint64_t config_hash = 0;
};

class Kernel {
 public:
  Kernel(KernelInfo info, std::vector<double> r, std::vector<double> v);

  // Radial evaluation; |x| beyond the tail radius returns 0 exactly.
  double operator()(double r) const;
  const KernelInfo& info() const { return info_; }
  const CubicInterpolant& samples() const { return interp_; }
  double min_on(double r_hi) const;  // min sampled value over [0, r_hi]
  double max_on(double r_lo) const;  // max sampled value over [r_lo, tail_radius]

 private:
  KernelInfo info_;
  CubicInterpolant interp_;
};

struct KernelOptions {
  double dr = 0.0;           // 0: 1/128
  double r_max = 0.0;        // 0: max(q, support radius) + 0.5, or q + 2 when
                             // the kernel has no compact support
  double freq_cutoff = 0.0;  // 0: budget-driven default
  bool use_cache = true;     // consult/populate the CSV cache directory
};

// Radial inversion of the frequency profile truncated at the cutoff, with the
// truncated tail completed analytically in d=1 (trigonometric decomposition
// of the profile, power-law oscillatory tail integrals) and bounded by the
// sharp envelope in d=2. A verification pass at twice the cutoff must agree
// before the kernel is accepted (the doubled-cutoff samples are the ones
// kept).
Kernel build_kernel(KernelKind kind, double q, int d, const KernelOptions& opts = {});

// Process-wide immutable kernel registry (builds or loads from cache once per
// (kind, q, d) with default options). Safe for concurrent use.
std::shared_ptr<const Kernel> kernel_registry(KernelKind kind, double q, int d);

// Ground truth at even q: iterated indicator convolution evaluated on a
// spatial grid (1D lattice convolution; 2D iterated polar convolution of
// radial profiles). kind K uses q-1 factors, L uses q-2.
double convolution_oracle(KernelKind kind, int q, int d, double r);

// sup |k1 - k2| sampled on [0, r_hi].
double kernel_distance(const Kernel& k1, const Kernel& k2, double r_hi);

struct MonotoneReport {
  double max_forward_diff = 0.0;  // over the sampled grid on (0, m-1)
  bool decreasing = false;
  struct Gap {
    double delta = 0.0;
    double min_low = 0.0;   // min over r <= 1 - delta
    double max_high = 0.0;  // max over r >= 1 + delta
    bool pass = false;
  };
  std::vector<Gap> gaps;  // delta in {0.05, 0.1, 0.2}
  bool pass = false;
};

// Monotonicity of K_q plus the separated min/max gap property. Requires q
// within 0.25 of an even integer m >= 4 (the validated neighborhood).
MonotoneReport check_K_monotone(double q, int d);

void write_kernel_csv(const Kernel& k, const std::string& path);
Kernel read_kernel_csv(const std::string& path);

}  // namespace hylab
