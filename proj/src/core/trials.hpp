#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace hylab {

// Points live in at most two dimensions; x[1] is ignored when d = 1.
using Point = std::array<double, 2>;

struct AffineMap {
  int dim = 1;
  double m[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  double v[2] = {0.0, 0.0};

  static AffineMap identity(int d);
  static AffineMap line(double a, double b);  // d=1: x -> a x + b
  static AffineMap linear2(double a00, double a01, double a10, double a11);
  static AffineMap rotation(double angle);

  double det() const;
  AffineMap inverse() const;
  Point operator()(Point x) const;
};

enum class Shape { kBall, kIntervals, kRadialBoundary };

// Measurable bounded support set: a centered ball, a disjoint union of
// intervals (d=1), or a star-shaped region r < rho(theta) (d=2).
class SupportSet {
 public:
  static SupportSet ball(int d, double radius = 1.0);
  static SupportSet intervals(std::vector<std::pair<double, double>> parts);
  // rho(theta) = base * (1 + sum_k amp_k cos(k theta + phase_k)); must stay
  // positive. modes entries are (k, amp, phase).
  static SupportSet radial_modes(double base,
                                 std::span<const std::array<double, 3>> modes);
  // The boundary function is sampled at 8192 angles and interpolated, so all
  // downstream geometry is deterministic and cheap; smooth boundaries lose
  // only ~1e-7 of radius to the interpolation.
  static SupportSet radial_fn(std::function<double(double)> rho);

  int dim() const { return dim_; }
  Shape shape() const { return shape_; }
  double measure() const;
  bool contains(Point x) const;
  double bounding_radius() const;
  // Largest centered disk inside the set (d=2); coverage loops use it to skip
  // interior cells. 0 for interval unions.
  double inner_radius() const;
  // Upper bound on |d rho / d theta| for star-shaped boundaries; coverage
  // loops use it to classify grid cells without subsampling. 0 otherwise.
  double radial_slope_bound() const { return rho_lip_; }
  // |E symmetric-difference unit ball|
  double sym_diff_ball() const;
  SupportSet apply_affine(const AffineMap& a) const;

  double ball_radius() const { return radius_; }
  const std::vector<std::pair<double, double>>& parts() const { return iv_; }
  double rho(double theta) const { return rho_(theta); }

 private:
  SupportSet() = default;
  int dim_ = 1;
  Shape shape_ = Shape::kBall;
  double radius_ = 1.0;
  std::vector<std::pair<double, double>> iv_;
  std::function<double(double)> rho_;
  double rho_max_ = 1.0;
  double rho_min_ = 0.0;
  double rho_lip_ = 0.0;
};

using FieldFn = std::function<double(Point)>;

// Trial function f e^{ig} 1_E with f, g given as closed-form fields. The
// indicator special cases (f = 1, g = 0) are tracked so evaluation paths can
// use exact transforms where they exist.
class TrialFunction {
 public:
  static TrialFunction indicator(SupportSet e);
  TrialFunction with_modulus(FieldFn f) const;
  TrialFunction with_phase(FieldFn g) const;
  // Structured special cases: f = c, or g(x) = alpha . x + beta. Norms of
  // such trials reduce exactly to indicator norms (scaling, modulation), so
  // evaluation paths track them separately from general fields.
  TrialFunction with_constant_modulus(double c) const;
  TrialFunction with_linear_phase(Point alpha, double beta) const;
  // Returns t composed with a^{-1}: support a(E), fields pre-composed with
  // a^{-1}.
  TrialFunction precompose(const AffineMap& a) const;

  int dim() const { return support_.dim(); }
  const SupportSet& support() const { return support_; }
  bool unit_modulus() const { return mod_kind_ == ModKind::kUnit; }
  bool constant_modulus() const { return mod_kind_ != ModKind::kGeneral; }
  bool zero_phase() const { return phase_kind_ == PhaseKind::kZero; }
  bool linear_phase() const { return phase_kind_ != PhaseKind::kGeneral; }
  // Valid when constant_modulus() / linear_phase() hold.
  double modulus_value() const { return mod_value_; }
  Point phase_slope() const { return slope_; }
  double phase_offset() const { return offset_; }
  double modulus_at(Point x) const;
  double phase_at(Point x) const;

 private:
  enum class ModKind { kUnit, kConstant, kGeneral };
  enum class PhaseKind { kZero, kLinear, kGeneral };
  explicit TrialFunction(SupportSet e) : support_(std::move(e)) {}
  SupportSet support_;
  FieldFn f_, g_;
  ModKind mod_kind_ = ModKind::kUnit;
  PhaseKind phase_kind_ = PhaseKind::kZero;
  double mod_value_ = 1.0;
  Point slope_{0.0, 0.0};
  double offset_ = 0.0;
};

// Midpoint grid over the symmetric box [-box, box]^d, box = max(bound(E), 1),
// so both E and the unit ball are covered. Cell centers are symmetric under
// x -> -x. Weights are cell volume times the covered fraction of E (exact
// interval overlap in d=1, 8x8 subsampling in d=2).
struct Grid {
  int dim = 1;
  int n = 0;  // cells per axis
  double box = 1.0;
  double h = 0.0;
  std::vector<double> axis;               // cell centers along one axis
  std::vector<Point> pts;                 // flattened centers (n or n*n)
  std::vector<double> cov;                // coverage of E in [0, 1]
  std::vector<double> w;                  // h^d * cov
  std::vector<double> mod;                // modulus at centers
  std::vector<double> phase;              // phase at centers
  std::vector<std::complex<double>> val;  // mod * e^{i phase}
  double measure_est = 0.0;               // sum of w
  double reliable_freq = 0.0;             // 1/(4h) per axis
};

// box = 0 picks max(bound(E), 1); pass an explicit box to put two trials on
// identical cells (comparisons then cancel the shared quadrature error).
Grid make_grid(const TrialFunction& t, int n = 0, double box = 0.0);

// Unit-ball coverage fractions on the same cells (for expansions around 1_B).
std::vector<double> ball_coverage(const Grid& g);

struct TransformDiag {
  double reliable_freq = 0.0;
  bool beyond_reliable = false;
};

// Midpoint-rule transform sum_i w_i f_i e^{i g_i} e^{-2 pi i x_i . xi}.
// The midpoint rule is spectrally accurate for |xi| well under 1/(4h) and
// aliases near multiples of 1/h; diag reports the reliable band.
std::complex<double> trial_transform(const Grid& g, Point xi,
                                     TransformDiag* diag = nullptr);

// Batch transform along the uniform frequency line xi_k = xi0 + k dxi
// (direction u, |u| = 1), using a per-cell phase recurrence. Deterministic
// parallel reduction; out[k] is overwritten.
void transform_line(const Grid& g, Point u, double xi0, double dxi,
                    std::span<std::complex<double>> out);

// Exact transform of 1_E for an interval union (d=1).
std::complex<double> interval_transform(const SupportSet& e, double xi);

// Transform of 1_E for a star-shaped set (d=2), reduced to a single theta
// integral over the boundary: int_0^{2pi} R^2 phi(a R) dtheta with
// phi(z) = int_0^1 e^{-izt} t dt. Periodic trapezoid with the node count
// scaled to the integrand bandwidth ~ 2 pi |xi| rho_max.
std::complex<double> support_transform_2d(const SupportSet& e, Point xi);

}  // namespace hylab
