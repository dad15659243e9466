#pragma once

#include "core/trials.hpp"

namespace hylab {

// Volume-matched ellipsoid candidate: an interval (d=1) or a rotated ellipse
// (d=2). radii[1] and angle are unused in d=1.
struct EllipsoidParams {
  int dim = 1;
  Point center{0.0, 0.0};
  double radii[2] = {1.0, 1.0};
  double angle = 0.0;

  double volume() const;
  // x -> center + R(angle) diag(radii) x, taking the unit ball onto the
  // ellipsoid. Its inverse normalizes a near-elliptical support.
  AffineMap map_from_ball() const;
};

struct EllipsoidFit {
  double value = 0.0;  // |E symdiff Ell| / |E| at the best candidate
  EllipsoidParams params;
  bool converged = true;
};

// Distance from E to the volume-matched ellipsoid family. d=1 interval unions
// are solved exactly (the overlap is piecewise linear in the center, so the
// optimum sits on a breakpoint). d=2 star-shaped sets run Nelder-Mead over
// (center, major axis, angle) from a fixed battery of starts; the symmetric
// difference is the radial integral (1/2) int |rho_E^2 - rho_Ell^2| dtheta,
// valid while the origin stays interior to the ellipse.
EllipsoidFit dist_ellipsoids(const SupportSet& e);

struct AffineFit {
  double value = 0.0;  // L2(E) distance from e^{ig} to the nearest e^{i(a.x+b)}
  Point alpha{0.0, 0.0};
  double b = 0.0;
  bool converged = true;
};

// Distance from the phase factor e^{ig} to the affine modulation family over
// E, minimizing ||e^{ig} - e^{i(alpha . x + b)}||_{L2(E)}. Equivalent to
// maximizing |int_E e^{i(g - alpha . x)} dx|, with b recovered as the argument
// of the optimal integral. The modulus field of t is ignored.
AffineFit dist_affine_modulation(const TrialFunction& t);

}  // namespace hylab
