#pragma once

namespace hylab {

// Convention used throughout: F(xi) = int e^{-2 pi i x.xi} f(x) dx.

// Volume of the unit ball, d in {1, 2}.
double unit_ball_volume(int d);

// Fourier transform of the unit-ball indicator at radius rho >= 0:
//   d=1: sin(2 pi rho) / (pi rho)        (-> 2 at rho = 0)
//   d=2: J_1(2 pi rho) / rho             (-> pi at rho = 0)
// Both are the closed radial forms of rho^{-d/2} J_{d/2}(2 pi rho).
double ball_transform(int d, double rho);

// Global envelope |ball_transform(d, rho)| <= C_d (1 + rho)^{-(d+1)/2}.
// C_1 = 2.1, C_2 = 3.5; the suprema of |transform| (1+rho)^{(d+1)/2} are
// ~2.06 (d=1, near rho = 0.1) and ~3.37 (d=2, near rho = 0.12), the decay
// branch is dominated by the Bessel amplitude (2/(pi 2 pi rho))^{1/2} rho^{-d/2},
// and a dense-grid scan test pins both constants.
double ball_envelope_const(int d);

// Sharper large-rho envelope |ball_transform(d, rho)| <= A_d rho^{-(d+1)/2}
// valid for rho >= 1: A_1 = 1/pi (|sin| <= 1, exact), A_2 = 0.34
// (Bessel amplitude 1/pi plus its first-order correction; scan-tested).
double ball_envelope_sharp(int d);

// Closed-form bound on int_{|xi| > Xi} |ball_transform|^q dxi from the
// global envelope:
//   sigma_d C_d^q (1 + Xi)^{-(s-d)} / (s - d),  s = q (d+1)/2,
// with sigma_1 = 2, sigma_2 = 2 pi the boundary measures. Requires s > d.
double tail_bound(int d, double q, double xi);

// Same shape of bound for an arbitrary envelope power p (the kernel
// truncation budgets use p = q-1 and q-2): bounds
// int_{|xi| > Xi} |ball_transform|^p dxi using the sharp constant A_d,
// valid for Xi >= 1. Requires p (d+1)/2 > d.
double envelope_tail(int d, double p, double xi);

}  // namespace hylab
