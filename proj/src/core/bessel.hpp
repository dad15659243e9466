#pragma once

namespace hylab {

// J_nu(x) for nu >= 0, x >= 0. Ascending power series below x = 12, Hankel
// asymptotic expansion above. The asymptotic truncation floor at the
// switchover is ~1e-10 absolute and shrinks rapidly with x; the series side
// loses ~3 digits to cancellation at x = 12. Callers needing better than
// 1e-9 absolute must stay on closed forms (half-integer orders reduce to
// trigonometry and are exact here: the expansion terminates).
double bessel_j(double nu, double x);

// Fixed-order fast paths used in quadrature loops. Same algorithm as
// bessel_j(0, x) / bessel_j(1, x).
double bessel_j0(double x);
double bessel_j1(double x);

}  // namespace hylab
