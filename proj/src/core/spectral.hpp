#pragma once

#include <span>
#include <vector>

#include "core/trials.hpp"

namespace hylab {

// Discretization of the compact operator h -> K^{-1/2} ((K^{-1/2} h 1_B) * L)
// restricted to the ball, in the similarity frame u_i = sqrt(w_i) h(x_i)
// where the Euclidean dot product realizes the L^2(B) inner product. The
// matrix is symmetric by construction; `asymmetry` records the measured
// relative Frobenius defect as a build check.
struct OperatorT {
  double q = 0.0;
  int d = 1;
  int n = 0;  // matrix dimension (cells in d=1, radial x angular in d=2)
  std::vector<Point> pts;
  std::vector<double> w;
  std::vector<int> reflect;  // index of the antipodal node, exact on the grid
  std::vector<double> s;     // row-major n x n
  double asymmetry = 0.0;
  double norm_bound = 0.0;  // sup 1/K on B times the L1 mass of L on 2B

  void apply(std::span<const double> u, std::span<double> out) const;
  double dot_apply(std::span<const double> u, std::span<const double> v) const;
};

struct SpectralOptions {
  int grid_n = 0;         // d=1 cells, or d=2 radial cells; 0: 512 / 48
  int angular_n = 32;     // d=2 angular points (even; resolves modes <= 16)
};

OperatorT build_t(double q, int d, const SpectralOptions& opt = {});

enum class Parity { kEven, kOdd, kMixed };

struct EigenSystem {
  std::vector<double> values;                // sorted by decreasing |value|
  std::vector<std::vector<double>> vectors;  // unit vectors in the u-frame
  std::vector<Parity> parity;
  std::vector<double> h_overlap;  // squared overlap with the null subspace
  double reflect_commutator = 0.0;  // ||S R - R S||_F / ||S||_F
};

EigenSystem eigensystem(const OperatorT& t, int k);

// Orthonormal basis of span{K^{1/2}, K^{1/2} x_1, ..., K^{1/2} x_d} in the
// u-frame, built by a Gram solve on the grid itself so projections satisfy
// Pythagoras at grid level.
struct SubspaceH {
  std::vector<std::vector<double>> basis;  // d + 1 orthonormal vectors
  double gram_cond = 0.0;
};

SubspaceH subspace_h(const OperatorT& t);

struct Projection {
  std::vector<double> coeffs;  // against the orthonormal basis
  double in_norm = 0.0;        // ||P h||
  double out_norm = 0.0;       // ||(I - P) h||
};

Projection project_h(const SubspaceH& h, std::span<const double> u);

// The stability quadratic form
//   Phi(h) = -(q/2) ||h||^2 - (1/4) q (q-2) <h, T h~> + (1/4) q^2 <h, T h>
// with h~ the reflection. Negative semidefinite with null space exactly the
// subspace above; the gap estimate certifies the distance to zero on its
// orthogonal complement.
double qform(const OperatorT& t, std::span<const double> u);

struct GapReport {
  double q = 0.0;
  int d = 1;
  int n = 0;
  double c = 0.0;          // -max of Phi on the complement's unit sphere
  double c_coarse = 0.0;   // same at half resolution
  double drift = 0.0;      // |c - c_coarse| / max(c, eps)
  double null_residual = 0.0;  // max |Phi| over the subspace basis
  int truncation_n = 0;    // first eigenvalue index (1-based) below 1/(q-1)
  bool positive = false;
};

GapReport gap_estimate(double q, int d, const SpectralOptions& opt = {});

}  // namespace hylab
