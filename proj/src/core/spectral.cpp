#include "core/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "core/kernels.hpp"
#include "core/numerics.hpp"

namespace hylab {
namespace {

constexpr double kPi = 3.14159265358979323846;

double l_mass_2b(double q, int d) {
  const auto ll = kernel_registry(KernelKind::kL, q, d);
  const Quadrature gl = gauss_legendre(20);
  double total = 0.0;
  for (int p = 0; p < 8; ++p) {
    const double lo = 0.25 * p, c = lo + 0.125;
    double acc = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double r = c + 0.125 * gl.nodes[k];
      const double jac = d == 1 ? 2.0 : 2.0 * kPi * r;
      acc += gl.weights[k] * jac * (*ll)(r);
    }
    total += 0.125 * acc;
  }
  return total;
}

Eigen::Map<const Eigen::MatrixXd> as_matrix(const OperatorT& t) {
  return {t.s.data(), t.n, t.n};
}

// Matrix of the quadratic form Phi in the u-frame.
Eigen::MatrixXd form_matrix(const OperatorT& t) {
  const auto s = as_matrix(t);
  Eigen::MatrixXd sr(t.n, t.n);
  for (int j = 0; j < t.n; ++j) sr.col(j) = s.col(t.reflect[j]);
  Eigen::MatrixXd m = 0.25 * t.q * t.q * s - 0.25 * t.q * (t.q - 2.0) * sr;
  m.diagonal().array() -= 0.5 * t.q;
  return m;
}

Parity classify(const OperatorT& t, std::span<const double> v, double* minority) {
  double even2 = 0.0, odd2 = 0.0;
  for (int i = 0; i < t.n; ++i) {
    const double e = 0.5 * (v[i] + v[t.reflect[i]]);
    const double o = 0.5 * (v[i] - v[t.reflect[i]]);
    even2 += e * e;
    odd2 += o * o;
  }
  const double total = even2 + odd2;
  *minority = total > 0.0 ? std::min(even2, odd2) / total : 0.0;
  if (*minority > 1e-6) return Parity::kMixed;
  return even2 >= odd2 ? Parity::kEven : Parity::kOdd;
}

struct GapCore {
  double c = 0.0;
  double null_residual = 0.0;
};

GapCore gap_at(const OperatorT& t) {
  const SubspaceH h = subspace_h(t);
  const int m = static_cast<int>(h.basis.size());
  Eigen::MatrixXd b(t.n, m);
  for (int k = 0; k < m; ++k)
    b.col(k) = Eigen::Map<const Eigen::VectorXd>(h.basis[k].data(), t.n);

  const Eigen::MatrixXd mm = form_matrix(t);
  const Eigen::MatrixXd mb = mm * b;                  // n x m
  const Eigen::MatrixXd btmb = b.transpose() * mb;    // m x m
  Eigen::MatrixXd proj = mm;
  proj.noalias() -= b * mb.transpose();
  proj.noalias() -= mb * b.transpose();
  proj.noalias() += b * (btmb * b.transpose());
  proj.noalias() -= t.q * (b * b.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj,
                                                    Eigen::EigenvaluesOnly);
  GapCore out;
  out.c = -es.eigenvalues().maxCoeff();
  for (int k = 0; k < m; ++k)
    out.null_residual =
        std::max(out.null_residual, std::abs(qform(t, h.basis[k])));
  return out;
}

}  // namespace

void OperatorT::apply(std::span<const double> u, std::span<double> out) const {
  for (int i = 0; i < n; ++i) {
    const double* row = s.data() + static_cast<std::size_t>(i) * n;
    out[i] = std::inner_product(row, row + n, u.data(), 0.0);
  }
}

double OperatorT::dot_apply(std::span<const double> u,
                            std::span<const double> v) const {
  std::vector<double> tv(n);
  apply(v, tv);
  return std::inner_product(u.begin(), u.end(), tv.begin(), 0.0);
}

OperatorT build_t(double q, int d, const SpectralOptions& opt) {
  if (!(q > 3.0)) throw std::invalid_argument("build_t: requires q > 3");
  if (d != 1 && d != 2) throw std::invalid_argument("build_t: d must be 1 or 2");

  OperatorT t;
  t.q = q;
  t.d = d;
  if (d == 1) {
    const int n = opt.grid_n > 0 ? opt.grid_n : 512;
    t.n = n;
    const double h = 2.0 / n;
    for (int i = 0; i < n; ++i) {
      t.pts.push_back({-1.0 + (i + 0.5) * h, 0.0});
      t.w.push_back(h);
      t.reflect.push_back(n - 1 - i);
    }
  } else {
    const int nr = opt.grid_n > 0 ? opt.grid_n : 48;
    const int na = opt.angular_n;
    if (na < 4 || na % 2 != 0)
      throw std::invalid_argument("build_t: angular_n must be even and >= 4");
    t.n = nr * na;
    const double dr = 1.0 / nr, da = 2.0 * kPi / na;
    for (int j = 0; j < nr; ++j)
      for (int k = 0; k < na; ++k) {
        const double r = (j + 0.5) * dr, a = (k + 0.5) * da;
        t.pts.push_back({r * std::cos(a), r * std::sin(a)});
        t.w.push_back(r * dr * da);
        t.reflect.push_back(j * na + (k + na / 2) % na);
      }
  }

  const auto kk = kernel_registry(KernelKind::kK, q, d);
  const auto ll = kernel_registry(KernelKind::kL, q, d);
  std::vector<double> factor(t.n);
  double kmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < t.n; ++i) {
    const double r = std::hypot(t.pts[i][0], t.pts[i][1]);
    const double kv = (*kk)(r);
    if (!(kv > 0.0))
      throw std::runtime_error("build_t: K not positive on the ball grid");
    kmin = std::min(kmin, kv);
    factor[i] = std::sqrt(t.w[i]) / std::sqrt(kv);
  }
  t.norm_bound = l_mass_2b(q, d) / kmin;

  t.s.resize(static_cast<std::size_t>(t.n) * t.n);
  parallel_for(t.n, [&](std::size_t i) {
    double* row = t.s.data() + i * t.n;
    for (int j = 0; j < t.n; ++j) {
      const double dx = t.pts[i][0] - t.pts[j][0];
      const double dy = t.pts[i][1] - t.pts[j][1];
      row[j] = factor[i] * factor[j] * (*ll)(std::hypot(dx, dy));
    }
  });

  double num = 0.0, den = 0.0;
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j) {
      const double a = t.s[static_cast<std::size_t>(i) * t.n + j];
      const double bt = t.s[static_cast<std::size_t>(j) * t.n + i];
      num += (a - bt) * (a - bt);
      den += a * a;
    }
  t.asymmetry = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return t;
}

EigenSystem eigensystem(const OperatorT& t, int k) {
  const auto s = as_matrix(t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensystem: eigensolver failed");

  std::vector<int> order(t.n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = std::abs(es.eigenvalues()[a]);
    const double vb = std::abs(es.eigenvalues()[b]);
    if (va != vb) return va > vb;
    return a < b;
  });

  const SubspaceH h = subspace_h(t);
  EigenSystem out;
  const int keep = std::min(k, t.n);
  for (int idx = 0; idx < keep; ++idx) {
    const int col = order[idx];
    const double lambda = es.eigenvalues()[col];
    std::vector<double> v(t.n);
    Eigen::Map<Eigen::VectorXd>(v.data(), t.n) = es.eigenvectors().col(col);

    double minority = 0.0;
    Parity p = classify(t, v, &minority);
    if (p == Parity::kMixed) {
      // Degenerate pair: try the dominant parity component; accept it only
      // if it is still an eigenvector.
      std::vector<double> proj(t.n);
      double even2 = 0.0, odd2 = 0.0;
      for (int i = 0; i < t.n; ++i) {
        const double e = 0.5 * (v[i] + v[t.reflect[i]]);
        even2 += e * e;
        odd2 += (v[i] - e) * (v[i] - e);
      }
      const bool pick_even = even2 >= odd2;
      for (int i = 0; i < t.n; ++i)
        proj[i] = pick_even ? 0.5 * (v[i] + v[t.reflect[i]])
                            : 0.5 * (v[i] - v[t.reflect[i]]);
      const double nrm = std::sqrt(pick_even ? even2 : odd2);
      if (nrm > 1e-12) {
        for (double& x : proj) x /= nrm;
        std::vector<double> tv(t.n);
        t.apply(proj, tv);
        double resid = 0.0;
        for (int i = 0; i < t.n; ++i)
          resid += (tv[i] - lambda * proj[i]) * (tv[i] - lambda * proj[i]);
        if (std::sqrt(resid) <= 1e-8 * std::max(1.0, std::abs(lambda))) {
          v = proj;
          p = pick_even ? Parity::kEven : Parity::kOdd;
        }
      }
    }

    double overlap = 0.0;
    for (const auto& b : h.basis) {
      const double c =
          std::inner_product(b.begin(), b.end(), v.begin(), 0.0);
      overlap += c * c;
    }
    out.values.push_back(lambda);
    out.vectors.push_back(std::move(v));
    out.parity.push_back(p);
    out.h_overlap.push_back(overlap);
  }

  double num = 0.0, den = 0.0;
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j) {
      // (S R)[i][j] - (R S)[i][j]
      const double a = t.s[static_cast<std::size_t>(i) * t.n + t.reflect[j]];
      const double bt = t.s[static_cast<std::size_t>(t.reflect[i]) * t.n + j];
      num += (a - bt) * (a - bt);
      den += a * a;
    }
  out.reflect_commutator = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return out;
}

SubspaceH subspace_h(const OperatorT& t) {
  const auto kk = kernel_registry(KernelKind::kK, t.q, t.d);
  const int m = t.d + 1;
  std::vector<std::vector<double>> raw(m, std::vector<double>(t.n));
  for (int i = 0; i < t.n; ++i) {
    const double r = std::hypot(t.pts[i][0], t.pts[i][1]);
    const double base = std::sqrt(t.w[i]) * std::sqrt((*kk)(r));
    raw[0][i] = base;
    raw[1][i] = base * t.pts[i][0];
    if (t.d == 2) raw[2][i] = base * t.pts[i][1];
  }

  Eigen::MatrixXd g(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      g(a, b) = std::inner_product(raw[a].begin(), raw[a].end(),
                                   raw[b].begin(), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  SubspaceH out;
  out.gram_cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();

  // Modified Gram-Schmidt; the raw vectors are near-orthogonal by parity.
  out.basis = raw;
  for (int a = 0; a < m; ++a) {
    auto& va = out.basis[a];
    for (int b = 0; b < a; ++b) {
      const auto& vb = out.basis[b];
      const double c =
          std::inner_product(vb.begin(), vb.end(), va.begin(), 0.0);
      for (int i = 0; i < t.n; ++i) va[i] -= c * vb[i];
    }
    const double nrm = std::sqrt(
        std::inner_product(va.begin(), va.end(), va.begin(), 0.0));
    if (!(nrm > 0.0))
      throw std::runtime_error("subspace_h: degenerate basis");
    for (double& x : va) x /= nrm;
  }
  return out;
}

Projection project_h(const SubspaceH& h, std::span<const double> u) {
  Projection out;
  std::vector<double> rest(u.begin(), u.end());
  for (const auto& b : h.basis) {
    const double c = std::inner_product(b.begin(), b.end(), u.begin(), 0.0);
    out.coeffs.push_back(c);
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= c * b[i];
  }
  double in2 = 0.0;
  for (double c : out.coeffs) in2 += c * c;
  out.in_norm = std::sqrt(in2);
  out.out_norm = std::sqrt(
      std::inner_product(rest.begin(), rest.end(), rest.begin(), 0.0));
  return out;
}

double qform(const OperatorT& t, std::span<const double> u) {
  std::vector<double> ru(t.n);
  for (int i = 0; i < t.n; ++i) ru[i] = u[t.reflect[i]];
  const double uu = std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
  return -0.5 * t.q * uu - 0.25 * t.q * (t.q - 2.0) * t.dot_apply(u, ru) +
         0.25 * t.q * t.q * t.dot_apply(u, u);
}

GapReport gap_estimate(double q, int d, const SpectralOptions& opt) {
  GapReport rep;
  rep.q = q;
  rep.d = d;
  SpectralOptions fine = opt;
  fine.grid_n = opt.grid_n > 0 ? opt.grid_n : (d == 1 ? 512 : 48);
  SpectralOptions coarse = fine;
  coarse.grid_n = std::max(fine.grid_n / 2, d == 1 ? 64 : 12);
  rep.n = fine.grid_n;

  const OperatorT tf = build_t(q, d, fine);
  const GapCore gf = gap_at(tf);
  const GapCore gc = gap_at(build_t(q, d, coarse));
  rep.c = gf.c;
  rep.c_coarse = gc.c;
  rep.null_residual = gf.null_residual;
  rep.drift = std::abs(gf.c - gc.c) / std::max(std::abs(gf.c), 1e-300);
  rep.positive = gf.c > 0.0 && gc.c > 0.0;

  const EigenSystem es = eigensystem(tf, tf.n);
  const double cut = 1.0 / (q - 1.0);
  rep.truncation_n = tf.n;
  for (std::size_t i = 0; i < es.values.size(); ++i)
    if (std::abs(es.values[i]) < cut) {
      rep.truncation_n = static_cast<int>(i) + 1;
      break;
    }
  return rep;
}

}  // namespace hylab
