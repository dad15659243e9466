#include "core/kernels.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace hylab;

namespace {

// Closed forms for the d=1, q=4 kernels. L is the autocorrelation of the
// interval indicator, K its further convolution with the indicator:
//   L(r) = (2 - |r|)_+
//   K(r) = 3 - r^2 on [0,1],  (3 - r)^2 / 2 on [1,3],  0 beyond.
double l4_exact(double r) {
  r = std::abs(r);
  return r < 2.0 ? 2.0 - r : 0.0;
}

double k4_exact(double r) {
  r = std::abs(r);
  if (r <= 1.0) return 3.0 - r * r;
  if (r <= 3.0) return 0.5 * (3.0 - r) * (3.0 - r);
  return 0.0;
}

}  // namespace

TEST_CASE("d=1 q=4 kernels match their closed forms") {
  auto k = kernel_registry(KernelKind::kK, 4.0, 1);
  auto l = kernel_registry(KernelKind::kL, 4.0, 1);
  // The sampled inversion is exact to rounding away from the kinks of the
  // piecewise forms; the cubic interpolant smooths a kink over a couple of
  // sample spacings, so those neighborhoods get their own bar.
  double k_smooth = 0.0, k_kink = 0.0, l_smooth = 0.0, l_kink = 0.0;
  for (int i = 0; i <= 3000; ++i) {
    const double r = 0.001 * i;
    const double ek = std::abs((*k)(r) - k4_exact(r));
    const double el = std::abs((*l)(r) - l4_exact(r));
    const bool near_k = r < 0.05 || std::abs(r - 1.0) < 0.05 ||
                        std::abs(r - 3.0) < 0.05;
    const bool near_l = r < 0.05 || std::abs(r - 2.0) < 0.05;
    (near_k ? k_kink : k_smooth) = std::max(near_k ? k_kink : k_smooth, ek);
    (near_l ? l_kink : l_smooth) = std::max(near_l ? l_kink : l_smooth, el);
  }
  CHECK(k_smooth < 1e-10);
  CHECK(l_smooth < 1e-10);
  CHECK(k_kink < 5e-5);
  CHECK(l_kink < 5e-3);
  CHECK(std::abs((*k)(0.0) - 3.0) < 1e-6);
  CHECK(std::abs((*l)(0.0) - 2.0) < 1e-6);
  // Structural zero beyond the convolution support.
  CHECK((*k)(3.05) == 0.0);
  CHECK((*k)(4.2) == 0.0);
  CHECK((*l)(2.05) == 0.0);
  // Evenness via the stored radial profile.
  CHECK((*k)(-0.7) == (*k)(0.7));
}

TEST_CASE("kernels agree with the convolution oracle") {
  for (KernelKind kind : {KernelKind::kK, KernelKind::kL}) {
    auto k = kernel_registry(kind, 4.0, 1);
    double worst = 0.0;
    for (int i = 0; i <= 30; ++i) {
      const double r = 0.1 * i;
      worst = std::max(worst, std::abs((*k)(r) - convolution_oracle(kind, 4, 1, r)));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("d=2 kernels agree with the convolution oracle at spot radii") {
  auto k = kernel_registry(KernelKind::kK, 4.0, 2);
  auto l = kernel_registry(KernelKind::kL, 4.0, 2);
  // The planar oracle rasterizes the disk at h = 1/128, so its own
  // resolution sets the bar, worst where the autocorrelation peaks.
  for (double r : {0.0, 0.5, 1.3, 2.1}) {
    CHECK(std::abs((*k)(r) - convolution_oracle(KernelKind::kK, 4, 2, r)) < 1e-3);
    CHECK(std::abs((*l)(r) - convolution_oracle(KernelKind::kL, 4, 2, r)) <
          (r == 0.0 ? 2e-2 : 1e-3));
  }
  // Sharper anchor than the rasterized oracle: the autocorrelation of the
  // disk at the origin is its area.
  CHECK(std::abs((*l)(0.0) - std::numbers::pi) < 5e-4);
  CHECK((*k)(3.05) == 0.0);
  CHECK((*l)(2.05) == 0.0);
}

TEST_CASE("registry memoizes and stamps a stable config hash") {
  auto a = kernel_registry(KernelKind::kK, 4.0, 1);
  auto b = kernel_registry(KernelKind::kK, 4.0, 1);
  CHECK(a.get() == b.get());
  CHECK(a->info().config_hash == b->info().config_hash);
  CHECK(a->info().tail_radius == 3.0);
  CHECK(a->info().q == 4.0);
  auto l = kernel_registry(KernelKind::kL, 4.0, 1);
  CHECK(l->info().tail_radius == 2.0);
  CHECK(l->info().config_hash != a->info().config_hash);
}

TEST_CASE("kernel csv round-trips through disk") {
  auto k = kernel_registry(KernelKind::kK, 4.0, 1);
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "hylab_kernel_roundtrip.csv";
  write_kernel_csv(*k, path.string());
  const Kernel back = read_kernel_csv(path.string());
  CHECK(back.info().config_hash == k->info().config_hash);
  CHECK(back.info().dr == k->info().dr);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = 0.03 * i;
    worst = std::max(worst, std::abs(back(r) - (*k)(r)));
  }
  CHECK(worst == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("kernel distance is a metric-like gauge") {
  auto k = kernel_registry(KernelKind::kK, 4.0, 1);
  auto l = kernel_registry(KernelKind::kL, 4.0, 1);
  CHECK(kernel_distance(*k, *k, 3.0) == 0.0);
  CHECK(kernel_distance(*k, *l, 2.0) > 0.5);
}

TEST_CASE("K is strictly decreasing with a separated min-max gap") {
  const MonotoneReport rep = check_K_monotone(4.0, 1);
  CHECK(rep.pass);
  CHECK(rep.decreasing);
  CHECK(rep.max_forward_diff < 0.0);
  REQUIRE(rep.gaps.size() == 3);
  CHECK(rep.gaps[0].delta == 0.05);
  CHECK(rep.gaps[1].delta == 0.1);
  CHECK(rep.gaps[2].delta == 0.2);
  for (const auto& g : rep.gaps) {
    CHECK(g.pass);
    CHECK(g.min_low > g.max_high);
  }
}

TEST_CASE("monotone check rejects exponents outside its neighborhood") {
  CHECK_THROWS(check_K_monotone(3.0, 1));
  CHECK_THROWS(check_K_monotone(5.0, 1));
  CHECK_NOTHROW(check_K_monotone(4.05, 1));
}

TEST_CASE("convolution oracle validates its arguments") {
  CHECK_THROWS(convolution_oracle(KernelKind::kK, 3, 1, 0.5));
  CHECK_THROWS(convolution_oracle(KernelKind::kK, 4, 3, 0.5));
}
