#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <vector>

#include "nlmol/kernel.hpp"
#include "nlmol/simd/kernel_block.hpp"

using namespace nlmol;

namespace {

struct Block {
  std::vector<double> x, y, z, w;
};

Block random_block(std::mt19937_64& rng, std::size_t n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread), pw(0.0, 1.0);
  Block b;
  for (std::size_t i = 0; i < n; ++i) {
    b.x.push_back(u(rng));
    b.y.push_back(u(rng));
    b.z.push_back(u(rng));
    b.w.push_back(pw(rng));
  }
  return b;
}

}  // namespace

TEST_CASE("scalar kernel row matches the mollifier") {
  std::mt19937_64 rng(11);
  const auto b = random_block(rng, 37, 0.3);
  const double p[3] = {0.01, -0.02, 0.03};
  for (double eps : {0.0, 0.05}) {
    const auto k = KernelParams::make(3, 0.2, eps);
    simd::ShellParams shell{0.2, eps > 0 ? 1.0 / eps : 0.0, eps == 0.0};
    std::vector<double> out(b.x.size());
    simd::kernel_row_scalar(p, {b.x.data(), b.y.data(), b.z.data(), b.w.data(), b.x.size()}, shell, 2.5, out.data());
    for (std::size_t q = 0; q < out.size(); ++q) {
      const double d = std::sqrt((p[0] - b.x[q]) * (p[0] - b.x[q]) + (p[1] - b.y[q]) * (p[1] - b.y[q]) +
                                 (p[2] - b.z[q]) * (p[2] - b.z[q]));
      CHECK(out[q] == doctest::Approx(2.5 * mollifier(d, k) * b.w[q]).epsilon(1e-13));
    }
  }
}

TEST_CASE("AVX2 kernel row is bit-identical to the scalar row") {
  if (simd::detected_level() != simd::Level::avx2) {
    MESSAGE("AVX2 not available; skipped");
    return;
  }
  std::mt19937_64 rng(5);
  for (std::size_t n : {1u, 3u, 4u, 7u, 9u, 27u, 64u, 125u}) {
    for (bool three_d : {false, true})
      for (double eps : {0.0, 0.0125, 0.05}) {
        const auto b = random_block(rng, n, 0.3);
        const double p[3] = {0.02, 0.01, three_d ? -0.03 : 0.0};
        simd::ShellParams shell{0.2, eps > 0 ? 1.0 / eps : 0.0, eps == 0.0};
        simd::PointBlock blk{b.x.data(), b.y.data(), three_d ? b.z.data() : nullptr, b.w.data(), n};
        std::vector<double> a(n), v(n);
        simd::kernel_row_scalar(p, blk, shell, 1.7, a.data());
        simd::kernel_row_avx2(p, blk, shell, 1.7, v.data());
        for (std::size_t q = 0; q < n; ++q) CHECK(a[q] == v[q]);
      }
  }
}

TEST_CASE("runtime level selection") {
  const auto before = simd::active_level();
  simd::set_level(simd::Level::scalar);
  CHECK(simd::active_level() == simd::Level::scalar);
  CHECK(simd::to_string(simd::Level::scalar) == "scalar");
  if (simd::detected_level() == simd::Level::avx2) {
    simd::set_level(simd::Level::avx2);
    CHECK(simd::active_level() == simd::Level::avx2);
  } else {
    CHECK_THROWS((simd::set_level(simd::Level::avx2)));
  }
  simd::set_level(before);
}
