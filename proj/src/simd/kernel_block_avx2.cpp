#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "nlmol/simd/kernel_block.hpp"

namespace nlmol::simd {

// Same operation order as kernel_row_scalar; both files are built without
// floating-point contraction so the results agree bit for bit.
void kernel_row_avx2(const double p[3], const PointBlock& block, const ShellParams& shell,
                     double scale, double* out) {
  const __m256d px = _mm256_set1_pd(p[0]);
  const __m256d py = _mm256_set1_pd(p[1]);
  const __m256d pz = _mm256_set1_pd(p[2]);
  const __m256d delta = _mm256_set1_pd(shell.delta);
  const __m256d inv_eps = _mm256_set1_pd(shell.inv_eps);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d minus_one = _mm256_set1_pd(-1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d c315 = _mm256_set1_pd(315.0);
  const __m256d c420 = _mm256_set1_pd(-420.0);
  const __m256d c378 = _mm256_set1_pd(378.0);
  const __m256d c180 = _mm256_set1_pd(-180.0);
  const __m256d c35 = _mm256_set1_pd(35.0);
  const __m256d c128 = _mm256_set1_pd(128.0);
  const __m256d inv256 = _mm256_set1_pd(1.0 / 256.0);
  const __m256d vscale = _mm256_set1_pd(scale);

  std::size_t q = 0;
  for (; q + 4 <= block.n; q += 4) {
    const __m256d dx = _mm256_sub_pd(px, _mm256_loadu_pd(block.x + q));
    const __m256d dy = _mm256_sub_pd(py, _mm256_loadu_pd(block.y + q));
    __m256d s = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    if (block.z != nullptr) {
      const __m256d dz = _mm256_sub_pd(pz, _mm256_loadu_pd(block.z + q));
      s = _mm256_add_pd(s, _mm256_mul_pd(dz, dz));
    }
    const __m256d d = _mm256_sqrt_pd(s);
    __m256d mu;
    if (shell.sharp) {
      mu = _mm256_blendv_pd(zero, one, _mm256_cmp_pd(d, delta, _CMP_LE_OQ));
    } else {
      __m256d r = _mm256_mul_pd(_mm256_sub_pd(delta, d), inv_eps);
      r = _mm256_min_pd(one, _mm256_max_pd(minus_one, r));
      const __m256d r2 = _mm256_mul_pd(r, r);
      __m256d h = _mm256_add_pd(c180, _mm256_mul_pd(r2, c35));
      h = _mm256_add_pd(c378, _mm256_mul_pd(r2, h));
      h = _mm256_add_pd(c420, _mm256_mul_pd(r2, h));
      h = _mm256_add_pd(c315, _mm256_mul_pd(r2, h));
      const __m256d odd = _mm256_mul_pd(r, h);
      mu = _mm256_mul_pd(_mm256_add_pd(c128, odd), inv256);
    }
    const __m256d v = _mm256_mul_pd(_mm256_mul_pd(vscale, mu), _mm256_loadu_pd(block.w + q));
    _mm256_storeu_pd(out + q, v);
  }
  if (q < block.n) {
    PointBlock tail = block;
    tail.x += q;
    tail.y += q;
    if (tail.z != nullptr) tail.z += q;
    tail.w += q;
    tail.n = block.n - q;
    kernel_row_scalar(p, tail, shell, scale, out + q);
  }
}

}  // namespace nlmol::simd
