#include "locq/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace locq::kernels {

// Lane-wise the identical add chain and final multiply as the scalar
// variant; no FMA (this file is built with -mno-fma and contraction off),
// so results are bitwise equal.
void sweep_region_avx2(const double* src, double* dst, long stride_i,
                       long stride_j, double c, const Region& r) {
  const __m256d vc = _mm256_set1_pd(c);
  for (long i = r.i0; i < r.i1; ++i) {
    for (long j = r.j0; j < r.j1; ++j) {
      const double* s = src + i * stride_i + j * stride_j;
      double* d = dst + i * stride_i + j * stride_j;
      long k = r.k0;
      for (; k + 4 <= r.k1; k += 4) {
        __m256d sum = _mm256_add_pd(_mm256_loadu_pd(s + k - stride_i),
                                    _mm256_loadu_pd(s + k + stride_i));
        sum = _mm256_add_pd(sum, _mm256_loadu_pd(s + k - stride_j));
        sum = _mm256_add_pd(sum, _mm256_loadu_pd(s + k + stride_j));
        sum = _mm256_add_pd(sum, _mm256_loadu_pd(s + k - 1));
        sum = _mm256_add_pd(sum, _mm256_loadu_pd(s + k + 1));
        _mm256_storeu_pd(d + k, _mm256_mul_pd(sum, vc));
      }
      for (; k < r.k1; ++k) {
        d[k] = c * (((((s[k - stride_i] + s[k + stride_i]) + s[k - stride_j]) +
                      s[k + stride_j]) +
                     s[k - 1]) +
                    s[k + 1]);
      }
    }
  }
}

}  // namespace locq::kernels

#endif  // x86_64
