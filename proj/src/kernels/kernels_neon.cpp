#include "locq/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace locq::kernels {

// Lane-wise the identical add chain and final multiply as the scalar
// variant; vaddq/vmulq only, no fused ops, so results are bitwise equal.
void sweep_region_neon(const double* src, double* dst, long stride_i,
                       long stride_j, double c, const Region& r) {
  const float64x2_t vc = vdupq_n_f64(c);
  for (long i = r.i0; i < r.i1; ++i) {
    for (long j = r.j0; j < r.j1; ++j) {
      const double* s = src + i * stride_i + j * stride_j;
      double* d = dst + i * stride_i + j * stride_j;
      long k = r.k0;
      for (; k + 2 <= r.k1; k += 2) {
        float64x2_t sum =
            vaddq_f64(vld1q_f64(s + k - stride_i), vld1q_f64(s + k + stride_i));
        sum = vaddq_f64(sum, vld1q_f64(s + k - stride_j));
        sum = vaddq_f64(sum, vld1q_f64(s + k + stride_j));
        sum = vaddq_f64(sum, vld1q_f64(s + k - 1));
        sum = vaddq_f64(sum, vld1q_f64(s + k + 1));
        vst1q_f64(d + k, vmulq_f64(sum, vc));
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

#endif  // aarch64
