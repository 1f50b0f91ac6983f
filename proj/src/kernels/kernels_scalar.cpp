#include "locq/kernels.hpp"

namespace locq::kernels {

// The association is fixed: (i-pair, then j, then k, left to right), final
// multiply by c. Every variant reproduces exactly this expression per site.
void sweep_region_scalar(const double* src, double* dst, long stride_i,
                         long stride_j, double c, const Region& r) {
  for (long i = r.i0; i < r.i1; ++i) {
    for (long j = r.j0; j < r.j1; ++j) {
      const double* s = src + i * stride_i + j * stride_j;
      double* d = dst + i * stride_i + j * stride_j;
      for (long k = r.k0; k < r.k1; ++k) {
        d[k] = c * (((((s[k - stride_i] + s[k + stride_i]) + s[k - stride_j]) +
                      s[k + stride_j]) +
                     s[k - 1]) +
                    s[k + 1]);
      }
    }
  }
}

}  // namespace locq::kernels
