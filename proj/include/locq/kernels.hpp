#pragma once

#include <optional>
#include <string>

namespace locq::kernels {

/// Half-open site bounds of one sweep region, in padded coordinates.
struct Region {
  long i0, i1;
  long j0, j1;
  long k0, k1;
};

/// Sweeps one region: dst = c * (six-neighbor sum of src). All variants
/// evaluate the sum in the same fixed association (i pair, then j, then k)
/// so their outputs are bitwise identical.
using SweepFn = void (*)(const double* src, double* dst, long stride_i,
                         long stride_j, double c, const Region& r);

enum class Variant { scalar, avx2, neon };

const char* variant_name(Variant v);
std::optional<Variant> variant_from_string(const std::string& s);

/// True when the variant exists in this build and the CPU supports it.
bool variant_available(Variant v);

/// Pins the dispatch to one variant; throws std::runtime_error when it is
/// unavailable. nullopt restores automatic selection.
void force_variant(std::optional<Variant> v);

/// The variant the dispatcher currently resolves to. Order of precedence:
/// force_variant(), the LOCQ_KERNEL environment variable, best available.
Variant active_variant();

SweepFn active_sweep();
SweepFn sweep_fn(Variant v);

void sweep_region_scalar(const double* src, double* dst, long stride_i,
                         long stride_j, double c, const Region& r);
#if defined(__x86_64__) || defined(_M_X64)
void sweep_region_avx2(const double* src, double* dst, long stride_i,
                       long stride_j, double c, const Region& r);
#endif
#if defined(__aarch64__)
void sweep_region_neon(const double* src, double* dst, long stride_i,
                       long stride_j, double c, const Region& r);
#endif

}  // namespace locq::kernels
