#include "locq/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace locq::kernels {

namespace {

constexpr int kAuto = -1;
std::atomic<int> g_forced{kAuto};

Variant best_available() {
#if defined(__x86_64__) || defined(_M_X64)
  if (variant_available(Variant::avx2)) return Variant::avx2;
#endif
#if defined(__aarch64__)
  return Variant::neon;
#endif
  return Variant::scalar;
}

// The environment override is captured once, at first dispatch.
Variant env_or_best() {
  static const Variant v = [] {
    const char* e = std::getenv("LOCQ_KERNEL");
    if (!e || !*e || std::string(e) == "auto") return best_available();
    const auto parsed = variant_from_string(e);
    if (!parsed)
      throw std::runtime_error(std::string("LOCQ_KERNEL: unknown variant '") +
                               e + "'");
    if (!variant_available(*parsed))
      throw std::runtime_error(std::string("LOCQ_KERNEL: variant '") + e +
                               "' is not available on this machine");
    return *parsed;
  }();
  return v;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::scalar:
      return "scalar";
    case Variant::avx2:
      return "avx2";
    case Variant::neon:
      return "neon";
  }
  return "?";
}

std::optional<Variant> variant_from_string(const std::string& s) {
  if (s == "scalar") return Variant::scalar;
  if (s == "avx2") return Variant::avx2;
  if (s == "neon") return Variant::neon;
  return std::nullopt;
}

bool variant_available(Variant v) {
  switch (v) {
    case Variant::scalar:
      return true;
    case Variant::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Variant::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

void force_variant(std::optional<Variant> v) {
  if (!v) {
    g_forced.store(kAuto);
    return;
  }
  if (!variant_available(*v))
    throw std::runtime_error(std::string("kernel variant '") +
                             variant_name(*v) +
                             "' is not available on this machine");
  g_forced.store(static_cast<int>(*v));
}

Variant active_variant() {
  const int forced = g_forced.load();
  if (forced != kAuto) return static_cast<Variant>(forced);
  return env_or_best();
}

SweepFn sweep_fn(Variant v) {
  if (!variant_available(v))
    throw std::runtime_error(std::string("kernel variant '") +
                             variant_name(v) +
                             "' is not available on this machine");
  switch (v) {
    case Variant::scalar:
      return &sweep_region_scalar;
    case Variant::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &sweep_region_avx2;
#else
      break;
#endif
    case Variant::neon:
#if defined(__aarch64__)
      return &sweep_region_neon;
#else
      break;
#endif
  }
  return &sweep_region_scalar;  // unreachable
}

SweepFn active_sweep() { return sweep_fn(active_variant()); }

}  // namespace locq::kernels
