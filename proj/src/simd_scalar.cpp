#include <cstdlib>
#include <cstring>

#include "ponsim/simd.hpp"

namespace ponsim::simd {

namespace scalar {

void idle_times(const IdleBatch& in, std::uint64_t guard, std::uint64_t* out) {
  const auto g = static_cast<std::int64_t>(guard);
  for (std::size_t i = 0; i < in.size; ++i) {
    const auto d = static_cast<std::int64_t>(in.gamma[i] + in.gate_delay[i]) -
                   static_cast<std::int64_t>(in.omega[i]);
    out[i] = static_cast<std::uint64_t>(d > g ? d : g);
  }
}

void delta_idle(const DeltaBatch& in, std::uint8_t* kind, std::uint64_t* delta) {
  for (std::size_t i = 0; i < in.size; ++i) {
    const std::uint64_t floor = in.omega[i] + in.guard[i];
    const std::uint64_t end_arrival = in.gamma_b[i] + in.gate_delay[i];
    const std::uint64_t begin_arrival = in.gamma_a[i] + in.gate_delay[i];
    if (end_arrival <= floor) {
      kind[i] = 1;
      delta[i] = 0;
    } else if (begin_arrival >= floor) {
      kind[i] = 3;
      delta[i] = in.gamma_b[i] - in.gamma_a[i];
    } else {
      kind[i] = 2;
      delta[i] = end_arrival - floor;
    }
  }
}

std::size_t count_mismatches(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < n; ++i) bad += a[i] != b[i];
  return bad;
}

}  // namespace scalar

std::string_view to_string(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

bool avx2_available() noexcept {
#if defined(PONSIM_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend active_backend() noexcept {
  static const Backend chosen = [] {
    const char* forced = std::getenv("PONSIM_SIMD");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return Backend::Scalar;
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
  }();
  return chosen;
}

void idle_times(const IdleBatch& in, std::uint64_t guard, std::uint64_t* out) {
#if defined(PONSIM_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::idle_times(in, guard, out);
#endif
  scalar::idle_times(in, guard, out);
}

void delta_idle(const DeltaBatch& in, std::uint8_t* kind, std::uint64_t* delta) {
#if defined(PONSIM_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::delta_idle(in, kind, delta);
#endif
  scalar::delta_idle(in, kind, delta);
}

std::size_t count_mismatches(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
#if defined(PONSIM_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::count_mismatches(a, b, n);
#endif
  return scalar::count_mismatches(a, b, n);
}

}  // namespace ponsim::simd
