#pragma once

// Batch idle-time kernels over structure-of-arrays tick counts. Every entry
// point has a scalar reference and an AVX2 variant with identical results;
// the variant is picked once at run time from the CPU.
//
// Inputs are tick counts below 2^62 so sums and differences fit in int64.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace ponsim::simd {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b);
bool avx2_available() noexcept;
/// Backend the dispatching entry points use. PONSIM_SIMD=scalar forces the
/// reference path.
Backend active_backend() noexcept;

struct IdleBatch {
  const std::uint64_t* gamma;
  const std::uint64_t* gate_delay;
  const std::uint64_t* omega;
  std::size_t size;
};

struct DeltaBatch {
  const std::uint64_t* gamma_a;
  const std::uint64_t* gamma_b;
  const std::uint64_t* gate_delay;
  const std::uint64_t* omega;
  const std::uint64_t* guard;
  std::size_t size;
};

/// out[i] = max(t_g, γ[i] + T[i] - Ω[i]).
void idle_times(const IdleBatch& in, std::uint64_t guard, std::uint64_t* out);
/// kind[i] is the DeltaCase value (1, 2, 3); delta[i] the idle reduction.
void delta_idle(const DeltaBatch& in, std::uint8_t* kind, std::uint64_t* delta);
/// Number of i with a[i] != b[i].
std::size_t count_mismatches(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);

namespace scalar {
void idle_times(const IdleBatch& in, std::uint64_t guard, std::uint64_t* out);
void delta_idle(const DeltaBatch& in, std::uint8_t* kind, std::uint64_t* delta);
std::size_t count_mismatches(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
}  // namespace scalar

#if defined(PONSIM_HAVE_AVX2)
namespace avx2 {
void idle_times(const IdleBatch& in, std::uint64_t guard, std::uint64_t* out);
void delta_idle(const DeltaBatch& in, std::uint8_t* kind, std::uint64_t* delta);
std::size_t count_mismatches(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace ponsim::simd
