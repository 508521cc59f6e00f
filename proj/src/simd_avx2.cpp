// Compiled with -mavx2; only reached after the run-time CPU check.
#include <immintrin.h>

#include <bit>

#include "ponsim/simd.hpp"

namespace ponsim::simd::avx2 {

namespace {

inline __m256i load(const std::uint64_t* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}

inline void store(std::uint64_t* p, __m256i v) {
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v);
}

}  // namespace

void idle_times(const IdleBatch& in, std::uint64_t guard, std::uint64_t* out) {
  const __m256i g = _mm256_set1_epi64x(static_cast<long long>(guard));
  std::size_t i = 0;
  for (; i + 4 <= in.size; i += 4) {
    const __m256i d = _mm256_sub_epi64(
        _mm256_add_epi64(load(in.gamma + i), load(in.gate_delay + i)), load(in.omega + i));
    store(out + i, _mm256_blendv_epi8(g, d, _mm256_cmpgt_epi64(d, g)));
  }
  if (i < in.size) {
    IdleBatch tail{in.gamma + i, in.gate_delay + i, in.omega + i, in.size - i};
    scalar::idle_times(tail, guard, out + i);
  }
}

void delta_idle(const DeltaBatch& in, std::uint8_t* kind, std::uint64_t* delta) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256i three = _mm256_set1_epi64x(3);
  alignas(32) std::uint64_t lanes[4];
  std::size_t i = 0;
  for (; i + 4 <= in.size; i += 4) {
    const __m256i ga = load(in.gamma_a + i);
    const __m256i gb = load(in.gamma_b + i);
    const __m256i t = load(in.gate_delay + i);
    const __m256i floor = _mm256_add_epi64(load(in.omega + i), load(in.guard + i));
    const __m256i end_arrival = _mm256_add_epi64(gb, t);
    const __m256i begin_arrival = _mm256_add_epi64(ga, t);

    // masked: end_arrival <= floor; full: begin_arrival >= floor.
    const __m256i masked = _mm256_xor_si256(_mm256_cmpgt_epi64(end_arrival, floor),
                                            _mm256_set1_epi64x(-1));
    const __m256i full = _mm256_xor_si256(_mm256_cmpgt_epi64(floor, begin_arrival),
                                          _mm256_set1_epi64x(-1));

    __m256i d = _mm256_sub_epi64(end_arrival, floor);
    __m256i k = two;
    d = _mm256_blendv_epi8(d, _mm256_sub_epi64(gb, ga), full);
    k = _mm256_blendv_epi8(k, three, full);
    d = _mm256_blendv_epi8(d, zero, masked);
    k = _mm256_blendv_epi8(k, one, masked);

    store(delta + i, d);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), k);
    for (int l = 0; l < 4; ++l) kind[i + l] = static_cast<std::uint8_t>(lanes[l]);
  }
  if (i < in.size) {
    DeltaBatch tail{in.gamma_a + i, in.gamma_b + i, in.gate_delay + i,
                    in.omega + i,   in.guard + i,   in.size - i};
    scalar::delta_idle(tail, kind + i, delta + i);
  }
}

std::size_t count_mismatches(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::size_t bad = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i eq = _mm256_cmpeq_epi64(load(a + i), load(b + i));
    const auto bits = static_cast<unsigned>(_mm256_movemask_pd(_mm256_castsi256_pd(eq)));
    bad += 4 - static_cast<std::size_t>(std::popcount(bits));
  }
  return bad + scalar::count_mismatches(a + i, b + i, n - i);
}

}  // namespace ponsim::simd::avx2
