// AVX2 variants of the voxel kernels. Compiled only on x86-64 with -mavx2
// (and -ffp-contract=off, so float arithmetic rounds exactly like the scalar
// reference). Selected at runtime via kern::active().

#include "cascade/kernels.hpp"

#if defined(CASCADE_HAVE_AVX2) && defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>
#include <cstring>

namespace cascade::kern {

namespace {

inline std::uint64_t hsum_u64(__m256i v) {
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
  return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

inline double hsum_pd(__m256d lo, __m256d hi) {
  alignas(32) double l[4], h[4];
  _mm256_store_pd(l, lo);
  _mm256_store_pd(h, hi);
  return ((l[0] + l[1]) + (l[2] + l[3])) + ((h[0] + h[1]) + (h[2] + h[3]));
}

std::uint64_t count_nonzero_avx2(const std::uint8_t* m, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i one = _mm256_set1_epi8(1);
  __m256i acc = zero;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(m + i));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(_mm256_min_epu8(v, one), zero));
  }
  std::uint64_t c = hsum_u64(acc);
  for (; i < n; ++i) c += (m[i] != 0);
  return c;
}

void threshold_ge_avx2(const float* p, std::size_t n, float t, std::uint8_t* out) {
  const __m256 tv = _mm256_set1_ps(t);
  const __m256i ones32 = _mm256_set1_epi32(1);
  const __m256i fix = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i c0 = _mm256_castps_si256(_mm256_cmp_ps(_mm256_loadu_ps(p + i), tv, _CMP_GE_OQ));
    __m256i c1 = _mm256_castps_si256(_mm256_cmp_ps(_mm256_loadu_ps(p + i + 8), tv, _CMP_GE_OQ));
    __m256i c2 = _mm256_castps_si256(_mm256_cmp_ps(_mm256_loadu_ps(p + i + 16), tv, _CMP_GE_OQ));
    __m256i c3 = _mm256_castps_si256(_mm256_cmp_ps(_mm256_loadu_ps(p + i + 24), tv, _CMP_GE_OQ));
    c0 = _mm256_and_si256(c0, ones32);
    c1 = _mm256_and_si256(c1, ones32);
    c2 = _mm256_and_si256(c2, ones32);
    c3 = _mm256_and_si256(c3, ones32);
    __m256i b = _mm256_packus_epi16(_mm256_packus_epi32(c0, c1), _mm256_packus_epi32(c2, c3));
    b = _mm256_permutevar8x32_epi32(b, fix);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), b);
  }
  for (; i < n; ++i) out[i] = (p[i] >= t) ? 1 : 0;
}

void or_inplace_avx2(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_or_si256(a, b));
  }
  for (; i < n; ++i) dst[i] |= src[i];
}

PairCounts pair_counts_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i ca = zero, cb = zero, cab = zero;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    ca = _mm256_add_epi64(ca, _mm256_sad_epu8(va, zero));
    cb = _mm256_add_epi64(cb, _mm256_sad_epu8(vb, zero));
    cab = _mm256_add_epi64(cab, _mm256_sad_epu8(_mm256_and_si256(va, vb), zero));
  }
  PairCounts c;
  c.a = hsum_u64(ca);
  c.b = hsum_u64(cb);
  c.ab = hsum_u64(cab);
  for (; i < n; ++i) {
    c.a += a[i];
    c.b += b[i];
    c.ab += static_cast<std::uint8_t>(a[i] & b[i]);
  }
  return c;
}

void add_inplace_avx2(float* acc, const float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(acc + i, _mm256_add_ps(_mm256_loadu_ps(acc + i), _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void add_sq_dev_avx2(float* acc, const float* x, const float* mean, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(mean + i));
    _mm256_storeu_ps(acc + i, _mm256_add_ps(_mm256_loadu_ps(acc + i), _mm256_mul_ps(d, d)));
  }
  for (; i < n; ++i) {
    const float d = x[i] - mean[i];
    acc[i] += d * d;
  }
}

void scale_inplace_avx2(float* x, float s, std::size_t n) {
  const __m256 sv = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), sv));
  }
  for (; i < n; ++i) x[i] *= s;
}

WeightedDiceSums weighted_dice_sums_avx2(const float* alpha, const float* p,
                                         const std::uint8_t* g, std::size_t n) {
  // All element products are formed in double, matching the scalar reference;
  // only the accumulation order differs (four lanes + tail).
  const __m256d zero = _mm256_setzero_pd();
  __m256d i_lo = zero, i_hi = zero, t_lo = zero, t_hi = zero;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 av = _mm256_loadu_ps(alpha + i);
    const __m256 pv = _mm256_loadu_ps(p + i);
    const __m256i g32 =
        _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(g + i)));

    const __m256d a0 = _mm256_cvtps_pd(_mm256_castps256_ps128(av));
    const __m256d a1 = _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1));
    const __m256d p0 = _mm256_cvtps_pd(_mm256_castps256_ps128(pv));
    const __m256d p1 = _mm256_cvtps_pd(_mm256_extractf128_ps(pv, 1));
    const __m256d g0 = _mm256_cvtepi32_pd(_mm256_castsi256_si128(g32));
    const __m256d g1 = _mm256_cvtepi32_pd(_mm256_extracti128_si256(g32, 1));

    i_lo = _mm256_add_pd(i_lo, _mm256_mul_pd(_mm256_mul_pd(a0, p0), g0));
    i_hi = _mm256_add_pd(i_hi, _mm256_mul_pd(_mm256_mul_pd(a1, p1), g1));
    t_lo = _mm256_add_pd(t_lo, _mm256_mul_pd(a0, _mm256_add_pd(p0, g0)));
    t_hi = _mm256_add_pd(t_hi, _mm256_mul_pd(a1, _mm256_add_pd(p1, g1)));
  }
  WeightedDiceSums s;
  s.intersection = hsum_pd(i_lo, i_hi);
  s.total = hsum_pd(t_lo, t_hi);
  for (; i < n; ++i) {
    const double a = alpha[i];
    const double pi = p[i];
    const double gi = g[i];
    s.intersection += a * pi * gi;
    s.total += a * (pi + gi);
  }
  return s;
}

void dilate_scan_avx2(const std::uint8_t* in, std::uint8_t* out, std::uint8_t* lane_state,
                      std::size_t lanes, std::size_t steps, std::size_t stride, int radius) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i one = _mm256_set1_epi8(1);
  const __m256i rv = _mm256_set1_epi8(static_cast<char>(radius));
  const std::size_t vec = lanes - lanes % 32;
  const std::uint8_t far = 255;
  const auto r = static_cast<std::uint8_t>(radius);

  std::memset(lane_state, far, lanes);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::uint8_t* row_in = in + s * stride;
    std::uint8_t* row_out = out + s * stride;
    for (std::size_t l = 0; l < vec; l += 32) {
      const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row_in + l));
      __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(lane_state + l));
      d = _mm256_and_si256(_mm256_adds_epu8(d, one), _mm256_cmpeq_epi8(v, zero));
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(lane_state + l), d);
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(row_out + l), d);
    }
    for (std::size_t l = vec; l < lanes; ++l) {
      std::uint8_t d = lane_state[l];
      d = row_in[l] ? 0 : static_cast<std::uint8_t>(d == far ? far : d + 1);
      lane_state[l] = d;
      row_out[l] = d;
    }
  }

  std::memset(lane_state, far, lanes);
  for (std::size_t s = steps; s-- > 0;) {
    const std::uint8_t* row_in = in + s * stride;
    std::uint8_t* row_out = out + s * stride;
    for (std::size_t l = 0; l < vec; l += 32) {
      const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row_in + l));
      __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(lane_state + l));
      d = _mm256_and_si256(_mm256_adds_epu8(d, one), _mm256_cmpeq_epi8(v, zero));
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(lane_state + l), d);
      const __m256i fwd = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row_out + l));
      const __m256i m = _mm256_min_epu8(fwd, d);
      const __m256i le = _mm256_cmpeq_epi8(_mm256_min_epu8(m, rv), m);
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(row_out + l), _mm256_and_si256(le, one));
    }
    for (std::size_t l = vec; l < lanes; ++l) {
      std::uint8_t d = lane_state[l];
      d = row_in[l] ? 0 : static_cast<std::uint8_t>(d == far ? far : d + 1);
      lane_state[l] = d;
      const std::uint8_t m = std::min(row_out[l], d);
      row_out[l] = (m <= r) ? 1 : 0;
    }
  }
}

const Kernels avx2_table = {
    "avx2",
    &count_nonzero_avx2,
    &threshold_ge_avx2,
    &or_inplace_avx2,
    &pair_counts_avx2,
    &add_inplace_avx2,
    &add_sq_dev_avx2,
    &scale_inplace_avx2,
    &weighted_dice_sums_avx2,
    &dilate_scan_avx2,
};

}  // namespace

const Kernels* avx2() {
  static const Kernels* table = __builtin_cpu_supports("avx2") ? &avx2_table : nullptr;
  return table;
}

}  // namespace cascade::kern

#endif  // CASCADE_HAVE_AVX2 && __AVX2__
