#include "cascade/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>

namespace cascade::kern {

namespace {

std::uint64_t count_nonzero_scalar(const std::uint8_t* m, std::size_t n) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += (m[i] != 0);
  return c;
}

void threshold_ge_scalar(const float* p, std::size_t n, float t, std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (p[i] >= t) ? 1 : 0;
}

void or_inplace_scalar(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] |= src[i];
}

PairCounts pair_counts_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  PairCounts c;
  for (std::size_t i = 0; i < n; ++i) {
    c.a += a[i];
    c.b += b[i];
    c.ab += static_cast<std::uint8_t>(a[i] & b[i]);
  }
  return c;
}

void add_inplace_scalar(float* acc, const float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void add_sq_dev_scalar(float* acc, const float* x, const float* mean, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float d = x[i] - mean[i];
    acc[i] += d * d;
  }
}

void scale_inplace_scalar(float* x, float s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

WeightedDiceSums weighted_dice_sums_scalar(const float* alpha, const float* p,
                                           const std::uint8_t* g, std::size_t n) {
  WeightedDiceSums s;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = alpha[i];
    const double pi = p[i];
    const double gi = g[i];
    s.intersection += a * pi * gi;
    s.total += a * (pi + gi);
  }
  return s;
}

void dilate_scan_scalar(const std::uint8_t* in, std::uint8_t* out, std::uint8_t* lane_state,
                        std::size_t lanes, std::size_t steps, std::size_t stride, int radius) {
  const std::uint8_t far = 255;
  // Forward sweep: out holds the saturated distance to the last foreground
  // voxel seen at or before each step.
  std::memset(lane_state, far, lanes);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::uint8_t* row_in = in + s * stride;
    std::uint8_t* row_out = out + s * stride;
    for (std::size_t l = 0; l < lanes; ++l) {
      std::uint8_t d = lane_state[l];
      d = row_in[l] ? 0 : static_cast<std::uint8_t>(d == far ? far : d + 1);
      lane_state[l] = d;
      row_out[l] = d;
    }
  }
  // Backward sweep combines the two directed distances into the 0/1 result.
  std::memset(lane_state, far, lanes);
  const auto r = static_cast<std::uint8_t>(radius);
  for (std::size_t s = steps; s-- > 0;) {
    const std::uint8_t* row_in = in + s * stride;
    std::uint8_t* row_out = out + s * stride;
    for (std::size_t l = 0; l < lanes; ++l) {
      std::uint8_t d = lane_state[l];
      d = row_in[l] ? 0 : static_cast<std::uint8_t>(d == far ? far : d + 1);
      lane_state[l] = d;
      const std::uint8_t m = std::min(row_out[l], d);
      row_out[l] = (m <= r) ? 1 : 0;
    }
  }
}

const Kernels scalar_table = {
    "scalar",
    &count_nonzero_scalar,
    &threshold_ge_scalar,
    &or_inplace_scalar,
    &pair_counts_scalar,
    &add_inplace_scalar,
    &add_sq_dev_scalar,
    &scale_inplace_scalar,
    &weighted_dice_sums_scalar,
    &dilate_scan_scalar,
};

const Kernels* select_active() {
  const char* env = std::getenv("CASCADE_KERNELS");
  if (env && std::strcmp(env, "scalar") == 0) return &scalar_table;
  const Kernels* v = avx2();
  if (env && std::strcmp(env, "avx2") == 0) return v ? v : &scalar_table;
  return v ? v : &scalar_table;
}

}  // namespace

const Kernels& scalar() { return scalar_table; }

#if !defined(CASCADE_HAVE_AVX2)
const Kernels* avx2() { return nullptr; }
#endif

const Kernels& active() {
  static const Kernels* chosen = select_active();
  return *chosen;
}

}  // namespace cascade::kern
