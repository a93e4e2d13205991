#pragma once

#include <cstddef>
#include <cstdint>

namespace cascade::kern {

// Voxel-wise inner loops shared by the higher-level modules. Every entry has
// a scalar reference implementation; on x86-64 an AVX2 variant is compiled
// into a second table and selected at runtime. The two variants are
// equivalence-tested against each other:
//   - integer/comparison kernels must match the scalar reference bitwise;
//   - double-precision reductions may differ only in summation order and are
//     held to a 1e-10 relative bound in tests (well inside the 1e-6
//     reproducibility contract of the callers).
// Within one process the selected table never changes, so results are
// deterministic run to run.

struct PairCounts {
  std::uint64_t a = 0;   // voxels with a == 1
  std::uint64_t b = 0;   // voxels with b == 1
  std::uint64_t ab = 0;  // voxels with a == 1 and b == 1
};

struct WeightedDiceSums {
  double intersection = 0.0;  // sum_i alpha[i] * p[i] * g[i]
  double total = 0.0;         // sum_i alpha[i] * (p[i] + g[i])
};

struct Kernels {
  const char* name;

  std::uint64_t (*count_nonzero)(const std::uint8_t* m, std::size_t n);

  // out[i] = (p[i] >= t) ? 1 : 0. Inputs must be NaN-free.
  void (*threshold_ge)(const float* p, std::size_t n, float t, std::uint8_t* out);

  // dst[i] |= src[i] over 0/1 bytes.
  void (*or_inplace)(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);

  PairCounts (*pair_counts)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);

  // acc[i] += x[i]
  void (*add_inplace)(float* acc, const float* x, std::size_t n);

  // acc[i] += (x[i] - mean[i])^2   (no FMA contraction in either variant)
  void (*add_sq_dev)(float* acc, const float* x, const float* mean, std::size_t n);

  // x[i] *= s
  void (*scale_inplace)(float* x, float s, std::size_t n);

  // Double-precision reduction of the alpha-weighted soft-Dice sums.
  WeightedDiceSums (*weighted_dice_sums)(const float* alpha, const float* p,
                                         const std::uint8_t* g, std::size_t n);

  // One forward+backward Chebyshev distance scan used by binary dilation.
  // Memory is viewed as `steps` planes of `lanes` contiguous bytes, planes
  // `stride` bytes apart. On return out[..] is 1 where the input had a
  // foreground voxel within `radius` steps along the scan axis, else 0.
  // `lane_state` is caller scratch of `lanes` bytes. Requires in != out and
  // radius in [0, 254] (distances saturate at 255).
  void (*dilate_scan)(const std::uint8_t* in, std::uint8_t* out, std::uint8_t* lane_state,
                      std::size_t lanes, std::size_t steps, std::size_t stride, int radius);
};

/// Scalar reference table (always available).
const Kernels& scalar();

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
const Kernels* avx2();

/// Runtime-selected table. Defaults to the best available variant; the
/// environment variable CASCADE_KERNELS=scalar|avx2 overrides the choice
/// (an unavailable request falls back to scalar).
const Kernels& active();

}  // namespace cascade::kern
