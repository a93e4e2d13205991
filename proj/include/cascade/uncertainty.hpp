#pragma once

#include <vector>

#include "cascade/volume.hpp"

namespace cascade {

/// T >= 2 stochastic forward passes (probability volumes on one grid).
struct SampleStack {
  std::vector<Volume> samples;
};

struct LossResult {
  double value = 0.0;      // dice_term + ce_term
  double dice_term = 0.0;
  double ce_term = 0.0;
  Volume gradient;         // d(value)/d(p) per voxel
};

/// Per-voxel population variance (divide by T) across the stack. Values land
/// in [0, 0.25] for probabilities.
Volume variance_map(const SampleStack& s);

/// alpha(x) = exp(-scale * U(x)); requires U >= 0 and scale > 0.
Volume alpha_map(const Volume& u, double scale);

/// Uncertainty-adaptive loss: a soft Dice term whose sums are weighted by
/// alpha per voxel, plus binary cross-entropy weighted by (1 - alpha):
///
///   dice_term = 1 - (2*sum(a*p*g) + eps) / (sum(a*(p+g)) + eps)
///   ce_term   = mean over voxels of (1-a) * BCE(p, g)
///
/// with p clamped to [1e-7, 1-1e-7] inside the BCE logs. The gradient is the
/// exact derivative w.r.t. p, treating alpha as a constant. At alpha == 1 the
/// CE weights vanish and the Dice term reduces to the plain soft Dice loss.
LossResult adaptive_loss(const Volume& p, const Mask& g, const Volume& alpha,
                         double eps = 1e-5);

/// Fixed-weight baseline: w_dice * softDice(p,g) + w_ce * meanBCE(p,g).
LossResult dice_ce_loss(const Volume& p, const Mask& g, double w_dice = 1.0,
                        double w_ce = 1.0, double eps = 1e-5);

}  // namespace cascade
