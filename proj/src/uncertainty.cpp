#include "cascade/uncertainty.hpp"

#include <cmath>

#include "cascade/kernels.hpp"

namespace cascade {

Volume variance_map(const SampleStack& s) {
  if (s.samples.size() < 2) throw TooFewSamples("variance_map needs T >= 2 samples");
  const auto& first = s.samples.front();
  for (const auto& v : s.samples) {
    check_grid_compat(first.meta, v.meta);
    require_probability(v, "variance_map");
  }
  const auto& K = kern::active();
  const std::size_t n = first.data.size();
  const std::size_t t = s.samples.size();

  // Population variance via pairwise differences,
  //   var = sum_{i<j} (x_i - x_j)^2 / T^2,
  // which is exact for identical samples (no mean round-off) and free of
  // cancellation. T is small (MC passes), so the T^2/2 pair sweeps are cheap.
  Volume var(first.meta);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = i + 1; j < t; ++j)
      K.add_sq_dev(var.data.data(), s.samples[i].data.data(), s.samples[j].data.data(), n);
  K.scale_inplace(var.data.data(), 1.0f / static_cast<float>(t * t), n);
  return var;
}

Volume alpha_map(const Volume& u, double scale) {
  if (!(scale > 0.0)) throw OutOfRange("alpha scale must be > 0");
  Volume out(u.meta);
  for (std::size_t i = 0; i < u.data.size(); ++i) {
    const float x = u.data[i];
    if (!(x >= 0.0f)) throw NegativeUncertainty("uncertainty must be >= 0");
    out.data[i] = static_cast<float>(std::exp(-scale * static_cast<double>(x)));
  }
  return out;
}

namespace {

constexpr double kProbClampLo = 1e-7;
constexpr double kProbClampHi = 1.0 - 1e-7;

// Weighted cross-entropy sum and its per-voxel gradient contribution.
// weight(i) = 1 - alpha[i] when alpha is given, else 1. The gradient of the
// clamp is zero outside (lo, hi), so saturated voxels contribute none.
double ce_sum(const Volume& p, const Mask& g, const float* alpha, double* grad,
              double grad_scale) {
  double sum = 0.0;
  const std::size_t n = p.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = alpha ? 1.0 - static_cast<double>(alpha[i]) : 1.0;
    const double pi = p.data[i];
    const double pc = std::min(std::max(pi, kProbClampLo), kProbClampHi);
    const double gi = g.data[i];
    sum += w * -(gi * std::log(pc) + (1.0 - gi) * std::log(1.0 - pc));
    if (grad && pi > kProbClampLo && pi < kProbClampHi)
      grad[i] += grad_scale * w * (-gi / pc + (1.0 - gi) / (1.0 - pc));
  }
  return sum;
}

struct DiceTerms {
  double loss;       // 1 - (2A + eps) / (B + eps)
  double two_a_eps;  // 2A + eps
  double b_eps;      // B + eps
};

DiceTerms weighted_dice(const Volume& p, const Mask& g, const Volume& alpha, double eps) {
  const auto sums = kern::active().weighted_dice_sums(alpha.data.data(), p.data.data(),
                                                      g.data.data(), p.data.size());
  DiceTerms t;
  t.two_a_eps = 2.0 * sums.intersection + eps;
  t.b_eps = sums.total + eps;
  t.loss = 1.0 - t.two_a_eps / t.b_eps;
  return t;
}

void add_dice_gradient(const Volume& alpha, const Mask& g, const DiceTerms& t, double scale,
                       std::vector<double>& grad) {
  // d/dp_i [1 - (2A+eps)/(B+eps)] with A = sum a*p*g, B = sum a*(p+g):
  //   -(2*a_i*g_i*(B+eps) - (2A+eps)*a_i) / (B+eps)^2
  const double inv_den2 = 1.0 / (t.b_eps * t.b_eps);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double a = alpha.data[i];
    const double gi = g.data[i];
    grad[i] += scale * -(a * (2.0 * gi * t.b_eps - t.two_a_eps)) * inv_den2;
  }
}

void validate_loss_inputs(const Volume& p, const Mask& g, double eps) {
  check_grid_compat(p.meta, g.meta);
  require_probability(p, "loss");
  require_binary(g, "loss");
  if (!(eps > 0.0)) throw OutOfRange("loss eps must be > 0");
}

LossResult finish(const Volume& p, double dice_term, double ce_term,
                  const std::vector<double>& grad) {
  LossResult r;
  r.dice_term = dice_term;
  r.ce_term = ce_term;
  r.value = dice_term + ce_term;
  r.gradient = Volume(p.meta);
  for (std::size_t i = 0; i < grad.size(); ++i)
    r.gradient.data[i] = static_cast<float>(grad[i]);
  return r;
}

}  // namespace

LossResult adaptive_loss(const Volume& p, const Mask& g, const Volume& alpha, double eps) {
  validate_loss_inputs(p, g, eps);
  check_grid_compat(p.meta, alpha.meta);
  require_probability(alpha, "adaptive_loss alpha");
  const std::size_t n = p.data.size();

  const DiceTerms dice = weighted_dice(p, g, alpha, eps);
  std::vector<double> grad(n, 0.0);
  add_dice_gradient(alpha, g, dice, 1.0, grad);
  const double ce = ce_sum(p, g, alpha.data.data(), grad.data(), 1.0 / static_cast<double>(n)) /
                    static_cast<double>(n);
  return finish(p, dice.loss, ce, grad);
}

LossResult dice_ce_loss(const Volume& p, const Mask& g, double w_dice, double w_ce,
                        double eps) {
  if (w_dice < 0.0 || w_ce < 0.0 || (w_dice == 0.0 && w_ce == 0.0))
    throw OutOfRange("loss weights must be >= 0 and not both zero");
  validate_loss_inputs(p, g, eps);
  const std::size_t n = p.data.size();

  // The Dice side runs through the same weighted kernel with alpha == 1, so
  // it agrees bit for bit with adaptive_loss at its collapse point.
  Volume ones(p.meta);
  std::fill(ones.data.begin(), ones.data.end(), 1.0f);
  const DiceTerms dice = weighted_dice(p, g, ones, eps);

  std::vector<double> grad(n, 0.0);
  add_dice_gradient(ones, g, dice, w_dice, grad);
  const double mean_bce =
      ce_sum(p, g, nullptr, w_ce != 0.0 ? grad.data() : nullptr, w_ce / static_cast<double>(n)) /
      static_cast<double>(n);
  return finish(p, w_dice * dice.loss, w_ce * mean_bce, grad);
}

}  // namespace cascade
