#ifndef FPVOLSEG_LOSS_HPP
#define FPVOLSEG_LOSS_HPP

#include <span>
#include <vector>

#include "fpvolseg/error.hpp"

namespace fpvolseg {

inline constexpr double kDefaultSmooth = 1e-5;
inline constexpr double kBceClip = 1e-7;

// Scalar loss over a predicted probability patch plus its analytic gradient
// with respect to the probabilities.
struct LossResult {
    double value = 0.0;
    std::vector<double> grad;
};

struct TverskyParams {
    double alpha = 0.3;  // false-positive weight
    double beta = 0.7;   // false-negative weight
    double smooth = kDefaultSmooth;
};

struct LossWeights {
    double w_ce = 1.0;
    double w_softdice = 1.0;
    double w_tversky = 1.0;
};

// Mean binary cross-entropy; probabilities are clipped to
// [kBceClip, 1 - kBceClip] before the logs.
LossResult bce(std::span<const double> p, std::span<const float> g);

// 1 - (2 sum(pg) + s) / (sum(p) + sum(g) + s)
LossResult dice_loss(std::span<const double> p, std::span<const float> g,
                     double smooth = kDefaultSmooth);

// Squared-denominator variant: 1 - (2 sum(pg) + s) / (sum(p^2) + sum(g^2) + s)
LossResult soft_dice_loss(std::span<const double> p, std::span<const float> g,
                          double smooth = kDefaultSmooth);

// 1 - (TP + s) / (TP + alpha FP + beta FN + s). With alpha = beta = 1/2 and
// smooth s this equals dice_loss with smooth 2s, exactly.
LossResult tversky_loss(std::span<const double> p, std::span<const float> g,
                        const TverskyParams& params = {});

// w_ce * bce + w_softdice * soft_dice + w_tversky * tversky, value and grad.
LossResult combined_loss(std::span<const double> p, std::span<const float> g,
                         const LossWeights& weights = {}, const TverskyParams& tversky = {});

} // namespace fpvolseg

#endif
