#include "fpvolseg/loss.hpp"

#include <algorithm>
#include <cmath>

namespace fpvolseg {

namespace {

void check_pair(std::span<const double> p, std::span<const float> g) {
    if (p.size() != g.size())
        throw DimensionError("prediction and ground-truth patches differ in size");
    if (p.empty()) throw DimensionError("loss over an empty patch");
}

void check_tversky(const TverskyParams& t) {
    if (!(t.alpha >= 0.0) || !(t.beta >= 0.0))
        throw ParameterError("tversky alpha and beta must be >= 0");
    if (!(t.alpha + t.beta > 0.0))
        throw ParameterError("tversky alpha + beta must be positive");
    if (!(t.smooth > 0.0)) throw ParameterError("smooth term must be positive");
}

} // namespace

LossResult bce(std::span<const double> p, std::span<const float> g) {
    check_pair(p, g);
    const std::size_t n = p.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    LossResult r;
    r.grad.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pc = std::clamp(p[i], kBceClip, 1.0 - kBceClip);
        const double gi = static_cast<double>(g[i]);
        sum += gi * std::log(pc) + (1.0 - gi) * std::log(1.0 - pc);
        r.grad[i] = (pc - gi) * inv_n / (pc * (1.0 - pc));
    }
    r.value = -sum * inv_n;
    return r;
}

LossResult dice_loss(std::span<const double> p, std::span<const float> g, double smooth) {
    check_pair(p, g);
    if (!(smooth > 0.0)) throw ParameterError("smooth term must be positive");

    double sum_pg = 0.0, sum_p = 0.0, sum_g = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sum_pg += p[i] * static_cast<double>(g[i]);
        sum_p += p[i];
        sum_g += static_cast<double>(g[i]);
    }
    const double numer = 2.0 * sum_pg + smooth;
    const double denom = sum_p + sum_g + smooth;

    LossResult r;
    r.value = 1.0 - numer / denom;
    r.grad.resize(p.size());
    const double inv_d2 = 1.0 / (denom * denom);
    for (std::size_t i = 0; i < p.size(); ++i)
        r.grad[i] = -(2.0 * static_cast<double>(g[i]) * denom - numer) * inv_d2;
    return r;
}

LossResult soft_dice_loss(std::span<const double> p, std::span<const float> g, double smooth) {
    check_pair(p, g);
    if (!(smooth > 0.0)) throw ParameterError("smooth term must be positive");

    double sum_pg = 0.0, sum_p2 = 0.0, sum_g2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = static_cast<double>(g[i]);
        sum_pg += p[i] * gi;
        sum_p2 += p[i] * p[i];
        sum_g2 += gi * gi;
    }
    const double numer = 2.0 * sum_pg + smooth;
    const double denom = sum_p2 + sum_g2 + smooth;

    LossResult r;
    r.value = 1.0 - numer / denom;
    r.grad.resize(p.size());
    const double inv_d2 = 1.0 / (denom * denom);
    for (std::size_t i = 0; i < p.size(); ++i)
        r.grad[i] = -(2.0 * static_cast<double>(g[i]) * denom - numer * 2.0 * p[i]) * inv_d2;
    return r;
}

LossResult tversky_loss(std::span<const double> p, std::span<const float> g,
                        const TverskyParams& params) {
    check_pair(p, g);
    check_tversky(params);

    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = static_cast<double>(g[i]);
        tp += p[i] * gi;
        fp += p[i] * (1.0 - gi);
        fn += (1.0 - p[i]) * gi;
    }
    const double numer = tp + params.smooth;
    const double denom = tp + params.alpha * fp + params.beta * fn + params.smooth;

    LossResult r;
    r.value = 1.0 - numer / denom;
    r.grad.resize(p.size());
    const double inv_d2 = 1.0 / (denom * denom);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = static_cast<double>(g[i]);
        const double d_num = gi;
        const double d_den = gi + params.alpha * (1.0 - gi) - params.beta * gi;
        r.grad[i] = -(d_num * denom - numer * d_den) * inv_d2;
    }
    return r;
}

LossResult combined_loss(std::span<const double> p, std::span<const float> g,
                         const LossWeights& weights, const TverskyParams& tversky) {
    check_pair(p, g);
    if (!(weights.w_ce >= 0.0) || !(weights.w_softdice >= 0.0) || !(weights.w_tversky >= 0.0))
        throw ParameterError("loss weights must be >= 0");
    if (weights.w_ce + weights.w_softdice + weights.w_tversky <= 0.0)
        throw ParameterError("at least one loss weight must be positive");

    LossResult r;
    r.grad.assign(p.size(), 0.0);
    const auto accumulate = [&r](const LossResult& part, double w) {
        if (w == 0.0) return;
        r.value += w * part.value;
        for (std::size_t i = 0; i < r.grad.size(); ++i) r.grad[i] += w * part.grad[i];
    };
    if (weights.w_ce > 0.0) accumulate(bce(p, g), weights.w_ce);
    if (weights.w_softdice > 0.0) accumulate(soft_dice_loss(p, g), weights.w_softdice);
    if (weights.w_tversky > 0.0) accumulate(tversky_loss(p, g, tversky), weights.w_tversky);
    return r;
}

} // namespace fpvolseg
