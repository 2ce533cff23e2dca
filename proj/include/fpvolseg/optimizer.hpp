#ifndef FPVOLSEG_OPTIMIZER_HPP
#define FPVOLSEG_OPTIMIZER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpvolseg/error.hpp"

namespace fpvolseg {

enum class OptimizerKind { Sgd, Adam, AdamW };

OptimizerKind optimizer_kind_from_string(const std::string& name);
const char* to_string(OptimizerKind kind);

// Hyperparameters plus per-parameter accumulators. momentum doubles as the
// Adam/AdamW beta1 so all three optimizers share one initial configuration.
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Sgd;
    double lr = 3e-5;
    double momentum = 0.99;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 3e-5;
    std::int64_t step_count = 0;
    std::vector<double> velocity; // sgd
    std::vector<double> m, v;     // adam/adamw moments

    static OptimizerState make(OptimizerKind kind, std::size_t n_params, double lr,
                               double momentum, double weight_decay);
};

// Classical momentum with coupled L2 decay:
// v <- mu v - lr (g + lambda theta); theta <- theta + v
void sgd_step(std::span<double> params, std::span<const double> grads, OptimizerState& state);

// Bias-corrected moment updates; decay is coupled into the gradient.
void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state);

// Same moments, decay applied decoupled: theta <- theta - lr lambda theta.
void adamw_step(std::span<double> params, std::span<const double> grads, OptimizerState& state);

void optimizer_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state);

} // namespace fpvolseg

#endif
