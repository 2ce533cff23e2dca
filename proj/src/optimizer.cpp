#include "fpvolseg/optimizer.hpp"

#include <cmath>

namespace fpvolseg {

namespace {

void check_step(std::span<double> params, std::span<const double> grads,
                const OptimizerState& state) {
    if (params.size() != grads.size())
        throw DimensionError("parameter and gradient sizes differ");
    if (!(state.lr > 0.0)) throw ParameterError("learning rate must be positive");
    for (double g : grads)
        if (!std::isfinite(g)) throw NumericError("non-finite gradient");
}

} // namespace

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "adamw") return OptimizerKind::AdamW;
    throw ParameterError("unknown optimizer: " + name);
}

const char* to_string(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::AdamW: return "adamw";
    }
    return "sgd";
}

OptimizerState OptimizerState::make(OptimizerKind kind, std::size_t n_params, double lr,
                                    double momentum, double weight_decay) {
    OptimizerState s;
    s.kind = kind;
    s.lr = lr;
    s.momentum = momentum;
    s.weight_decay = weight_decay;
    if (kind == OptimizerKind::Sgd) {
        s.velocity.assign(n_params, 0.0);
    } else {
        s.m.assign(n_params, 0.0);
        s.v.assign(n_params, 0.0);
    }
    return s;
}

void sgd_step(std::span<double> params, std::span<const double> grads, OptimizerState& state) {
    check_step(params, grads, state);
    if (state.velocity.size() != params.size())
        throw DimensionError("optimizer accumulator size differs from parameters");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i] + state.weight_decay * params[i];
        state.velocity[i] = state.momentum * state.velocity[i] - state.lr * g;
        params[i] += state.velocity[i];
    }
    ++state.step_count;
}

namespace {

void adam_like_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state, bool decoupled_decay) {
    check_step(params, grads, state);
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw DimensionError("optimizer accumulator size differs from parameters");

    const std::int64_t t = ++state.step_count;
    const double bc1 = 1.0 - std::pow(state.momentum, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g =
            decoupled_decay ? grads[i] : grads[i] + state.weight_decay * params[i];
        state.m[i] = state.momentum * state.m[i] + (1.0 - state.momentum) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        double update = state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        if (decoupled_decay) update += state.lr * state.weight_decay * params[i];
        params[i] -= update;
    }
}

} // namespace

void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state) {
    adam_like_step(params, grads, state, false);
}

void adamw_step(std::span<double> params, std::span<const double> grads, OptimizerState& state) {
    adam_like_step(params, grads, state, true);
}

void optimizer_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state) {
    switch (state.kind) {
    case OptimizerKind::Sgd: sgd_step(params, grads, state); break;
    case OptimizerKind::Adam: adam_step(params, grads, state); break;
    case OptimizerKind::AdamW: adamw_step(params, grads, state); break;
    }
}

} // namespace fpvolseg
