#ifndef FPVOLSEG_TOY_MODEL_HPP
#define FPVOLSEG_TOY_MODEL_HPP

#include <filesystem>
#include <span>
#include <vector>

#include "fpvolseg/patch.hpp"

namespace fpvolseg {

// Three-parameter voxelwise logistic segmenter over (CT, PET) inputs:
// p_i = sigmoid(w_ct * ct_i + w_pet * pet_i + bias). Stands behind the
// same predictor seam a real network would.
struct ToyModel {
    double w_ct = 0.0;
    double w_pet = 0.0;
    double bias = 0.0;

    // Per-voxel probabilities; requires a 2-channel patch.
    std::vector<double> predict(const PatchTensor& input) const;

    struct ParamGrad {
        double w_ct = 0.0, w_pet = 0.0, bias = 0.0;
    };

    // Chain rule through the logistic voxels:
    // dL/dw = sum_i grad_p[i] * p_i (1 - p_i) * x_i.
    ParamGrad backward(const PatchTensor& input, std::span<const double> probs,
                       std::span<const double> grad_p) const;

    std::vector<double> params() const { return {w_ct, w_pet, bias}; }
    void set_params(std::span<const double> p);

    // Float probabilities for the sliding-window seam.
    PatchPredictor predictor() const;
};

// JSON checkpoint {"model": "toy-logistic", "w_ct": ..., "w_pet": ...,
// "bias": ...}.
void save_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_model(const std::filesystem::path& path);

} // namespace fpvolseg

#endif
