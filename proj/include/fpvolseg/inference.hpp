#ifndef FPVOLSEG_INFERENCE_HPP
#define FPVOLSEG_INFERENCE_HPP

#include <string>
#include <utility>
#include <vector>

#include "fpvolseg/volume.hpp"

namespace fpvolseg {

// Weighted model ensemble; weights are normalized to sum to 1 at
// construction.
class EnsembleSpec {
public:
    explicit EnsembleSpec(std::vector<std::pair<std::string, double>> members);

    const std::vector<std::pair<std::string, double>>& members() const { return members_; }

private:
    std::vector<std::pair<std::string, double>> members_;
};

// Voxelwise sum of w_i * p_i over the members, in member order.
Volume3D ensemble_average(const std::vector<Volume3D>& probs, const EnsembleSpec& spec);

// mask = (prob > t), strict.
Volume3D threshold_prob(const Volume3D& prob, double t = 0.5);

} // namespace fpvolseg

#endif
