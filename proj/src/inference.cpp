#include "fpvolseg/inference.hpp"

#include <algorithm>
#include <cmath>

namespace fpvolseg {

EnsembleSpec::EnsembleSpec(std::vector<std::pair<std::string, double>> members)
    : members_(std::move(members)) {
    if (members_.empty()) throw ParameterError("ensemble needs at least one member");
    double total = 0.0;
    for (const auto& [id, weight] : members_) {
        if (!(weight > 0.0))
            throw ParameterError("ensemble weight for '" + id + "' must be positive");
        total += weight;
    }
    for (auto& [id, weight] : members_) weight /= total;
}

Volume3D ensemble_average(const std::vector<Volume3D>& probs, const EnsembleSpec& spec) {
    if (probs.size() != spec.members().size())
        throw DimensionError("probability count does not match ensemble members");
    for (const auto& p : probs) {
        if (p.kind() != VolumeKind::Probability)
            throw KindError("ensemble inputs must be probability volumes");
        if (p.shape() != probs.front().shape())
            throw DimensionError("ensemble member shapes differ");
        if (p.spacing() != probs.front().spacing())
            throw DimensionError("ensemble member spacings differ");
    }

    const std::size_t n = probs.front().data().size();
    std::vector<double> acc(n, 0.0);
    for (std::size_t m = 0; m < probs.size(); ++m) {
        const double w = spec.members()[m].second;
        const auto data = probs[m].data();
        for (std::size_t i = 0; i < n; ++i) acc[i] += w * static_cast<double>(data[i]);
    }
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<float>(std::clamp(acc[i], 0.0, 1.0));
    return Volume3D(probs.front().shape(), probs.front().spacing(), VolumeKind::Probability,
                    std::move(out));
}

Volume3D threshold_prob(const Volume3D& prob, double t) {
    if (prob.kind() != VolumeKind::Probability)
        throw KindError("thresholding expects a probability volume");
    if (!(t > 0.0 && t < 1.0)) throw RangeError("threshold must lie in (0, 1)");

    const auto data = prob.data();
    std::vector<float> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out[i] = static_cast<double>(data[i]) > t ? 1.0f : 0.0f;
    return Volume3D(prob.shape(), prob.spacing(), VolumeKind::Mask, std::move(out));
}

} // namespace fpvolseg
