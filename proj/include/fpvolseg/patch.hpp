#ifndef FPVOLSEG_PATCH_HPP
#define FPVOLSEG_PATCH_HPP

#include <functional>
#include <vector>

#include "fpvolseg/volume.hpp"

namespace fpvolseg {

inline constexpr double kWeightFloor = 1e-6;
inline constexpr double kDefaultSigmaScale = 1.0 / 8.0;

// Origins of a patch tiling. Axes shorter than the patch are extended with
// zero padding on the high side; padded_extent is the fusion domain.
struct PatchGrid {
    Shape3 patch_size;
    Shape3 stride;
    std::vector<Shape3> origins; // lexicographic (z, y, x) scan order
    Shape3 padded_extent;
};

// Center-peaked fusion weights over one patch, floored at kWeightFloor.
struct WeightMap {
    Shape3 patch_size;
    std::vector<double> weights;
};

// Channel-major patch tensor, [channel][z][y][x], x fastest.
struct PatchTensor {
    std::int64_t channels = 0;
    Shape3 size;
    std::vector<float> data;

    std::int64_t index(std::int64_t c, std::int64_t z, std::int64_t y, std::int64_t x) const {
        return ((c * size.z + z) * size.y + y) * size.x + x;
    }
    std::span<const float> channel_view(std::int64_t c) const {
        return std::span<const float>(data).subspan(
            static_cast<std::size_t>(c * size.voxels()),
            static_cast<std::size_t>(size.voxels()));
    }
};

// Tiles a volume with patches at the given overlap fraction. The stride is
// floor(patch * (1 - overlap)), at least 1; the final origin per axis is
// clamped to dim - patch so coverage is complete.
PatchGrid compute_grid(Shape3 shape, Shape3 patch_size, double overlap);

// Crops a patch at origin; voxels beyond the volume are filled with the pad
// value 0 (inputs are expected to be normalized first, so 0 is the mean).
PatchTensor extract_patch(const MultiChannelVolume& mc, Shape3 origin, Shape3 patch_size);
std::vector<float> extract_patch(const Volume3D& v, Shape3 origin, Shape3 patch_size);

// w(v) = max(floor, exp(-sum_a (v_a - c_a)^2 / (2 sigma_a^2))) with
// c = (patch - 1) / 2 and sigma_a = sigma_scale * patch_a.
WeightMap gaussian_weight_map(Shape3 patch_size, double sigma_scale = kDefaultSigmaScale);

struct PatchPrediction {
    Shape3 origin;
    std::vector<float> values; // probabilities over the patch
};

// Weighted normalized blend of overlapping patches: at every voxel,
// sum(w * p) / sum(w) over the covering patches. Accumulation is in double
// and patches are folded in caller order, so output is bit-stable.
Volume3D fuse_patches(const std::vector<PatchPrediction>& preds, Shape3 out_shape,
                      const WeightMap& wmap, Spacing3 spacing = kDefaultSpacing);

using PatchPredictor = std::function<std::vector<float>(const PatchTensor&)>;

// compute_grid -> extract -> predict -> fuse, with padding cropped off the
// output. Patch predictions run in parallel across up to `threads` workers;
// fusion order is fixed, so results do not depend on the thread count.
Volume3D sliding_window_infer(const MultiChannelVolume& mc, const PatchPredictor& predictor,
                              double overlap, const WeightMap& wmap, unsigned threads = 0);

} // namespace fpvolseg

#endif
