#include "fpvolseg/patch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpvolseg/parallel.hpp"

namespace fpvolseg {

namespace {

std::vector<std::int64_t> axis_origins(std::int64_t dim, std::int64_t patch, std::int64_t stride) {
    if (dim <= patch) return {0};
    std::vector<std::int64_t> origins;
    const std::int64_t last = dim - patch;
    for (std::int64_t o = 0; o < last; o += stride) origins.push_back(o);
    origins.push_back(last);
    return origins;
}

void check_origin(const Shape3& vol, const Shape3& origin, const Shape3& patch) {
    const auto check_axis = [](std::int64_t o, std::int64_t dim, std::int64_t p) {
        return o >= 0 && o < std::max(dim, p);
    };
    if (!check_axis(origin.z, vol.z, patch.z) || !check_axis(origin.y, vol.y, patch.y) ||
        !check_axis(origin.x, vol.x, patch.x))
        throw BoundsError("patch origin outside the padded extent");
}

void extract_channel(const Volume3D& v, const Shape3& origin, const Shape3& patch,
                     float* out) {
    const Shape3 s = v.shape();
    const auto src = v.data();
    for (std::int64_t z = 0; z < patch.z; ++z) {
        const std::int64_t sz = origin.z + z;
        for (std::int64_t y = 0; y < patch.y; ++y) {
            const std::int64_t sy = origin.y + y;
            float* row = out + (z * patch.y + y) * patch.x;
            const std::int64_t sx0 = origin.x;
            const std::int64_t copy =
                std::max<std::int64_t>(0, std::min(patch.x, s.x - sx0));
            if (sz >= s.z || sy >= s.y || copy == 0) {
                std::fill(row, row + patch.x, 0.0f);
                continue;
            }
            const float* src_row = src.data() + s.index(sz, sy, sx0);
            std::copy(src_row, src_row + copy, row);
            std::fill(row + copy, row + patch.x, 0.0f);
        }
    }
}

} // namespace

PatchGrid compute_grid(Shape3 shape, Shape3 patch_size, double overlap) {
    if (!(overlap >= 0.0 && overlap < 1.0))
        throw ParameterError("overlap must lie in [0, 1)");
    if (patch_size.z < 1 || patch_size.y < 1 || patch_size.x < 1)
        throw ParameterError("patch size components must be >= 1");
    if (shape.z < 1 || shape.y < 1 || shape.x < 1)
        throw ParameterError("volume shape components must be >= 1");

    const auto stride_of = [overlap](std::int64_t p) {
        const auto s = static_cast<std::int64_t>(std::floor(static_cast<double>(p) * (1.0 - overlap)));
        return std::max<std::int64_t>(s, 1);
    };

    PatchGrid grid;
    grid.patch_size = patch_size;
    grid.stride = {stride_of(patch_size.z), stride_of(patch_size.y), stride_of(patch_size.x)};
    grid.padded_extent = {std::max(shape.z, patch_size.z), std::max(shape.y, patch_size.y),
                          std::max(shape.x, patch_size.x)};

    const auto oz = axis_origins(shape.z, patch_size.z, grid.stride.z);
    const auto oy = axis_origins(shape.y, patch_size.y, grid.stride.y);
    const auto ox = axis_origins(shape.x, patch_size.x, grid.stride.x);
    grid.origins.reserve(oz.size() * oy.size() * ox.size());
    for (auto z : oz)
        for (auto y : oy)
            for (auto x : ox) grid.origins.push_back(Shape3{z, y, x});
    return grid;
}

PatchTensor extract_patch(const MultiChannelVolume& mc, Shape3 origin, Shape3 patch_size) {
    check_origin(mc.shape(), origin, patch_size);
    PatchTensor patch;
    patch.channels = static_cast<std::int64_t>(mc.channel_count());
    patch.size = patch_size;
    patch.data.resize(static_cast<std::size_t>(patch.channels * patch_size.voxels()));
    for (std::int64_t c = 0; c < patch.channels; ++c)
        extract_channel(mc.channel(static_cast<std::size_t>(c)), origin, patch_size,
                        patch.data.data() + c * patch_size.voxels());
    return patch;
}

std::vector<float> extract_patch(const Volume3D& v, Shape3 origin, Shape3 patch_size) {
    check_origin(v.shape(), origin, patch_size);
    std::vector<float> out(static_cast<std::size_t>(patch_size.voxels()));
    extract_channel(v, origin, patch_size, out.data());
    return out;
}

WeightMap gaussian_weight_map(Shape3 patch_size, double sigma_scale) {
    if (!(sigma_scale > 0.0)) throw ParameterError("sigma_scale must be positive");
    if (patch_size.z < 1 || patch_size.y < 1 || patch_size.x < 1)
        throw ParameterError("patch size components must be >= 1");

    const auto axis_terms = [sigma_scale](std::int64_t p) {
        const double center = (static_cast<double>(p) - 1.0) / 2.0;
        const double sigma = sigma_scale * static_cast<double>(p);
        std::vector<double> t(static_cast<std::size_t>(p));
        for (std::int64_t i = 0; i < p; ++i) {
            const double d = static_cast<double>(i) - center;
            t[static_cast<std::size_t>(i)] = d * d / (2.0 * sigma * sigma);
        }
        return t;
    };
    const auto tz = axis_terms(patch_size.z);
    const auto ty = axis_terms(patch_size.y);
    const auto tx = axis_terms(patch_size.x);

    WeightMap map;
    map.patch_size = patch_size;
    map.weights.resize(static_cast<std::size_t>(patch_size.voxels()));
    std::size_t i = 0;
    for (std::int64_t z = 0; z < patch_size.z; ++z)
        for (std::int64_t y = 0; y < patch_size.y; ++y)
            for (std::int64_t x = 0; x < patch_size.x; ++x)
                map.weights[i++] = std::max(
                    kWeightFloor,
                    std::exp(-(tz[static_cast<std::size_t>(z)] + ty[static_cast<std::size_t>(y)] +
                               tx[static_cast<std::size_t>(x)])));
    return map;
}

Volume3D fuse_patches(const std::vector<PatchPrediction>& preds, Shape3 out_shape,
                      const WeightMap& wmap, Spacing3 spacing) {
    if (out_shape.z < 1 || out_shape.y < 1 || out_shape.x < 1)
        throw ParameterError("fusion shape components must be >= 1");
    const Shape3 patch = wmap.patch_size;
    if (static_cast<std::int64_t>(wmap.weights.size()) != patch.voxels())
        throw DimensionError("weight map size does not match its patch size");

    const std::size_t n = static_cast<std::size_t>(out_shape.voxels());
    std::vector<double> num(n, 0.0), den(n, 0.0);

    for (const auto& pred : preds) {
        if (static_cast<std::int64_t>(pred.values.size()) != patch.voxels())
            throw DimensionError("patch prediction size does not match the weight map");
        const Shape3 o = pred.origin;
        if (o.z < 0 || o.y < 0 || o.x < 0)
            throw BoundsError("negative patch origin in fusion");
        const std::int64_t zmax = std::min(patch.z, out_shape.z - o.z);
        const std::int64_t ymax = std::min(patch.y, out_shape.y - o.y);
        const std::int64_t xmax = std::min(patch.x, out_shape.x - o.x);
        for (std::int64_t z = 0; z < zmax; ++z) {
            for (std::int64_t y = 0; y < ymax; ++y) {
                const std::int64_t src = (z * patch.y + y) * patch.x;
                const std::int64_t dst = out_shape.index(o.z + z, o.y + y, o.x);
                for (std::int64_t x = 0; x < xmax; ++x) {
                    const double w = wmap.weights[static_cast<std::size_t>(src + x)];
                    num[static_cast<std::size_t>(dst + x)] +=
                        w * static_cast<double>(pred.values[static_cast<std::size_t>(src + x)]);
                    den[static_cast<std::size_t>(dst + x)] += w;
                }
            }
        }
    }

    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (den[i] == 0.0)
            throw CoverageError("voxel " + std::to_string(i) + " not covered by any patch");
        out[i] = static_cast<float>(std::clamp(num[i] / den[i], 0.0, 1.0));
    }
    return Volume3D(out_shape, spacing, VolumeKind::Probability, std::move(out));
}

Volume3D sliding_window_infer(const MultiChannelVolume& mc, const PatchPredictor& predictor,
                              double overlap, const WeightMap& wmap, unsigned threads) {
    const PatchGrid grid = compute_grid(mc.shape(), wmap.patch_size, overlap);

    std::vector<PatchPrediction> preds(grid.origins.size());
    parallel_for(grid.origins.size(), threads, [&](std::size_t i) {
        const Shape3 origin = grid.origins[i];
        const PatchTensor patch = extract_patch(mc, origin, grid.patch_size);
        std::vector<float> values = predictor(patch);
        if (static_cast<std::int64_t>(values.size()) != grid.patch_size.voxels())
            throw ContractError("predictor returned a patch of the wrong size");
        for (float v : values)
            if (!(v >= 0.0f && v <= 1.0f))
                throw ContractError("predictor returned a probability outside [0, 1]");
        preds[i] = PatchPrediction{origin, std::move(values)};
    });

    Volume3D fused = fuse_patches(preds, grid.padded_extent, wmap, mc.spacing());
    if (grid.padded_extent == mc.shape()) return fused;

    // Crop the zero-padded region back off.
    const Shape3 s = mc.shape();
    std::vector<float> cropped(static_cast<std::size_t>(s.voxels()));
    for (std::int64_t z = 0; z < s.z; ++z)
        for (std::int64_t y = 0; y < s.y; ++y) {
            const float* src = fused.data().data() + fused.shape().index(z, y, 0);
            std::copy(src, src + s.x, cropped.data() + s.index(z, y, 0));
        }
    return Volume3D(s, mc.spacing(), VolumeKind::Probability, std::move(cropped));
}

} // namespace fpvolseg
