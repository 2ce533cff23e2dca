#include "fpvolseg/morphology.hpp"

#include <algorithm>
#include <cmath>

namespace fpvolseg {

namespace {

void check_args(const Volume3D& mask, int radius) {
    if (mask.kind() != VolumeKind::Mask)
        throw KindError("morphology expects a mask volume");
    if (radius < 1) throw ParameterError("structuring element radius must be >= 1");
}

enum class Morph { Erode, Dilate };

Volume3D apply(const Volume3D& mask, int radius, Morph op) {
    const auto offsets = ball_offsets(radius);
    const Shape3 s = mask.shape();
    const auto data = mask.data();
    std::vector<float> out(static_cast<std::size_t>(s.voxels()), 0.0f);

    for (std::int64_t z = 0; z < s.z; ++z)
        for (std::int64_t y = 0; y < s.y; ++y)
            for (std::int64_t x = 0; x < s.x; ++x) {
                bool result = op == Morph::Erode;
                for (const auto& d : offsets) {
                    const std::int64_t nz = z + d.z, ny = y + d.y, nx = x + d.x;
                    const bool inside = nz >= 0 && ny >= 0 && nx >= 0 && nz < s.z &&
                                        ny < s.y && nx < s.x;
                    const bool fg =
                        inside && data[static_cast<std::size_t>(s.index(nz, ny, nx))] != 0.0f;
                    if (op == Morph::Erode && !fg) {
                        result = false;
                        break;
                    }
                    if (op == Morph::Dilate && fg) {
                        result = true;
                        break;
                    }
                }
                out[static_cast<std::size_t>(s.index(z, y, x))] = result ? 1.0f : 0.0f;
            }
    return Volume3D(s, mask.spacing(), VolumeKind::Mask, std::move(out));
}

} // namespace

std::vector<Shape3> ball_offsets(int radius) {
    if (radius < 1) throw ParameterError("structuring element radius must be >= 1");
    const double r2 = static_cast<double>(radius) * static_cast<double>(radius);
    std::vector<Shape3> offsets;
    for (int dz = -radius; dz <= radius; ++dz)
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                // Distance from the origin to the voxel's unit cube.
                const double mz = std::max(std::abs(dz) - 0.5, 0.0);
                const double my = std::max(std::abs(dy) - 0.5, 0.0);
                const double mx = std::max(std::abs(dx) - 0.5, 0.0);
                if (mz * mz + my * my + mx * mx <= r2)
                    offsets.push_back(Shape3{dz, dy, dx});
            }
    return offsets;
}

Volume3D erode(const Volume3D& mask, int radius) {
    check_args(mask, radius);
    return apply(mask, radius, Morph::Erode);
}

Volume3D dilate(const Volume3D& mask, int radius) {
    check_args(mask, radius);
    return apply(mask, radius, Morph::Dilate);
}

Volume3D postprocess_open(const Volume3D& mask, int radius) {
    check_args(mask, radius);
    return dilate(erode(mask, radius), radius);
}

} // namespace fpvolseg
