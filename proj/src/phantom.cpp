#include "fpvolseg/phantom.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fpvolseg {

namespace {

struct Sphere {
    std::int64_t z, y, x;
    int r;
};

void check_spec(const PhantomSpec& spec) {
    if (spec.shape.z < 1 || spec.shape.y < 1 || spec.shape.x < 1)
        throw ParameterError("phantom shape components must be >= 1");
    if (spec.n_lesions < 0) throw ParameterError("lesion count must be >= 0");
    if (!std::isfinite(spec.pet_lesion_intensity) || !std::isfinite(spec.pet_background) ||
        !std::isfinite(spec.ct_contrast) || !std::isfinite(spec.noise_sigma))
        throw ParameterError("phantom intensities must be finite");
    if (spec.noise_sigma < 0.0) throw ParameterError("noise sigma must be >= 0");
    if (spec.n_lesions > 0) {
        if (spec.radius_min < 1 || spec.radius_max < spec.radius_min)
            throw ParameterError("bad lesion radius range");
        const std::int64_t min_dim = std::min({spec.shape.z, spec.shape.y, spec.shape.x});
        if (2 * static_cast<std::int64_t>(spec.radius_max) + 1 > min_dim)
            throw ParameterError("lesion radius does not fit inside the volume");
    }
}

} // namespace

std::int64_t ball_voxel_count(int radius) {
    if (radius < 0) throw ParameterError("radius must be >= 0");
    const std::int64_t r2 = static_cast<std::int64_t>(radius) * radius;
    std::int64_t count = 0;
    for (std::int64_t dz = -radius; dz <= radius; ++dz)
        for (std::int64_t dy = -radius; dy <= radius; ++dy)
            for (std::int64_t dx = -radius; dx <= radius; ++dx)
                if (dz * dz + dy * dy + dx * dx <= r2) ++count;
    return count;
}

PhantomCase generate_phantom(const PhantomSpec& spec) {
    check_spec(spec);
    Rng rng(spec.seed);
    const Shape3 s = spec.shape;
    const auto n = static_cast<std::size_t>(s.voxels());

    // Lesion placement: rejection sampling with a center-distance margin so
    // the discrete balls stay voxel-disjoint.
    std::vector<Sphere> spheres;
    constexpr int kMaxAttempts = 1000;
    for (int lesion = 0; lesion < spec.n_lesions; ++lesion) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            const int r = spec.radius_min +
                          static_cast<int>(rng.uniform_int(
                              static_cast<std::uint64_t>(spec.radius_max - spec.radius_min + 1)));
            const auto pick = [&rng, r](std::int64_t dim) {
                return static_cast<std::int64_t>(r) +
                       static_cast<std::int64_t>(
                           rng.uniform_int(static_cast<std::uint64_t>(dim - 2 * r)));
            };
            const Sphere candidate{pick(s.z), pick(s.y), pick(s.x), r};
            bool overlaps = false;
            for (const Sphere& other : spheres) {
                const double dz = static_cast<double>(candidate.z - other.z);
                const double dy = static_cast<double>(candidate.y - other.y);
                const double dx = static_cast<double>(candidate.x - other.x);
                const double min_dist = static_cast<double>(candidate.r + other.r + 1);
                if (dz * dz + dy * dy + dx * dx <= min_dist * min_dist) {
                    overlaps = true;
                    break;
                }
            }
            if (!overlaps) {
                spheres.push_back(candidate);
                placed = true;
            }
        }
        if (!placed)
            throw PlacementError("could not place lesion " + std::to_string(lesion + 1) +
                                 " without overlap after " + std::to_string(kMaxAttempts) +
                                 " attempts");
    }

    std::vector<float> mask(n, 0.0f);
    for (const Sphere& sp : spheres) {
        const std::int64_t r2 = static_cast<std::int64_t>(sp.r) * sp.r;
        for (std::int64_t z = sp.z - sp.r; z <= sp.z + sp.r; ++z)
            for (std::int64_t y = sp.y - sp.r; y <= sp.y + sp.r; ++y)
                for (std::int64_t x = sp.x - sp.r; x <= sp.x + sp.r; ++x) {
                    const std::int64_t dz = z - sp.z, dy = y - sp.y, dx = x - sp.x;
                    if (dz * dz + dy * dy + dx * dx <= r2)
                        mask[static_cast<std::size_t>(s.index(z, y, x))] = 1.0f;
                }
    }

    // CT: smooth random ramp, lesion contrast, noise.
    const double az = rng.uniform(-1.0, 1.0);
    const double ay = rng.uniform(-1.0, 1.0);
    const double ax = rng.uniform(-1.0, 1.0);
    std::vector<float> ct(n);
    {
        std::size_t i = 0;
        for (std::int64_t z = 0; z < s.z; ++z)
            for (std::int64_t y = 0; y < s.y; ++y)
                for (std::int64_t x = 0; x < s.x; ++x, ++i) {
                    const double ramp = az * static_cast<double>(z) / static_cast<double>(s.z) +
                                        ay * static_cast<double>(y) / static_cast<double>(s.y) +
                                        ax * static_cast<double>(x) / static_cast<double>(s.x);
                    const double lesion = mask[i] != 0.0f ? spec.ct_contrast : 0.0;
                    ct[i] = static_cast<float>(ramp + lesion + rng.normal(0.0, spec.noise_sigma));
                }
    }

    std::vector<float> pet(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lesion = mask[i] != 0.0f ? spec.pet_lesion_intensity : 0.0;
        pet[i] = static_cast<float>(spec.pet_background + lesion +
                                    rng.normal(0.0, spec.noise_sigma));
    }

    return PhantomCase{Volume3D(s, spec.spacing, VolumeKind::Image, std::move(ct)),
                       Volume3D(s, spec.spacing, VolumeKind::Image, std::move(pet)),
                       Volume3D(s, spec.spacing, VolumeKind::Mask, std::move(mask))};
}

Volume3D likelihood_ratio_mask(const Volume3D& pet_raw, double pet_background,
                               double pet_lesion_intensity) {
    if (!(pet_lesion_intensity > 0.0))
        throw ParameterError("lesion intensity must be positive");
    const double threshold = pet_background + 0.5 * pet_lesion_intensity;
    const auto data = pet_raw.data();
    std::vector<float> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out[i] = static_cast<double>(data[i]) > threshold ? 1.0f : 0.0f;
    return Volume3D(pet_raw.shape(), pet_raw.spacing(), VolumeKind::Mask, std::move(out));
}

} // namespace fpvolseg
