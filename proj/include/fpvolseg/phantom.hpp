#ifndef FPVOLSEG_PHANTOM_HPP
#define FPVOLSEG_PHANTOM_HPP

#include <cstdint>

#include "fpvolseg/volume.hpp"

namespace fpvolseg {

// Parameters of one synthetic (CT, PET, mask) case: lesions are
// non-overlapping spheres fully inside the volume, PET adds the lesion
// intensity over a noisy background, CT carries an independent smooth
// texture plus contrast inside the lesions.
struct PhantomSpec {
    Shape3 shape{64, 64, 64};
    int n_lesions = 2;
    int radius_min = 4;
    int radius_max = 8;
    double pet_lesion_intensity = 10.0;
    double pet_background = 1.0;
    double ct_contrast = 2.0;
    double noise_sigma = 1.0;
    Spacing3 spacing = kDefaultSpacing;
    std::uint64_t seed = 0;
};

struct PhantomCase {
    Volume3D ct;
    Volume3D pet;
    Volume3D mask;
};

// Deterministic per seed. Throws PlacementError when non-overlapping
// spheres cannot be placed within a bounded number of retries.
PhantomCase generate_phantom(const PhantomSpec& spec);

// Voxel count of the discrete ball |v - c|^2 <= r^2; the mask rasterizer
// uses the same predicate.
std::int64_t ball_voxel_count(int radius);

// Voxelwise likelihood-ratio classifier on the raw PET channel: lesion iff
// pet > background + intensity / 2 (equal-variance Gaussian midpoint). Used
// to check that a generated dataset is actually separable.
Volume3D likelihood_ratio_mask(const Volume3D& pet_raw, double pet_background,
                               double pet_lesion_intensity);

} // namespace fpvolseg

#endif
