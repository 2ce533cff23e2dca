#ifndef FPVOLSEG_MORPHOLOGY_HPP
#define FPVOLSEG_MORPHOLOGY_HPP

#include "fpvolseg/volume.hpp"

namespace fpvolseg {

// Offsets of the discrete ball: every voxel whose unit cube intersects the
// Euclidean ball of the given radius. Radius 1 covers the full
// 26-neighborhood plus the center.
std::vector<Shape3> ball_offsets(int radius);

// Out-of-volume voxels count as background, so erosion also peels the
// volume border.
Volume3D erode(const Volume3D& mask, int radius);
Volume3D dilate(const Volume3D& mask, int radius);

// Morphological opening: dilate(erode(mask)). Removes components smaller
// than the structuring element; idempotent.
Volume3D postprocess_open(const Volume3D& mask, int radius);

} // namespace fpvolseg

#endif
