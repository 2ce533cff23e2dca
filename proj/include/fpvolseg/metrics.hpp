#ifndef FPVOLSEG_METRICS_HPP
#define FPVOLSEG_METRICS_HPP

#include <cstdint>
#include <vector>

#include "fpvolseg/volume.hpp"

namespace fpvolseg {

enum class Connectivity { Faces6 = 6, FacesEdges18 = 18, Full26 = 26 };

Connectivity connectivity_from_int(int value);

// Labels are assigned in first-encounter order of a C-order scan, so a
// given mask always labels identically. 0 is background.
struct ComponentLabeling {
    std::vector<std::int32_t> labels;
    std::int32_t num_components = 0;
    Connectivity connectivity = Connectivity::FacesEdges18;
};

struct MetricsReport {
    double dice = 0.0;
    double fpv_ml = 0.0;
    double fnv_ml = 0.0;
    double score = 0.0;
};

// 2|P n G| / (|P| + |G|); two empty masks agree perfectly (1.0).
double dice_coefficient(const Volume3D& pred, const Volume3D& gt);

// Union-find two-pass labeling.
ComponentLabeling connected_components(const Volume3D& mask, Connectivity conn);

// Total volume (ml) of predicted components with no ground-truth overlap; a
// single shared voxel disqualifies the whole component.
double fpv(const Volume3D& pred, const Volume3D& gt, Connectivity conn);

// Total volume (ml) of ground-truth components with no predicted overlap.
// Dual of fpv: fnv(pred, gt) == fpv(gt, pred).
double fnv(const Volume3D& pred, const Volume3D& gt, Connectivity conn);

// dice - 0.1 * fpv_ml - 0.1 * fnv_ml; may be negative.
double aggregate_score(double dice, double fpv_ml, double fnv_ml);

MetricsReport evaluate_case(const Volume3D& pred, const Volume3D& gt, Connectivity conn);

} // namespace fpvolseg

#endif
