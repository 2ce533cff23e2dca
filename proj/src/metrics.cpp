#include "fpvolseg/metrics.hpp"

#include <array>

namespace fpvolseg {

namespace {

void check_mask(const Volume3D& v, const char* what) {
    if (v.kind() != VolumeKind::Mask)
        throw KindError(std::string(what) + " must be a mask volume");
}

void check_pair(const Volume3D& pred, const Volume3D& gt) {
    check_mask(pred, "prediction");
    check_mask(gt, "ground truth");
    if (pred.shape() != gt.shape()) throw DimensionError("mask shapes differ");
    if (pred.spacing() != gt.spacing()) throw DimensionError("mask spacings differ");
}

bool offset_in_connectivity(int dz, int dy, int dx, Connectivity conn) {
    const int order = std::abs(dz) + std::abs(dy) + std::abs(dx);
    if (order == 0) return false;
    switch (conn) {
    case Connectivity::Faces6: return order == 1;
    case Connectivity::FacesEdges18: return order <= 2;
    case Connectivity::Full26: return true;
    }
    return false;
}

// Offsets that precede the current voxel in a C-order scan.
std::vector<std::array<int, 3>> prior_offsets(Connectivity conn) {
    std::vector<std::array<int, 3>> out;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (!offset_in_connectivity(dz, dy, dx, conn)) continue;
                if (dz < 0 || (dz == 0 && dy < 0) || (dz == 0 && dy == 0 && dx < 0))
                    out.push_back({dz, dy, dx});
            }
    return out;
}

class DisjointSet {
public:
    std::int32_t make_set() {
        parent_.push_back(static_cast<std::int32_t>(parent_.size()));
        return parent_.back();
    }
    std::int32_t find(std::int32_t a) {
        while (parent_[static_cast<std::size_t>(a)] != a) {
            parent_[static_cast<std::size_t>(a)] =
                parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(a)])];
            a = parent_[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void merge(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b); // keep the earliest label as root
        parent_[static_cast<std::size_t>(b)] = a;
    }

private:
    std::vector<std::int32_t> parent_;
};

// Milliliters of base-mask components that share no voxel with the other
// mask. fpv and fnv are this with the roles swapped.
double unmatched_component_volume_ml(const Volume3D& base, const Volume3D& other,
                                     Connectivity conn) {
    const ComponentLabeling labeling = connected_components(base, conn);
    if (labeling.num_components == 0) return 0.0;

    std::vector<std::int64_t> voxel_count(static_cast<std::size_t>(labeling.num_components) + 1, 0);
    std::vector<char> touched(static_cast<std::size_t>(labeling.num_components) + 1, 0);
    const auto other_data = other.data();
    for (std::size_t i = 0; i < labeling.labels.size(); ++i) {
        const std::int32_t label = labeling.labels[i];
        if (label == 0) continue;
        ++voxel_count[static_cast<std::size_t>(label)];
        if (other_data[i] != 0.0f) touched[static_cast<std::size_t>(label)] = 1;
    }

    const double voxel_ml = base.spacing().voxel_volume_mm3() / 1000.0;
    double total = 0.0;
    for (std::int32_t label = 1; label <= labeling.num_components; ++label)
        if (!touched[static_cast<std::size_t>(label)])
            total += static_cast<double>(voxel_count[static_cast<std::size_t>(label)]) * voxel_ml;
    return total;
}

} // namespace

Connectivity connectivity_from_int(int value) {
    switch (value) {
    case 6: return Connectivity::Faces6;
    case 18: return Connectivity::FacesEdges18;
    case 26: return Connectivity::Full26;
    default: throw ParameterError("connectivity must be 6, 18 or 26");
    }
}

double dice_coefficient(const Volume3D& pred, const Volume3D& gt) {
    check_mask(pred, "prediction");
    check_mask(gt, "ground truth");
    if (pred.shape() != gt.shape()) throw DimensionError("mask shapes differ");

    std::int64_t inter = 0, p_size = 0, g_size = 0;
    const auto pd = pred.data();
    const auto gd = gt.data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
        const bool p = pd[i] != 0.0f;
        const bool g = gd[i] != 0.0f;
        inter += p && g;
        p_size += p;
        g_size += g;
    }
    if (p_size + g_size == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(p_size + g_size);
}

ComponentLabeling connected_components(const Volume3D& mask, Connectivity conn) {
    check_mask(mask, "labeling input");
    const Shape3 s = mask.shape();
    const auto data = mask.data();
    const auto offsets = prior_offsets(conn);

    ComponentLabeling out;
    out.connectivity = conn;
    out.labels.assign(static_cast<std::size_t>(s.voxels()), 0);

    // Provisional labels are 0-based in the disjoint set; 0 in out.labels
    // stays background until the relabel pass.
    std::vector<std::int32_t> provisional(static_cast<std::size_t>(s.voxels()), -1);
    DisjointSet dsu;
    for (std::int64_t z = 0; z < s.z; ++z)
        for (std::int64_t y = 0; y < s.y; ++y)
            for (std::int64_t x = 0; x < s.x; ++x) {
                const std::int64_t idx = s.index(z, y, x);
                if (data[static_cast<std::size_t>(idx)] == 0.0f) continue;
                std::int32_t label = -1;
                for (const auto& d : offsets) {
                    const std::int64_t nz = z + d[0], ny = y + d[1], nx = x + d[2];
                    if (nz < 0 || ny < 0 || nx < 0 || nz >= s.z || ny >= s.y || nx >= s.x)
                        continue;
                    const std::int32_t neighbor =
                        provisional[static_cast<std::size_t>(s.index(nz, ny, nx))];
                    if (neighbor < 0) continue;
                    if (label < 0)
                        label = dsu.find(neighbor);
                    else
                        dsu.merge(label, neighbor);
                }
                if (label < 0) label = dsu.make_set();
                provisional[static_cast<std::size_t>(idx)] = label;
            }

    // Relabel roots in first-encounter order.
    std::vector<std::int32_t> final_label;
    for (std::size_t i = 0; i < provisional.size(); ++i) {
        if (provisional[i] < 0) continue;
        const auto root = static_cast<std::size_t>(dsu.find(provisional[i]));
        if (root >= final_label.size()) final_label.resize(root + 1, 0);
        if (final_label[root] == 0) final_label[root] = ++out.num_components;
        out.labels[i] = final_label[root];
    }
    return out;
}

double fpv(const Volume3D& pred, const Volume3D& gt, Connectivity conn) {
    check_pair(pred, gt);
    return unmatched_component_volume_ml(pred, gt, conn);
}

double fnv(const Volume3D& pred, const Volume3D& gt, Connectivity conn) {
    check_pair(pred, gt);
    return unmatched_component_volume_ml(gt, pred, conn);
}

double aggregate_score(double dice, double fpv_ml, double fnv_ml) {
    if (!(dice >= 0.0 && dice <= 1.0)) throw RangeError("dice must lie in [0, 1]");
    if (!(fpv_ml >= 0.0) || !(fnv_ml >= 0.0))
        throw RangeError("component volumes must be >= 0");
    return dice - 0.1 * fpv_ml - 0.1 * fnv_ml;
}

MetricsReport evaluate_case(const Volume3D& pred, const Volume3D& gt, Connectivity conn) {
    check_pair(pred, gt);
    MetricsReport report;
    report.dice = dice_coefficient(pred, gt);
    report.fpv_ml = fpv(pred, gt, conn);
    report.fnv_ml = fnv(pred, gt, conn);
    report.score = aggregate_score(report.dice, report.fpv_ml, report.fnv_ml);
    return report;
}

} // namespace fpvolseg
