// Independent reference implementations used only by tests. These stay
// deliberately naive (direct sums, BFS, per-voxel filters) so they share no
// code path with the library.
#ifndef FPVOLSEG_TEST_ORACLES_HPP
#define FPVOLSEG_TEST_ORACLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "fpvolseg/volume.hpp"

namespace oracles {

// Central finite differences of f at p.
inline std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> p, double h = 1e-5) {
    std::vector<double> grad(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + h;
        const double hi = f(p);
        p[i] = saved - h;
        const double lo = f(p);
        p[i] = saved;
        grad[i] = (hi - lo) / (2.0 * h);
    }
    return grad;
}

inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-10});
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return worst;
}

struct OtsuResult {
    double threshold = 0.0;
    std::size_t split_index = 0;
};

// Direct O(n^2) between-class variance maximization over the sorted sample.
inline OtsuResult brute_force_otsu(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (values.front() == values.back()) return {values.front(), n};

    std::size_t best_k = 0;
    double best_var = -1.0;
    for (std::size_t k = 1; k < n; ++k) {
        double low_sum = 0.0, high_sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) low_sum += values[i];
        for (std::size_t i = k; i < n; ++i) high_sum += values[i];
        const double mu_low = low_sum / static_cast<double>(k);
        const double mu_high = high_sum / static_cast<double>(n - k);
        const double w = (static_cast<double>(k) / static_cast<double>(n)) *
                         (static_cast<double>(n - k) / static_cast<double>(n));
        const double var = w * (mu_low - mu_high) * (mu_low - mu_high);
        if (var > best_var) {
            best_var = var;
            best_k = k;
        }
    }
    return {0.5 * (values[best_k - 1] + values[best_k]), best_k};
}

inline std::vector<std::array<int, 3>> neighbor_offsets(int connectivity) {
    std::vector<std::array<int, 3>> out;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int order = std::abs(dz) + std::abs(dy) + std::abs(dx);
                if (order == 0) continue;
                if (connectivity == 6 && order != 1) continue;
                if (connectivity == 18 && order > 2) continue;
                out.push_back({dz, dy, dx});
            }
    return out;
}

// BFS flood-fill labeling; labels are assigned in scan order.
inline std::vector<std::int32_t> flood_fill_labels(const fpvolseg::Volume3D& mask,
                                                   int connectivity) {
    const fpvolseg::Shape3 s = mask.shape();
    const auto data = mask.data();
    const auto offsets = neighbor_offsets(connectivity);
    std::vector<std::int32_t> labels(data.size(), 0);
    std::int32_t next = 0;

    for (std::int64_t z = 0; z < s.z; ++z)
        for (std::int64_t y = 0; y < s.y; ++y)
            for (std::int64_t x = 0; x < s.x; ++x) {
                const auto start = static_cast<std::size_t>(s.index(z, y, x));
                if (data[start] == 0.0f || labels[start] != 0) continue;
                ++next;
                std::deque<std::array<std::int64_t, 3>> queue{{z, y, x}};
                labels[start] = next;
                while (!queue.empty()) {
                    const auto [cz, cy, cx] = queue.front();
                    queue.pop_front();
                    for (const auto& d : offsets) {
                        const std::int64_t nz = cz + d[0], ny = cy + d[1], nx = cx + d[2];
                        if (nz < 0 || ny < 0 || nx < 0 || nz >= s.z || ny >= s.y || nx >= s.x)
                            continue;
                        const auto ni = static_cast<std::size_t>(s.index(nz, ny, nx));
                        if (data[ni] == 0.0f || labels[ni] != 0) continue;
                        labels[ni] = next;
                        queue.push_back({nz, ny, nx});
                    }
                }
            }
    return labels;
}

// Two labelings describe the same partition when the voxel-level
// co-labeling relation matches; label numbering is allowed to differ.
inline bool same_partition(const std::vector<std::int32_t>& a,
                           const std::vector<std::int32_t>& b) {
    if (a.size() != b.size()) return false;
    std::vector<std::int32_t> a_to_b, b_to_a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] == 0) != (b[i] == 0)) return false;
        if (a[i] == 0) continue;
        if (static_cast<std::size_t>(a[i]) >= a_to_b.size()) a_to_b.resize(a[i] + 1, -1);
        if (static_cast<std::size_t>(b[i]) >= b_to_a.size()) b_to_a.resize(b[i] + 1, -1);
        if (a_to_b[a[i]] == -1) a_to_b[a[i]] = b[i];
        if (b_to_a[b[i]] == -1) b_to_a[b[i]] = a[i];
        if (a_to_b[a[i]] != b[i] || b_to_a[b[i]] != a[i]) return false;
    }
    return true;
}

// Brute-force min/max filter over an explicit offset list; out-of-volume
// voxels count as background.
inline fpvolseg::Volume3D min_max_filter(const fpvolseg::Volume3D& mask,
                                         const std::vector<fpvolseg::Shape3>& offsets,
                                         bool take_min) {
    const fpvolseg::Shape3 s = mask.shape();
    std::vector<float> out(mask.data().size(), 0.0f);
    for (std::int64_t z = 0; z < s.z; ++z)
        for (std::int64_t y = 0; y < s.y; ++y)
            for (std::int64_t x = 0; x < s.x; ++x) {
                float extreme = take_min ? 1.0f : 0.0f;
                for (const auto& d : offsets) {
                    const std::int64_t nz = z + d.z, ny = y + d.y, nx = x + d.x;
                    float v = 0.0f;
                    if (nz >= 0 && ny >= 0 && nx >= 0 && nz < s.z && ny < s.y && nx < s.x)
                        v = mask.at(nz, ny, nx);
                    extreme = take_min ? std::min(extreme, v) : std::max(extreme, v);
                }
                out[static_cast<std::size_t>(s.index(z, y, x))] = extreme;
            }
    return fpvolseg::Volume3D(s, mask.spacing(), fpvolseg::VolumeKind::Mask, std::move(out));
}

} // namespace oracles

#endif
