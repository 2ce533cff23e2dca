#ifndef FPVOLSEG_VOLUME_HPP
#define FPVOLSEG_VOLUME_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fpvolseg/error.hpp"
#include "fpvolseg/rng.hpp"

namespace fpvolseg {

// Grid dimensions in (z, y, x) order; x is fastest in memory (C order).
struct Shape3 {
    std::int64_t z = 0, y = 0, x = 0;

    std::int64_t voxels() const { return z * y * x; }
    std::int64_t index(std::int64_t iz, std::int64_t iy, std::int64_t ix) const {
        return (iz * y + iy) * x + ix;
    }
    bool operator==(const Shape3&) const = default;
};

// Physical voxel spacing in millimetres, (z, y, x).
struct Spacing3 {
    double z = 1.5, y = 1.5, x = 1.5;

    double voxel_volume_mm3() const { return z * y * x; }
    bool operator==(const Spacing3&) const = default;
};

inline constexpr Spacing3 kDefaultSpacing{}; // 1.5 mm isotropic

enum class VolumeKind { Image, Probability, Mask };

const char* to_string(VolumeKind kind);
VolumeKind volume_kind_from_string(const std::string& name);

// Dense single-channel 3D scalar grid. Immutable after construction, so
// instances can be shared read-only across threads; all mutation happens by
// constructing new volumes. Mask voxels are exactly 0 or 1; probability
// voxels lie in [0, 1]; every voxel is finite.
class Volume3D {
public:
    Volume3D(Shape3 shape, Spacing3 spacing, VolumeKind kind, std::vector<float> data);

    static Volume3D zeros(Shape3 shape, VolumeKind kind, Spacing3 spacing = kDefaultSpacing);

    const Shape3& shape() const { return shape_; }
    const Spacing3& spacing() const { return spacing_; }
    VolumeKind kind() const { return kind_; }
    std::span<const float> data() const { return data_; }

    float at(std::int64_t z, std::int64_t y, std::int64_t x) const {
        return data_[shape_.index(z, y, x)];
    }

    bool operator==(const Volume3D&) const = default;

private:
    Shape3 shape_;
    Spacing3 spacing_;
    VolumeKind kind_;
    std::vector<float> data_;
};

// Channel stack over one grid: channel 0 is CT, channel 1 is PET. All
// channels share shape and spacing.
class MultiChannelVolume {
public:
    explicit MultiChannelVolume(std::vector<Volume3D> channels);

    const std::vector<Volume3D>& channels() const { return channels_; }
    const Volume3D& channel(std::size_t i) const { return channels_.at(i); }
    std::size_t channel_count() const { return channels_.size(); }
    const Shape3& shape() const { return channels_.front().shape(); }
    const Spacing3& spacing() const { return channels_.front().spacing(); }

private:
    std::vector<Volume3D> channels_;
};

// FPVOL container I/O. Layout: 8-byte magic "FPVOL001", u32 little-endian
// JSON header length H, H bytes of UTF-8 JSON with keys shape, spacing_mm,
// dtype ("f32"|"u8") and kind, then the raw little-endian payload in C
// order with no padding. Masks are stored as u8 and widened to 0/1 floats
// in memory; everything else is f32. Round-trips are bit-exact.
Volume3D load_volume(const std::filesystem::path& path);
void save_volume(const Volume3D& v, const std::filesystem::path& path);

MultiChannelVolume stack_channels(const Volume3D& ct, const Volume3D& pet);

// Whole-volume z-score (population std). Constant input maps to all zeros.
Volume3D normalize_zscore(const Volume3D& v);

// Mirrors the selected axes. Applying the same decisions twice is the
// identity.
Volume3D flip_volume(const Volume3D& v, bool flip_z, bool flip_y, bool flip_x);

struct FlipDecisions {
    bool z = false, y = false, x = false;
};

struct FlipResult {
    MultiChannelVolume volume;
    Volume3D mask;
    FlipDecisions decisions;
};

// Flips each axis independently with probability 1/2, applying the same
// decisions to every channel and to the mask.
FlipResult random_flip(const MultiChannelVolume& mc, const Volume3D& mask, Rng& rng);

} // namespace fpvolseg

#endif
