#include "fpvolseg/volume.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace fpvolseg {

static_assert(std::endian::native == std::endian::little,
              "FPVOL payloads are written in native byte order");

namespace {

constexpr char kMagic[8] = {'F', 'P', 'V', 'O', 'L', '0', '0', '1'};

void check_shape_spacing(const Shape3& shape, const Spacing3& spacing) {
    if (shape.z <= 0 || shape.y <= 0 || shape.x <= 0)
        throw ParameterError("volume shape components must be positive");
    if (!(spacing.z > 0.0) || !(spacing.y > 0.0) || !(spacing.x > 0.0))
        throw ParameterError("voxel spacing components must be positive");
}

void check_values(VolumeKind kind, std::span<const float> data) {
    switch (kind) {
    case VolumeKind::Mask:
        for (float v : data)
            if (v != 0.0f && v != 1.0f)
                throw ValueError("mask volume contains a value outside {0, 1}");
        break;
    case VolumeKind::Probability:
        for (float v : data)
            if (!(v >= 0.0f && v <= 1.0f))
                throw ValueError("probability volume contains a value outside [0, 1]");
        break;
    case VolumeKind::Image:
        for (float v : data)
            if (!std::isfinite(v))
                throw ValueError("image volume contains a non-finite value");
        break;
    }
}

} // namespace

const char* to_string(VolumeKind kind) {
    switch (kind) {
    case VolumeKind::Image: return "image";
    case VolumeKind::Probability: return "probability";
    case VolumeKind::Mask: return "mask";
    }
    return "image";
}

VolumeKind volume_kind_from_string(const std::string& name) {
    if (name == "image") return VolumeKind::Image;
    if (name == "probability") return VolumeKind::Probability;
    if (name == "mask") return VolumeKind::Mask;
    throw FormatError("unknown volume kind: " + name);
}

Volume3D::Volume3D(Shape3 shape, Spacing3 spacing, VolumeKind kind, std::vector<float> data)
    : shape_(shape), spacing_(spacing), kind_(kind), data_(std::move(data)) {
    check_shape_spacing(shape_, spacing_);
    if (static_cast<std::int64_t>(data_.size()) != shape_.voxels())
        throw DimensionError("volume data length does not match shape");
    check_values(kind_, data_);
}

Volume3D Volume3D::zeros(Shape3 shape, VolumeKind kind, Spacing3 spacing) {
    check_shape_spacing(shape, spacing);
    return Volume3D(shape, spacing, kind,
                    std::vector<float>(static_cast<std::size_t>(shape.voxels()), 0.0f));
}

MultiChannelVolume::MultiChannelVolume(std::vector<Volume3D> channels)
    : channels_(std::move(channels)) {
    if (channels_.empty())
        throw ParameterError("multi-channel volume needs at least one channel");
    for (const auto& c : channels_) {
        if (c.shape() != channels_.front().shape())
            throw DimensionError("channel shapes differ");
        if (c.spacing() != channels_.front().spacing())
            throw DimensionError("channel spacings differ");
    }
}

Volume3D load_volume(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    char magic[8];
    in.read(magic, sizeof(magic));
    if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("not an FPVOL file: " + path.string());

    unsigned char len_bytes[4];
    in.read(reinterpret_cast<char*>(len_bytes), 4);
    if (in.gcount() != 4) throw CorruptFileError("truncated FPVOL header length");
    const std::uint32_t header_len = static_cast<std::uint32_t>(len_bytes[0]) |
                                     (static_cast<std::uint32_t>(len_bytes[1]) << 8) |
                                     (static_cast<std::uint32_t>(len_bytes[2]) << 16) |
                                     (static_cast<std::uint32_t>(len_bytes[3]) << 24);
    if (header_len > (1u << 20))
        throw CorruptFileError("implausible FPVOL header length");

    std::string header_text(header_len, '\0');
    in.read(header_text.data(), header_len);
    if (in.gcount() != static_cast<std::streamsize>(header_len))
        throw CorruptFileError("truncated FPVOL header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad FPVOL header JSON: ") + e.what());
    }

    Shape3 shape;
    Spacing3 spacing;
    std::string dtype, kind_name;
    try {
        const auto& js = header.at("shape");
        const auto& jsp = header.at("spacing_mm");
        if (js.size() != 3 || jsp.size() != 3)
            throw FormatError("FPVOL shape/spacing_mm must have 3 entries");
        shape = {js.at(0).get<std::int64_t>(), js.at(1).get<std::int64_t>(),
                 js.at(2).get<std::int64_t>()};
        spacing = {jsp.at(0).get<double>(), jsp.at(1).get<double>(),
                   jsp.at(2).get<double>()};
        dtype = header.at("dtype").get<std::string>();
        kind_name = header.at("kind").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("incomplete FPVOL header: ") + e.what());
    }

    if (dtype != "f32" && dtype != "u8")
        throw FormatError("unknown FPVOL dtype: " + dtype);
    const VolumeKind kind = volume_kind_from_string(kind_name);
    if (shape.z <= 0 || shape.y <= 0 || shape.x <= 0)
        throw CorruptFileError("non-positive FPVOL shape");
    if (!(spacing.z > 0.0 && spacing.y > 0.0 && spacing.x > 0.0))
        throw CorruptFileError("non-positive FPVOL spacing");

    const std::int64_t voxels = shape.voxels();
    const std::size_t value_size = dtype == "f32" ? 4 : 1;
    const std::streamoff payload_start = in.tellg();
    in.seekg(0, std::ios::end);
    const auto payload_size = static_cast<std::size_t>(
        static_cast<std::streamoff>(in.tellg()) - payload_start);
    if (payload_size != static_cast<std::size_t>(voxels) * value_size)
        throw CorruptFileError("FPVOL payload length does not match header shape/dtype");
    in.seekg(payload_start);
    std::vector<char> payload(payload_size);
    in.read(payload.data(), static_cast<std::streamsize>(payload_size));
    if (in.gcount() != static_cast<std::streamsize>(payload_size))
        throw CorruptFileError("truncated FPVOL payload");

    std::vector<float> data(static_cast<std::size_t>(voxels));
    if (dtype == "f32") {
        std::memcpy(data.data(), payload.data(), payload.size());
    } else {
        for (std::int64_t i = 0; i < voxels; ++i)
            data[static_cast<std::size_t>(i)] =
                static_cast<float>(static_cast<unsigned char>(payload[static_cast<std::size_t>(i)]));
    }

    try {
        return Volume3D(shape, spacing, kind, std::move(data));
    } catch (const ContractError& e) {
        throw CorruptFileError(std::string("FPVOL payload violates kind constraints: ") + e.what());
    }
}

void save_volume(const Volume3D& v, const std::filesystem::path& path) {
    nlohmann::json header;
    header["shape"] = {v.shape().z, v.shape().y, v.shape().x};
    header["spacing_mm"] = {v.spacing().z, v.spacing().y, v.spacing().x};
    header["dtype"] = v.kind() == VolumeKind::Mask ? "u8" : "f32";
    header["kind"] = to_string(v.kind());
    const std::string header_text = header.dump();
    const auto header_len = static_cast<std::uint32_t>(header_text.size());

    // Write to a sibling temp file and rename so readers never observe a
    // partial volume.
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out.write(kMagic, sizeof(kMagic));
        const unsigned char len_bytes[4] = {
            static_cast<unsigned char>(header_len & 0xff),
            static_cast<unsigned char>((header_len >> 8) & 0xff),
            static_cast<unsigned char>((header_len >> 16) & 0xff),
            static_cast<unsigned char>((header_len >> 24) & 0xff)};
        out.write(reinterpret_cast<const char*>(len_bytes), 4);
        out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
        if (v.kind() == VolumeKind::Mask) {
            std::vector<unsigned char> bytes(v.data().size());
            for (std::size_t i = 0; i < bytes.size(); ++i)
                bytes[i] = v.data()[i] != 0.0f ? 1 : 0;
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
        } else {
            out.write(reinterpret_cast<const char*>(v.data().data()),
                      static_cast<std::streamsize>(v.data().size() * sizeof(float)));
        }
        if (!out) throw IoError("write failed for " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string());
}

MultiChannelVolume stack_channels(const Volume3D& ct, const Volume3D& pet) {
    if (ct.shape() != pet.shape())
        throw DimensionError("CT and PET shapes differ");
    if (ct.spacing() != pet.spacing())
        throw DimensionError("CT and PET spacings differ");
    return MultiChannelVolume({ct, pet});
}

Volume3D normalize_zscore(const Volume3D& v) {
    if (v.kind() != VolumeKind::Image)
        throw KindError("z-score normalization expects an image volume");

    const auto data = v.data();
    const double n = static_cast<double>(data.size());
    double sum = 0.0;
    for (float x : data) sum += x;
    const double mean = sum / n;
    double sq = 0.0;
    for (float x : data) {
        const double d = x - mean;
        sq += d * d;
    }
    const double std_dev = std::sqrt(sq / n);

    std::vector<float> out(data.size(), 0.0f);
    if (std_dev > 1e-8) {
        for (std::size_t i = 0; i < data.size(); ++i)
            out[i] = static_cast<float>((data[i] - mean) / std_dev);
    }
    return Volume3D(v.shape(), v.spacing(), VolumeKind::Image, std::move(out));
}

Volume3D flip_volume(const Volume3D& v, bool flip_z, bool flip_y, bool flip_x) {
    const Shape3 s = v.shape();
    std::vector<float> out(static_cast<std::size_t>(s.voxels()));
    for (std::int64_t z = 0; z < s.z; ++z) {
        const std::int64_t sz = flip_z ? s.z - 1 - z : z;
        for (std::int64_t y = 0; y < s.y; ++y) {
            const std::int64_t sy = flip_y ? s.y - 1 - y : y;
            for (std::int64_t x = 0; x < s.x; ++x) {
                const std::int64_t sx = flip_x ? s.x - 1 - x : x;
                out[static_cast<std::size_t>(s.index(z, y, x))] = v.at(sz, sy, sx);
            }
        }
    }
    return Volume3D(s, v.spacing(), v.kind(), std::move(out));
}

FlipResult random_flip(const MultiChannelVolume& mc, const Volume3D& mask, Rng& rng) {
    if (mask.shape() != mc.shape())
        throw DimensionError("mask shape differs from channel shape");

    const FlipDecisions d{rng.coin(), rng.coin(), rng.coin()};
    std::vector<Volume3D> flipped;
    flipped.reserve(mc.channel_count());
    for (const auto& c : mc.channels())
        flipped.push_back(flip_volume(c, d.z, d.y, d.x));
    return FlipResult{MultiChannelVolume(std::move(flipped)),
                      flip_volume(mask, d.z, d.y, d.x), d};
}

} // namespace fpvolseg
