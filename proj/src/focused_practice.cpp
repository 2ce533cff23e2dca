#include "fpvolseg/focused_practice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "fpvolseg/text_io.hpp"

namespace fpvolseg {

void LossRegistry::record_loss(PatchId id, double loss) {
    if (!std::isfinite(loss) || loss < 0.0)
        throw ValueError("recorded loss must be finite and >= 0");
    entries_[id] = loss;
}

OtsuSplit otsu_threshold(std::vector<double> values) {
    if (values.empty()) throw ParameterError("otsu threshold of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (values.front() == values.back())
        return OtsuSplit{values.front(), n};

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
    const double total = prefix[n];
    const double inv_n = 1.0 / static_cast<double>(n);

    std::size_t best_k = 1;
    double best_var = -1.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double mu_low = prefix[k] / static_cast<double>(k);
        const double mu_high = (total - prefix[k]) / static_cast<double>(n - k);
        const double w = static_cast<double>(k) * inv_n * (static_cast<double>(n - k) * inv_n);
        const double var = w * (mu_low - mu_high) * (mu_low - mu_high);
        if (var > best_var) { // strict: ties keep the smallest k
            best_var = var;
            best_k = k;
        }
    }
    return OtsuSplit{0.5 * (values[best_k - 1] + values[best_k]), best_k};
}

Classification classify(const LossRegistry& reg) {
    if (reg.empty()) throw ParameterError("classify over an empty registry");

    std::vector<double> losses;
    losses.reserve(reg.size());
    for (const auto& [id, loss] : reg.entries()) losses.push_back(loss);
    const OtsuSplit split = otsu_threshold(std::move(losses));

    Classification cls;
    cls.threshold = split.threshold;
    std::vector<std::pair<double, PatchId>> hard;
    for (const auto& [id, loss] : reg.entries()) {
        if (split.split_index < reg.size() && loss > split.threshold)
            hard.emplace_back(loss, id);
        else
            cls.easy.push_back(id); // map order: id ascending
    }
    std::sort(hard.begin(), hard.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });
    cls.hard.reserve(hard.size());
    for (const auto& [loss, id] : hard) cls.hard.push_back(id);
    return cls;
}

EpochPlan build_epoch_plan(const LossRegistry& reg, int oversample_factor,
                           double exclude_frac, Rng& rng) {
    if (reg.empty()) throw ParameterError("cannot plan an epoch from an empty registry");
    if (oversample_factor < 1) throw ParameterError("oversample factor must be >= 1");
    if (!(exclude_frac >= 0.0 && exclude_frac < 1.0))
        throw ParameterError("exclude fraction must lie in [0, 1)");

    const Classification cls = classify(reg);
    const auto n_excluded = static_cast<std::size_t>(
        std::floor(exclude_frac * static_cast<double>(cls.hard.size())));

    EpochPlan plan;
    plan.threshold = cls.threshold;
    plan.hard_count = cls.hard.size();
    plan.excluded.insert(cls.hard.begin(),
                         cls.hard.begin() + static_cast<std::ptrdiff_t>(n_excluded));

    for (PatchId id : cls.easy) {
        plan.entries.push_back(id);
        plan.counts[id] = 1;
    }
    for (std::size_t i = n_excluded; i < cls.hard.size(); ++i) {
        const PatchId id = cls.hard[i];
        plan.counts[id] = oversample_factor;
        for (int r = 0; r < oversample_factor; ++r) plan.entries.push_back(id);
    }
    rng.shuffle(plan.entries);
    return plan;
}

EpochPlan uniform_plan(std::vector<PatchId> ids, Rng& rng) {
    EpochPlan plan;
    for (PatchId id : ids) plan.counts[id] = 1;
    if (plan.counts.size() != ids.size())
        throw ParameterError("duplicate patch ids in uniform plan");
    plan.entries = std::move(ids);
    rng.shuffle(plan.entries);
    return plan;
}

void save_checkpoint(const LossRegistry& reg, double threshold,
                     const std::filesystem::path& path) {
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [id, loss] : reg.entries()) entries[std::to_string(id)] = loss;
    nlohmann::json doc;
    doc["epoch_tag"] = reg.epoch_tag();
    doc["entries"] = std::move(entries);
    doc["threshold"] = threshold;
    write_text_atomic(path, doc.dump() + "\n");
}

RegistryCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
        RegistryCheckpoint cp;
        cp.registry.set_epoch_tag(doc.at("epoch_tag").get<std::int64_t>());
        for (const auto& [key, value] : doc.at("entries").items())
            cp.registry.record_loss(std::stoll(key), value.get<double>());
        cp.threshold = doc.at("threshold").get<double>();
        return cp;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("bad registry checkpoint: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw CorruptFileError("bad patch id in registry checkpoint");
    }
}

} // namespace fpvolseg
