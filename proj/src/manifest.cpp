#include "fpvolseg/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fpvolseg/rng.hpp"
#include "fpvolseg/text_io.hpp"

namespace fpvolseg {

void save_manifest(std::span<const CaseRecord> records, const std::filesystem::path& path) {
    std::string text;
    for (const CaseRecord& r : records) {
        nlohmann::json doc;
        doc["case_id"] = r.case_id;
        doc["has_lesion"] = r.has_lesion;
        doc["ct_path"] = r.ct_path;
        doc["pet_path"] = r.pet_path;
        doc["mask_path"] = r.mask_path;
        text += doc.dump() + "\n";
    }
    write_text_atomic(path, text);
}

std::vector<CaseRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());

    std::vector<CaseRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const nlohmann::json doc = nlohmann::json::parse(line);
            CaseRecord r;
            r.case_id = doc.at("case_id").get<std::string>();
            r.has_lesion = doc.at("has_lesion").get<bool>();
            r.ct_path = doc.at("ct_path").get<std::string>();
            r.pet_path = doc.at("pet_path").get<std::string>();
            r.mask_path = doc.at("mask_path").get<std::string>();
            if (!seen.insert(r.case_id).second)
                throw CorruptFileError("duplicate case id '" + r.case_id + "' in " +
                                       path.string());
            records.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw CorruptFileError("bad manifest line " + std::to_string(line_no) + " in " +
                                   path.string() + ": " + e.what());
        }
    }
    return records;
}

SplitResult split_model_wise(std::span<const CaseRecord> cases, int k_sets, int n_lesion,
                             int n_normal, std::uint64_t seed) {
    if (k_sets < 1) throw ParameterError("k_sets must be >= 1");
    if (n_lesion < 0 || n_normal < 0)
        throw ParameterError("per-set case counts must be >= 0");

    std::vector<std::string> lesion_ids, normal_ids;
    for (const CaseRecord& c : cases)
        (c.has_lesion ? lesion_ids : normal_ids).push_back(c.case_id);

    const auto need_lesion = static_cast<std::size_t>(k_sets) * static_cast<std::size_t>(n_lesion);
    const auto need_normal = static_cast<std::size_t>(k_sets) * static_cast<std::size_t>(n_normal);
    if (lesion_ids.size() < need_lesion || normal_ids.size() < need_normal)
        throw CapacityError("not enough cases: need " + std::to_string(need_lesion) +
                            " lesion and " + std::to_string(need_normal) + " normal, have " +
                            std::to_string(lesion_ids.size()) + " and " +
                            std::to_string(normal_ids.size()));

    Rng rng(seed);
    rng.shuffle(lesion_ids);
    rng.shuffle(normal_ids);

    SplitResult result;
    result.val_sets.resize(static_cast<std::size_t>(k_sets));
    std::size_t li = 0, ni = 0;
    for (auto& set : result.val_sets) {
        for (int i = 0; i < n_lesion; ++i) set.push_back(lesion_ids[li++]);
        for (int i = 0; i < n_normal; ++i) set.push_back(normal_ids[ni++]);
        std::sort(set.begin(), set.end());
    }
    for (std::size_t i = li; i < lesion_ids.size(); ++i)
        result.train_pool.push_back(lesion_ids[i]);
    for (std::size_t i = ni; i < normal_ids.size(); ++i)
        result.train_pool.push_back(normal_ids[i]);
    std::sort(result.train_pool.begin(), result.train_pool.end());
    return result;
}

std::string split_to_json(const SplitResult& split) {
    nlohmann::json doc;
    doc["val_sets"] = split.val_sets;
    doc["train_pool"] = split.train_pool;
    return doc.dump();
}

SplitResult split_from_json(const std::string& text) {
    try {
        const nlohmann::json doc = nlohmann::json::parse(text);
        SplitResult split;
        split.val_sets = doc.at("val_sets").get<std::vector<std::vector<std::string>>>();
        split.train_pool = doc.at("train_pool").get<std::vector<std::string>>();
        return split;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("bad split JSON: ") + e.what());
    }
}

} // namespace fpvolseg
