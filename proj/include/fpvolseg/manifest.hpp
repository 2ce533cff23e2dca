#ifndef FPVOLSEG_MANIFEST_HPP
#define FPVOLSEG_MANIFEST_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fpvolseg/error.hpp"

namespace fpvolseg {

// One dataset case. Volume paths are stored relative to the manifest file.
struct CaseRecord {
    std::string case_id;
    bool has_lesion = false;
    std::string ct_path;
    std::string pet_path;
    std::string mask_path;
};

// JSON-lines manifest, one case per line. Case ids must be unique.
void save_manifest(std::span<const CaseRecord> records, const std::filesystem::path& path);
std::vector<CaseRecord> load_manifest(const std::filesystem::path& path);

struct SplitResult {
    std::vector<std::vector<std::string>> val_sets; // k disjoint id lists
    std::vector<std::string> train_pool;            // everything else
};

// Draws k disjoint validation sets of exactly n_lesion lesion and n_normal
// normal cases each; the remaining cases form the shared training pool.
// Deterministic per seed.
SplitResult split_model_wise(std::span<const CaseRecord> cases, int k_sets, int n_lesion,
                             int n_normal, std::uint64_t seed);

std::string split_to_json(const SplitResult& split);
SplitResult split_from_json(const std::string& text);

} // namespace fpvolseg

#endif
