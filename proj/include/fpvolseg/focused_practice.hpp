#ifndef FPVOLSEG_FOCUSED_PRACTICE_HPP
#define FPVOLSEG_FOCUSED_PRACTICE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "fpvolseg/error.hpp"
#include "fpvolseg/rng.hpp"

namespace fpvolseg {

using PatchId = std::int64_t;

// Latest recorded training loss per patch; the input to the hard-sample
// curriculum. Updates for distinct ids are independent, so per-worker
// buffers can be merged at batch boundaries.
class LossRegistry {
public:
    // Latest value wins. Loss must be finite and >= 0.
    void record_loss(PatchId id, double loss);

    const std::map<PatchId, double>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    std::int64_t epoch_tag() const { return epoch_tag_; }
    void set_epoch_tag(std::int64_t tag) { epoch_tag_ = tag; }

private:
    std::map<PatchId, double> entries_;
    std::int64_t epoch_tag_ = 0;
};

struct OtsuSplit {
    double threshold = 0.0;
    std::size_t split_index = 0; // size of the low class; n means "no hard class"
};

// Exact maximum between-class variance split over the sorted sample:
// sigma_b^2(k) = (k/n)((n-k)/n)(mu_low - mu_high)^2, ties broken to the
// smallest k, threshold at the midpoint of the straddling values. An
// all-equal sample yields split_index = n.
OtsuSplit otsu_threshold(std::vector<double> values);

struct Classification {
    std::vector<PatchId> easy; // id ascending
    std::vector<PatchId> hard; // loss descending, id descending on ties
    double threshold = 0.0;
};

// Splits registry entries at the Otsu threshold; values strictly above it
// are hard, boundary values are easy.
Classification classify(const LossRegistry& reg);

struct EpochPlan {
    std::vector<PatchId> entries; // shuffled visit order for the epoch
    std::map<PatchId, int> counts;
    std::set<PatchId> excluded;
    double threshold = 0.0;
    std::size_t hard_count = 0; // size of the hard class, including excluded
};

// Drops the floor(exclude_frac * |hard|) hardest patches, repeats every
// retained hard patch oversample_factor times, keeps every easy patch once,
// and shuffles the result.
EpochPlan build_epoch_plan(const LossRegistry& reg, int oversample_factor,
                           double exclude_frac, Rng& rng);

// Every id once, shuffled. Used before any losses exist and when the
// curriculum is disabled.
EpochPlan uniform_plan(std::vector<PatchId> ids, Rng& rng);

// JSON checkpoint {"epoch_tag": ..., "entries": {"<id>": loss, ...},
// "threshold": ...} for resumable training.
struct RegistryCheckpoint {
    LossRegistry registry;
    double threshold = 0.0;
};

void save_checkpoint(const LossRegistry& reg, double threshold,
                     const std::filesystem::path& path);
RegistryCheckpoint load_checkpoint(const std::filesystem::path& path);

} // namespace fpvolseg

#endif
