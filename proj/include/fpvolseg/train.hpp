#ifndef FPVOLSEG_TRAIN_HPP
#define FPVOLSEG_TRAIN_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "fpvolseg/focused_practice.hpp"
#include "fpvolseg/loss.hpp"
#include "fpvolseg/optimizer.hpp"
#include "fpvolseg/toy_model.hpp"
#include "fpvolseg/volume.hpp"

namespace fpvolseg {

// lr = base * 0.9^(dice / 10), with dice the validation Dice in percent.
// Metric-driven: the schedule ignores iteration counts entirely.
double lr_for_epoch(double base_lr, double val_dice_pct);

struct TrainConfig {
    std::string model = "toy-logistic";
    int epochs = 10;
    int batch_size = 4;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double base_lr = 3e-5;
    double momentum = 0.99;
    double weight_decay = 3e-5;
    LossWeights loss_weights;
    TverskyParams tversky;
    bool fp_enabled = true;
    int oversample_factor = 2;
    double exclude_frac = 0.2;
    std::uint64_t seed = 1234;
    int patch_size = 64;
    double overlap = 0.5;
};

// Flat key=value config file; '#' starts a comment. Unknown keys are
// rejected.
TrainConfig parse_train_config_text(const std::string& text);
TrainConfig parse_train_config(const std::filesystem::path& path);

struct EpochStats {
    int epoch = 0;
    double mean_train_loss = 0.0;
    double val_dice_pct = 0.0;
    double lr_used = 0.0;
    std::int64_t hard_count = 0;
    std::int64_t excluded_count = 0;
};

std::string epoch_stats_to_json_line(const EpochStats& stats);

struct TrainPatch {
    PatchId id = 0;
    PatchTensor input;         // normalized (CT, PET) channels
    std::vector<float> target; // binary ground truth
};

class PatchStore {
public:
    PatchId add(PatchTensor input, std::vector<float> target);
    const TrainPatch& get(PatchId id) const; // DataError for unknown ids
    std::vector<PatchId> ids() const;
    std::size_t size() const { return patches_.size(); }

private:
    std::vector<TrainPatch> patches_;
};

// One raw case; channels are z-score normalized at patch-extraction and
// inference time, the mask is used as-is.
struct TrainCase {
    Volume3D ct;
    Volume3D pet;
    Volume3D mask;
};

// Visits plan entries in order, accumulating per-patch losses into the
// registry (last visit wins) and stepping the optimizer once per mini-batch
// on the batch-mean gradient. Returns the mean loss over all visits.
double train_epoch(ToyModel& model, const EpochPlan& plan, const PatchStore& store,
                   const LossWeights& weights, const TverskyParams& tversky, int batch_size,
                   OptimizerState& opt, LossRegistry& registry);

// Mean Dice (percent) of thresholded (0.5) sliding-window predictions over
// the validation cases.
double validate(const ToyModel& model, const std::vector<TrainCase>& val_cases,
                int patch_size, double overlap, unsigned threads = 0);

struct FitResult {
    ToyModel model;
    std::vector<EpochStats> stats;
    LossRegistry registry;
    double last_threshold = 0.0;
};

// Full loop: per epoch, derive the learning rate from the previous epoch's
// validation Dice (epoch 1 uses 0), build the epoch plan (uniform on epoch
// 1 or with the curriculum disabled), train, validate. Deterministic for a
// fixed config and seed.
FitResult fit(const TrainConfig& config, const std::vector<TrainCase>& train_cases,
              const std::vector<TrainCase>& val_cases, unsigned threads = 0);

// Paired fit runs with the hard-sample curriculum on and off over the given
// seeds; returns a deterministic single-line JSON report with the final
// validation Dice and the first epoch reaching target_dice_pct (-1 if never
// reached) for every run. Differences are reported, not asserted.
std::string fp_comparison_report(const TrainConfig& base,
                                 const std::vector<TrainCase>& train_cases,
                                 const std::vector<TrainCase>& val_cases,
                                 const std::vector<std::uint64_t>& seeds,
                                 double target_dice_pct, unsigned threads = 0);

} // namespace fpvolseg

#endif
