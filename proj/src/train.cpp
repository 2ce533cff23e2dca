#include "fpvolseg/train.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fpvolseg/inference.hpp"
#include "fpvolseg/metrics.hpp"
#include "fpvolseg/patch.hpp"

namespace fpvolseg {

double lr_for_epoch(double base_lr, double val_dice_pct) {
    if (!(base_lr > 0.0)) throw ParameterError("base learning rate must be positive");
    if (!(val_dice_pct >= 0.0 && val_dice_pct <= 100.0))
        throw RangeError("validation dice must lie in [0, 100]");
    return base_lr * std::pow(0.9, val_dice_pct / 10.0);
}

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw DataError("config key '" + key + "' expects true or false, got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    std::istringstream in(value);
    T out;
    in >> out;
    if (in.fail() || !in.eof())
        throw DataError("config key '" + key + "' has a bad value '" + value + "'");
    return out;
}

} // namespace

TrainConfig parse_train_config_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto strip = [](std::string s) {
            const auto first = s.find_first_not_of(" \t\r");
            if (first == std::string::npos) return std::string();
            const auto last = s.find_last_not_of(" \t\r");
            return s.substr(first, last - first + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config line is not key=value: '" + line + "'");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));

        if (key == "model") {
            if (value != "toy-logistic")
                throw DataError("unsupported model '" + value + "'");
            cfg.model = value;
        } else if (key == "epochs") {
            cfg.epochs = parse_number<int>(value, key);
        } else if (key == "batch_size") {
            cfg.batch_size = parse_number<int>(value, key);
        } else if (key == "optimizer") {
            try {
                cfg.optimizer = optimizer_kind_from_string(value);
            } catch (const ParameterError& e) {
                throw DataError(e.what());
            }
        } else if (key == "base_lr") {
            cfg.base_lr = parse_number<double>(value, key);
        } else if (key == "momentum") {
            cfg.momentum = parse_number<double>(value, key);
        } else if (key == "weight_decay") {
            cfg.weight_decay = parse_number<double>(value, key);
        } else if (key == "w_ce") {
            cfg.loss_weights.w_ce = parse_number<double>(value, key);
        } else if (key == "w_softdice") {
            cfg.loss_weights.w_softdice = parse_number<double>(value, key);
        } else if (key == "w_tversky") {
            cfg.loss_weights.w_tversky = parse_number<double>(value, key);
        } else if (key == "tversky_alpha") {
            cfg.tversky.alpha = parse_number<double>(value, key);
        } else if (key == "tversky_beta") {
            cfg.tversky.beta = parse_number<double>(value, key);
        } else if (key == "fp_enabled") {
            cfg.fp_enabled = parse_bool(value, key);
        } else if (key == "oversample_factor") {
            cfg.oversample_factor = parse_number<int>(value, key);
        } else if (key == "exclude_frac") {
            cfg.exclude_frac = parse_number<double>(value, key);
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(value, key);
        } else if (key == "patch_size") {
            cfg.patch_size = parse_number<int>(value, key);
        } else if (key == "overlap") {
            cfg.overlap = parse_number<double>(value, key);
        } else {
            throw DataError("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

TrainConfig parse_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_train_config_text(buffer.str());
}

std::string epoch_stats_to_json_line(const EpochStats& stats) {
    nlohmann::json doc;
    doc["epoch"] = stats.epoch;
    doc["mean_train_loss"] = stats.mean_train_loss;
    doc["val_dice_pct"] = stats.val_dice_pct;
    doc["lr_used"] = stats.lr_used;
    doc["hard_count"] = stats.hard_count;
    doc["excluded_count"] = stats.excluded_count;
    return doc.dump();
}

PatchId PatchStore::add(PatchTensor input, std::vector<float> target) {
    if (static_cast<std::int64_t>(target.size()) != input.size.voxels())
        throw DimensionError("target size does not match the input patch");
    const PatchId id = static_cast<PatchId>(patches_.size());
    patches_.push_back(TrainPatch{id, std::move(input), std::move(target)});
    return id;
}

const TrainPatch& PatchStore::get(PatchId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= patches_.size())
        throw DataError("unknown patch id " + std::to_string(id));
    return patches_[static_cast<std::size_t>(id)];
}

std::vector<PatchId> PatchStore::ids() const {
    std::vector<PatchId> out(patches_.size());
    for (std::size_t i = 0; i < patches_.size(); ++i) out[i] = patches_[i].id;
    return out;
}

double train_epoch(ToyModel& model, const EpochPlan& plan, const PatchStore& store,
                   const LossWeights& weights, const TverskyParams& tversky, int batch_size,
                   OptimizerState& opt, LossRegistry& registry) {
    if (batch_size < 1) throw ParameterError("batch size must be >= 1");

    double loss_sum = 0.0;
    double batch_wct = 0.0, batch_wpet = 0.0, batch_bias = 0.0;
    int in_batch = 0;

    const auto flush = [&]() {
        if (in_batch == 0) return;
        const double inv = 1.0 / static_cast<double>(in_batch);
        const double grads[3] = {batch_wct * inv, batch_wpet * inv, batch_bias * inv};
        std::vector<double> params = model.params();
        optimizer_step(params, std::span<const double>(grads, 3), opt);
        model.set_params(params);
        batch_wct = batch_wpet = batch_bias = 0.0;
        in_batch = 0;
    };

    for (const PatchId id : plan.entries) {
        const TrainPatch& patch = store.get(id);
        const std::vector<double> probs = model.predict(patch.input);
        const LossResult loss = combined_loss(probs, patch.target, weights, tversky);
        const ToyModel::ParamGrad grad = model.backward(patch.input, probs, loss.grad);

        registry.record_loss(id, loss.value);
        loss_sum += loss.value;
        batch_wct += grad.w_ct;
        batch_wpet += grad.w_pet;
        batch_bias += grad.bias;
        if (++in_batch == batch_size) flush();
    }
    flush();

    return plan.entries.empty() ? 0.0 : loss_sum / static_cast<double>(plan.entries.size());
}

namespace {

MultiChannelVolume normalized_input(const TrainCase& c) {
    return stack_channels(normalize_zscore(c.ct), normalize_zscore(c.pet));
}

Shape3 cubic(int patch_size) {
    if (patch_size < 1) throw ParameterError("patch size must be >= 1");
    return Shape3{patch_size, patch_size, patch_size};
}

} // namespace

double validate(const ToyModel& model, const std::vector<TrainCase>& val_cases,
                int patch_size, double overlap, unsigned threads) {
    if (val_cases.empty()) throw ParameterError("validation set is empty");

    const WeightMap wmap = gaussian_weight_map(cubic(patch_size));
    double dice_sum = 0.0;
    for (const TrainCase& c : val_cases) {
        const MultiChannelVolume input = normalized_input(c);
        const Volume3D prob = sliding_window_infer(input, model.predictor(), overlap, wmap, threads);
        dice_sum += dice_coefficient(threshold_prob(prob, 0.5), c.mask);
    }
    return 100.0 * dice_sum / static_cast<double>(val_cases.size());
}

FitResult fit(const TrainConfig& config, const std::vector<TrainCase>& train_cases,
              const std::vector<TrainCase>& val_cases, unsigned threads) {
    if (config.epochs < 0) throw ParameterError("epochs must be >= 0");
    if (config.model != "toy-logistic")
        throw ParameterError("unsupported model '" + config.model + "'");
    if (train_cases.empty()) throw ParameterError("training set is empty");

    // Patches are extracted once up front; the training grid matches the
    // inference grid.
    const Shape3 patch_shape = cubic(config.patch_size);
    PatchStore store;
    for (const TrainCase& c : train_cases) {
        if (c.mask.shape() != c.ct.shape())
            throw DimensionError("mask shape differs from image shape");
        const MultiChannelVolume input = normalized_input(c);
        const PatchGrid grid = compute_grid(input.shape(), patch_shape, config.overlap);
        for (const Shape3& origin : grid.origins)
            store.add(extract_patch(input, origin, patch_shape),
                      extract_patch(c.mask, origin, patch_shape));
    }

    FitResult result;
    if (config.epochs == 0) return result;

    Rng rng(config.seed);
    OptimizerState opt = OptimizerState::make(config.optimizer, 3, config.base_lr,
                                              config.momentum, config.weight_decay);
    double prev_dice_pct = 0.0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        opt.lr = lr_for_epoch(config.base_lr, prev_dice_pct);

        EpochPlan plan;
        if (config.fp_enabled && !result.registry.empty())
            plan = build_epoch_plan(result.registry, config.oversample_factor,
                                    config.exclude_frac, rng);
        else
            plan = uniform_plan(store.ids(), rng);

        const double mean_loss =
            train_epoch(result.model, plan, store, config.loss_weights, config.tversky,
                        config.batch_size, opt, result.registry);
        result.registry.set_epoch_tag(epoch);
        result.last_threshold = plan.threshold;

        const double dice_pct =
            validate(result.model, val_cases, config.patch_size, config.overlap, threads);

        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_train_loss = mean_loss;
        stats.val_dice_pct = dice_pct;
        stats.lr_used = opt.lr;
        stats.hard_count = static_cast<std::int64_t>(plan.hard_count);
        stats.excluded_count = static_cast<std::int64_t>(plan.excluded.size());
        result.stats.push_back(stats);

        prev_dice_pct = dice_pct;
    }
    return result;
}

std::string fp_comparison_report(const TrainConfig& base,
                                 const std::vector<TrainCase>& train_cases,
                                 const std::vector<TrainCase>& val_cases,
                                 const std::vector<std::uint64_t>& seeds,
                                 double target_dice_pct, unsigned threads) {
    if (seeds.empty()) throw ParameterError("comparison needs at least one seed");

    nlohmann::json runs = nlohmann::json::array();
    for (const std::uint64_t seed : seeds) {
        for (const bool fp_enabled : {true, false}) {
            TrainConfig cfg = base;
            cfg.seed = seed;
            cfg.fp_enabled = fp_enabled;
            const FitResult r = fit(cfg, train_cases, val_cases, threads);

            int epochs_to_target = -1;
            for (const EpochStats& s : r.stats)
                if (s.val_dice_pct >= target_dice_pct) {
                    epochs_to_target = s.epoch;
                    break;
                }

            nlohmann::json run;
            run["seed"] = seed;
            run["fp_enabled"] = fp_enabled;
            run["final_val_dice_pct"] = r.stats.empty() ? 0.0 : r.stats.back().val_dice_pct;
            run["epochs_to_target"] = epochs_to_target;
            runs.push_back(std::move(run));
        }
    }

    nlohmann::json doc;
    doc["target_dice_pct"] = target_dice_pct;
    doc["epochs"] = base.epochs;
    doc["runs"] = std::move(runs);
    return doc.dump();
}

} // namespace fpvolseg
