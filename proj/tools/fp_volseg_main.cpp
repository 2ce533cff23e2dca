// fp-volseg: patch-based volumetric segmentation pipeline over FPVOL files.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3
// numeric/contract error. Diagnostics go to stderr; machine-readable output
// goes to stdout or the requested files.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpvolseg/focused_practice.hpp"
#include "fpvolseg/inference.hpp"
#include "fpvolseg/manifest.hpp"
#include "fpvolseg/metrics.hpp"
#include "fpvolseg/morphology.hpp"
#include "fpvolseg/patch.hpp"
#include "fpvolseg/phantom.hpp"
#include "fpvolseg/text_io.hpp"
#include "fpvolseg/toy_model.hpp"
#include "fpvolseg/train.hpp"
#include "fpvolseg/volume.hpp"

namespace fs = std::filesystem;
using namespace fpvolseg;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kFormatVersion = "FPVOL001";

struct SynthOptions {
    std::string out_dir;
    int lesion_cases = 4;
    int normal_cases = 4;
    std::vector<std::int64_t> shape{64, 64, 64};
    int lesions = 2;
    int radius_min = 4;
    int radius_max = 8;
    double pet_intensity = 10.0;
    double pet_background = 1.0;
    double ct_contrast = 2.0;
    double noise_sigma = 1.0;
    double spacing = 1.5;
    std::uint64_t seed = 42;
};

void run_synth(const SynthOptions& opt) {
    if (opt.shape.size() != 3)
        throw ParameterError("--shape expects three values: z y x");
    fs::create_directories(opt.out_dir);

    std::vector<CaseRecord> records;
    const int total = opt.lesion_cases + opt.normal_cases;
    for (int i = 0; i < total; ++i) {
        const bool has_lesion = i < opt.lesion_cases;
        PhantomSpec spec;
        spec.shape = {opt.shape[0], opt.shape[1], opt.shape[2]};
        spec.n_lesions = has_lesion ? opt.lesions : 0;
        spec.radius_min = opt.radius_min;
        spec.radius_max = opt.radius_max;
        spec.pet_lesion_intensity = opt.pet_intensity;
        spec.pet_background = opt.pet_background;
        spec.ct_contrast = opt.ct_contrast;
        spec.noise_sigma = opt.noise_sigma;
        spec.spacing = {opt.spacing, opt.spacing, opt.spacing};
        spec.seed = splitmix64(opt.seed ^ (0x1000ULL + static_cast<std::uint64_t>(i)));

        char name[32];
        std::snprintf(name, sizeof(name), "case_%04d", i);
        const std::string case_id = name;
        const PhantomCase c = generate_phantom(spec);
        save_volume(c.ct, fs::path(opt.out_dir) / (case_id + "_ct.fpvol"));
        save_volume(c.pet, fs::path(opt.out_dir) / (case_id + "_pet.fpvol"));
        save_volume(c.mask, fs::path(opt.out_dir) / (case_id + "_mask.fpvol"));
        records.push_back({case_id, has_lesion, case_id + "_ct.fpvol",
                           case_id + "_pet.fpvol", case_id + "_mask.fpvol"});
        std::cerr << "synth: wrote " << case_id << (has_lesion ? " (lesion)" : " (normal)")
                  << "\n";
    }
    save_manifest(records, fs::path(opt.out_dir) / "manifest.jsonl");
    std::cerr << "synth: manifest with " << records.size() << " cases\n";
}

struct SplitOptions {
    std::string manifest;
    int k = 3;
    int lesion = 30;
    int normal = 20;
    std::uint64_t seed = 42;
    std::string out;
};

void run_split(const SplitOptions& opt) {
    const auto records = load_manifest(opt.manifest);
    const SplitResult split =
        split_model_wise(records, opt.k, opt.lesion, opt.normal, opt.seed);
    const std::string text = split_to_json(split);
    if (opt.out.empty())
        std::cout << text << "\n";
    else
        write_text_atomic(opt.out, text + "\n");
}

struct ExtractOptions {
    std::string ct, pet, mask;
    int patch = 64;
    double overlap = 0.5;
    std::string out_dir;
    bool no_normalize = false;
};

void run_extract(const ExtractOptions& opt) {
    Volume3D ct = load_volume(opt.ct);
    Volume3D pet = load_volume(opt.pet);
    if (!opt.no_normalize) {
        ct = normalize_zscore(ct);
        pet = normalize_zscore(pet);
    }
    const MultiChannelVolume input = stack_channels(ct, pet);
    std::optional<Volume3D> mask;
    if (!opt.mask.empty()) mask = load_volume(opt.mask);

    const Shape3 patch_shape{opt.patch, opt.patch, opt.patch};
    const PatchGrid grid = compute_grid(input.shape(), patch_shape, opt.overlap);
    fs::create_directories(opt.out_dir);

    std::string index;
    for (std::size_t i = 0; i < grid.origins.size(); ++i) {
        const Shape3 origin = grid.origins[i];
        const PatchTensor patch = extract_patch(input, origin, patch_shape);
        char name[32];
        std::snprintf(name, sizeof(name), "p%04zu", i);

        const auto channel_volume = [&](std::int64_t c) {
            const auto view = patch.channel_view(c);
            return Volume3D(patch_shape, input.spacing(), VolumeKind::Image,
                            std::vector<float>(view.begin(), view.end()));
        };
        save_volume(channel_volume(0), fs::path(opt.out_dir) / (std::string(name) + "_ct.fpvol"));
        save_volume(channel_volume(1), fs::path(opt.out_dir) / (std::string(name) + "_pet.fpvol"));
        if (mask) {
            const std::vector<float> target = extract_patch(*mask, origin, patch_shape);
            save_volume(Volume3D(patch_shape, mask->spacing(), VolumeKind::Mask, target),
                        fs::path(opt.out_dir) / (std::string(name) + "_mask.fpvol"));
        }

        nlohmann::json line;
        line["patch_id"] = i;
        line["origin"] = {origin.z, origin.y, origin.x};
        index += line.dump() + "\n";
    }
    write_text_atomic(fs::path(opt.out_dir) / "index.jsonl", index);
    std::cerr << "extract-patches: wrote " << grid.origins.size() << " patches\n";
}

struct TrainOptions {
    std::string config;
    std::string train_manifest;
    std::string val_manifest;
    std::string model_out;
    std::string stats_out;
    std::string registry_out;
    unsigned threads = 0;
};

std::vector<TrainCase> load_cases(const std::string& manifest_path) {
    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<TrainCase> cases;
    for (const CaseRecord& r : load_manifest(manifest_path))
        cases.push_back(TrainCase{load_volume(base / r.ct_path), load_volume(base / r.pet_path),
                                  load_volume(base / r.mask_path)});
    return cases;
}

void run_train(const TrainOptions& opt) {
    const TrainConfig cfg = parse_train_config(opt.config);
    const std::vector<TrainCase> train_cases = load_cases(opt.train_manifest);
    const std::vector<TrainCase> val_cases = load_cases(opt.val_manifest);
    std::cerr << "train: " << train_cases.size() << " train / " << val_cases.size()
              << " val cases, " << cfg.epochs << " epochs\n";

    const FitResult result = fit(cfg, train_cases, val_cases, opt.threads);

    std::string stats;
    for (const EpochStats& s : result.stats) {
        stats += epoch_stats_to_json_line(s) + "\n";
        std::cerr << "train: epoch " << s.epoch << " loss " << s.mean_train_loss
                  << " val dice " << s.val_dice_pct << "% lr " << s.lr_used << "\n";
    }
    write_text_atomic(opt.stats_out, stats);
    save_model(result.model, opt.model_out);
    if (!opt.registry_out.empty())
        save_checkpoint(result.registry, result.last_threshold, opt.registry_out);
}

struct InferOptions {
    std::string input;
    std::string input_pet;
    std::string model;
    int patch = 64;
    double overlap = 0.5;
    std::string out;
    unsigned threads = 0;
};

void run_infer(const InferOptions& opt) {
    const ToyModel model = load_model(opt.model);
    const Volume3D ct = normalize_zscore(load_volume(opt.input));
    const Volume3D pet = normalize_zscore(load_volume(opt.input_pet));
    const MultiChannelVolume input = stack_channels(ct, pet);
    const WeightMap wmap = gaussian_weight_map({opt.patch, opt.patch, opt.patch});
    const Volume3D prob =
        sliding_window_infer(input, model.predictor(), opt.overlap, wmap, opt.threads);
    save_volume(prob, opt.out);
    std::cerr << "infer: wrote " << opt.out << "\n";
}

struct EnsembleOptions {
    std::vector<std::string> members;
    std::string out;
};

void run_ensemble(const EnsembleOptions& opt) {
    std::vector<std::pair<std::string, double>> members;
    std::vector<Volume3D> probs;
    for (const std::string& spec : opt.members) {
        const auto colon = spec.rfind(':');
        if (colon == std::string::npos || colon + 1 == spec.size())
            throw CLI::ValidationError("ensemble", "--member expects path:weight");
        const std::string path = spec.substr(0, colon);
        double weight = 0.0;
        try {
            weight = std::stod(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("ensemble", "bad weight in '" + spec + "'");
        }
        members.emplace_back(path, weight);
        probs.push_back(load_volume(path));
    }
    const EnsembleSpec spec(members);
    save_volume(ensemble_average(probs, spec), opt.out);
    std::cerr << "ensemble: blended " << probs.size() << " members\n";
}

struct PostprocessOptions {
    std::string input;
    std::string output;
    double threshold = 0.5;
    int open_radius = 0;
};

void run_postprocess(const PostprocessOptions& opt) {
    const Volume3D input = load_volume(opt.input);
    Volume3D mask = input.kind() == VolumeKind::Mask ? input
                                                     : threshold_prob(input, opt.threshold);
    if (opt.open_radius > 0) mask = postprocess_open(mask, opt.open_radius);
    save_volume(mask, opt.output);
    std::cerr << "postprocess: wrote " << opt.output << "\n";
}

struct EvalOptions {
    std::vector<std::string> pred;
    std::vector<std::string> gt;
    int connectivity = 18;
    std::string out;
};

void run_eval(const EvalOptions& opt) {
    if (opt.pred.size() != opt.gt.size() || opt.pred.empty())
        throw CLI::ValidationError("eval",
                                   "--pred and --gt must appear the same number of times");
    const Connectivity conn = connectivity_from_int(opt.connectivity);

    std::string report;
    double sum_dice = 0.0, sum_fpv = 0.0, sum_fnv = 0.0, sum_score = 0.0;
    for (std::size_t i = 0; i < opt.pred.size(); ++i) {
        const Volume3D pred = load_volume(opt.pred[i]);
        const Volume3D gt = load_volume(opt.gt[i]);
        const MetricsReport r = evaluate_case(pred, gt, conn);

        nlohmann::json line;
        line["case_id"] = fs::path(opt.pred[i]).stem().string();
        line["dice"] = r.dice;
        line["fpv_ml"] = r.fpv_ml;
        line["fnv_ml"] = r.fnv_ml;
        line["score"] = r.score;
        report += line.dump() + "\n";

        sum_dice += r.dice;
        sum_fpv += r.fpv_ml;
        sum_fnv += r.fnv_ml;
        sum_score += r.score;
    }
    const double n = static_cast<double>(opt.pred.size());
    nlohmann::json summary;
    summary["mean_dice"] = sum_dice / n;
    summary["mean_fpv_ml"] = sum_fpv / n;
    summary["mean_fnv_ml"] = sum_fnv / n;
    summary["mean_score"] = sum_score / n;
    report += summary.dump() + "\n";

    if (opt.out.empty())
        std::cout << report;
    else
        write_text_atomic(opt.out, report);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fp-volseg: patch-based 3D segmentation pipeline"};
    app.set_version_flag("--version",
                         std::string("fp-volseg ") + kVersion + " (" + kFormatVersion + ")");
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic phantom cases");
    synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--lesion-cases", synth.lesion_cases, "Number of lesion cases");
    synth_cmd->add_option("--normal-cases", synth.normal_cases, "Number of normal cases");
    synth_cmd->add_option("--shape", synth.shape, "Volume shape: z y x")->expected(3);
    synth_cmd->add_option("--lesions", synth.lesions, "Lesions per lesion case");
    synth_cmd->add_option("--radius-min", synth.radius_min, "Minimum lesion radius (voxels)");
    synth_cmd->add_option("--radius-max", synth.radius_max, "Maximum lesion radius (voxels)");
    synth_cmd->add_option("--pet-intensity", synth.pet_intensity, "PET lesion intensity");
    synth_cmd->add_option("--pet-background", synth.pet_background, "PET background level");
    synth_cmd->add_option("--ct-contrast", synth.ct_contrast, "CT lesion contrast");
    synth_cmd->add_option("--noise-sigma", synth.noise_sigma, "Gaussian noise sigma");
    synth_cmd->add_option("--spacing", synth.spacing, "Isotropic voxel spacing (mm)");
    synth_cmd->add_option("--seed", synth.seed, "Random seed");

    SplitOptions split;
    auto* split_cmd = app.add_subcommand("split", "Model-wise validation split");
    split_cmd->add_option("--manifest", split.manifest, "Case manifest (JSON lines)")->required();
    split_cmd->add_option("--k", split.k, "Number of validation sets");
    split_cmd->add_option("--lesion", split.lesion, "Lesion cases per set");
    split_cmd->add_option("--normal", split.normal, "Normal cases per set");
    split_cmd->add_option("--seed", split.seed, "Random seed");
    split_cmd->add_option("--out", split.out, "Output JSON path (default stdout)");

    ExtractOptions extract;
    auto* extract_cmd = app.add_subcommand("extract-patches", "Write the patch grid to disk");
    extract_cmd->add_option("--ct", extract.ct, "CT volume")->required();
    extract_cmd->add_option("--pet", extract.pet, "PET volume")->required();
    extract_cmd->add_option("--mask", extract.mask, "Optional mask volume");
    extract_cmd->add_option("--patch", extract.patch, "Cubic patch size");
    extract_cmd->add_option("--overlap", extract.overlap, "Overlap fraction");
    extract_cmd->add_option("--out-dir", extract.out_dir, "Output directory")->required();
    extract_cmd->add_flag("--no-normalize", extract.no_normalize,
                          "Skip z-score normalization of the channels");

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train the built-in voxelwise model");
    train_cmd->add_option("--config", train.config, "key=value training config")->required();
    train_cmd->add_option("--train-manifest", train.train_manifest, "Training cases")->required();
    train_cmd->add_option("--val-manifest", train.val_manifest, "Validation cases")->required();
    train_cmd->add_option("--model-out", train.model_out, "Model checkpoint path")->required();
    train_cmd->add_option("--stats-out", train.stats_out, "Per-epoch stats (JSON lines)")
        ->required();
    train_cmd->add_option("--registry-out", train.registry_out,
                          "Optional per-patch loss registry checkpoint");
    train_cmd->add_option("--threads", train.threads, "Worker thread cap (0 = all cores)");

    InferOptions infer;
    auto* infer_cmd = app.add_subcommand("infer", "Sliding-window inference");
    infer_cmd->add_option("--input", infer.input, "CT volume")->required();
    infer_cmd->add_option("--input-pet", infer.input_pet, "PET volume")->required();
    infer_cmd->add_option("--model", infer.model, "Model checkpoint")->required();
    infer_cmd->add_option("--patch", infer.patch, "Cubic patch size");
    infer_cmd->add_option("--overlap", infer.overlap, "Overlap fraction");
    infer_cmd->add_option("--out", infer.out, "Output probability volume")->required();
    infer_cmd->add_option("--threads", infer.threads, "Worker thread cap (0 = all cores)");

    EnsembleOptions ensemble;
    auto* ensemble_cmd = app.add_subcommand("ensemble", "Blend probability volumes");
    ensemble_cmd->add_option("--member", ensemble.members, "prob.fpvol:weight (repeatable)")
        ->required();
    ensemble_cmd->add_option("--out", ensemble.out, "Output probability volume")->required();

    PostprocessOptions post;
    auto* post_cmd = app.add_subcommand("postprocess", "Threshold and optionally open a mask");
    post_cmd->add_option("--input", post.input, "Probability or mask volume")->required();
    post_cmd->add_option("--output", post.output, "Output mask volume")->required();
    post_cmd->add_option("--threshold", post.threshold, "Probability threshold");
    post_cmd->add_option("--open-radius", post.open_radius,
                         "Morphological opening radius (0 = off)");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Per-case metrics report");
    eval_cmd->add_option("--pred", eval.pred, "Predicted mask (repeatable)")->required();
    eval_cmd->add_option("--gt", eval.gt, "Ground-truth mask (repeatable)")->required();
    eval_cmd->add_option("--connectivity", eval.connectivity, "Component connectivity: 6/18/26");
    eval_cmd->add_option("--out", eval.out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(synth_cmd)) run_synth(synth);
        if (app.got_subcommand(split_cmd)) run_split(split);
        if (app.got_subcommand(extract_cmd)) run_extract(extract);
        if (app.got_subcommand(train_cmd)) run_train(train);
        if (app.got_subcommand(infer_cmd)) run_infer(infer);
        if (app.got_subcommand(ensemble_cmd)) run_ensemble(ensemble);
        if (app.got_subcommand(post_cmd)) run_postprocess(post);
        if (app.got_subcommand(eval_cmd)) run_eval(eval);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
