#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "sslac/config.hpp"
#include "sslac/dataset.hpp"
#include "sslac/metrics.hpp"
#include "sslac/models.hpp"
#include "sslac/network.hpp"
#include "sslac/trainer.hpp"

namespace fs = std::filesystem;
using namespace sslac;

namespace {

void require_fresh(const fs::path& path, bool force) {
    if (!force && fs::exists(path)) {
        throw std::runtime_error(path.string() +
                                 " already exists; pass --force to overwrite");
    }
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

ImageSet load_labelled_idx(const Config& config, const std::string& images_key,
                           const std::string& labels_key) {
    return load_image_set(config.get_string(images_key), config.get_string(labels_key));
}

SyntheticDomain dummy_domain_from(const Config& config, std::uint64_t seed) {
    const auto per_blob =
        static_cast<std::size_t>(config.get_int("data.samples_per_blob", 200));
    const auto probes = static_cast<std::size_t>(config.get_int("data.probe_count", 200));
    return make_dummy_domain(seed, per_blob, probes);
}

// Training inputs for one run: either the regenerated dummy domain or the
// image split, from a manifest when one is supplied.
SsLacSplit split_for_run(const Config& config, const std::string& manifest_path) {
    if (config.get_string("run.domain", "mnist") == "dummy") {
        return dummy_domain_from(config, config.get_u64("run.seed", 0)).split;
    }
    ImageSet train = load_labelled_idx(config, "data.train_images", "data.train_labels");
    ImageSet test = load_labelled_idx(config, "data.test_images", "data.test_labels");
    if (!manifest_path.empty()) {
        return split_from_manifest(train, test, read_split_manifest(manifest_path));
    }
    return build_sslac_split(train, test, split_params_from(config));
}

// Foreign (open-set) image collections named under data.foreign.* keys.
std::vector<std::pair<std::string, NdArray>> foreign_sets_from(const Config& config) {
    std::vector<std::pair<std::string, NdArray>> sets;
    for (const auto& [name, path] : config.with_prefix("data.foreign.")) {
        sets.emplace_back(name, normalize(load_image_set(path).images));
    }
    return sets;
}

Network discriminator_for(const Config& config) {
    const TrainConfig tc = train_config_from(config);
    if (tc.domain == "dummy") return build_mlp_discriminator(tc.k, tc.mlp, tc.seed);
    return build_discriminator(tc.k, tc.discriminator, tc.seed);
}

int input_width_of(const Checkpoint& ckpt) {
    for (const CheckpointRecord& r : ckpt.records) {
        if (r.shape.size() == 2 && r.name.find(".dense.W") != std::string::npos) {
            return static_cast<int>(r.shape[0]);
        }
        if (r.shape.size() == 4) return -1;  // convolutional kernel: image model
    }
    return -1;
}

int cmd_prepare(const Config& config, const std::string& out, bool force) {
    const fs::path dir = ensure_out_dir(out);
    const fs::path manifest_path = dir / "split_manifest.txt";
    require_fresh(manifest_path, force);

    SsLacSplit split;
    if (config.get_string("run.domain", "mnist") == "dummy") {
        split = dummy_domain_from(config, config.get_u64("run.seed", 0)).split;
    } else {
        ImageSet train = load_labelled_idx(config, "data.train_images", "data.train_labels");
        ImageSet test = load_labelled_idx(config, "data.test_images", "data.test_labels");
        split = build_sslac_split(train, test, split_params_from(config));
    }
    write_split_manifest(manifest_path.string(), manifest_from_split(split));

    std::cout << "known classes:";
    for (int c : split.known_classes) std::cout << " " << c;
    std::cout << "\nlabelled " << split.labelled_x.dim(0) << ", fair validation "
              << split.fair_val_x.dim(0) << ", unlabelled " << split.unlabelled_x.dim(0)
              << ", test " << split.test_count() << "\n";
    std::cout << "wrote " << manifest_path.string() << "\n";
    return 0;
}

int cmd_train(const Config& config, const std::string& out, const std::string& manifest,
              bool force) {
    const fs::path dir = ensure_out_dir(out);
    const fs::path gen_path = dir / "generator.ckpt";
    const fs::path disc_path = dir / "discriminator.ckpt";
    const fs::path log_path = dir / "train_log.txt";
    const fs::path config_path = dir / "config.txt";
    require_fresh(gen_path, force);
    require_fresh(disc_path, force);
    require_fresh(log_path, force);
    require_fresh(config_path, force);

    const TrainConfig tc = train_config_from(config);
    SsLacSplit split = split_for_run(config, manifest);

    TrainResult result;
    try {
        result = train(split, tc);
    } catch (const TrainingDivergence& e) {
        write_train_log(log_path.string(), e.partial_log());
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "partial log written to " << log_path.string() << "\n";
        return 2;
    }

    save_checkpoint(gen_path.string(), result.generator, config.to_string());
    save_checkpoint(disc_path.string(), result.discriminator, config.to_string());
    write_train_log(log_path.string(), result.log);
    config.save(config_path.string());

    std::cout << "stopped at step " << result.log.stopped_at_step << ", best step "
              << result.log.best_step << ", fair validation accuracy "
              << result.log.best_val_accuracy << "\n";
    std::cout << "wrote " << gen_path.string() << ", " << disc_path.string() << ", "
              << log_path.string() << "\n";
    return 0;
}

int cmd_evaluate(const Config& config, const std::string& out, const std::string& checkpoint,
                 const std::string& manifest, bool force) {
    const fs::path dir = ensure_out_dir(out);
    const fs::path report_path = dir / "eval_report.txt";
    require_fresh(report_path, force);

    const std::string ckpt =
        checkpoint.empty() ? (dir / "discriminator.ckpt").string() : checkpoint;
    Network disc = discriminator_for(config);
    load_checkpoint(ckpt, disc);

    const bool dummy = config.get_string("run.domain", "mnist") == "dummy";
    EvalReport report;
    if (dummy) {
        SyntheticDomain domain = dummy_domain_from(config, config.get_u64("run.seed", 0));
        report = evaluate_split(disc, domain.split);
        report.open_set.emplace_back(
            "open_probes", open_set_accuracy(disc, domain.open_probe_points, report.k));
    } else {
        SsLacSplit split = split_for_run(config, manifest);
        report = evaluate_split(disc, split);
    }
    for (const auto& [name, images] : foreign_sets_from(config)) {
        report.open_set.emplace_back(name, open_set_accuracy(disc, images, report.k));
    }
    write_eval_report(report_path.string(), report);

    std::cout << "f1_macro = " << report.f1_macro << "\n";
    for (const auto& [name, acc] : report.open_set) {
        std::cout << "open_set." << name << " = " << acc << "\n";
    }
    std::cout << "wrote " << report_path.string() << "\n";
    return 0;
}

int cmd_boundary(const Config& config, const std::string& out, const std::string& checkpoint,
                 std::size_t resolution, bool force) {
    const fs::path dir = ensure_out_dir(out);
    const fs::path text_path = dir / "boundary.txt";
    const fs::path ppm_path = dir / "boundary.ppm";
    require_fresh(text_path, force);
    require_fresh(ppm_path, force);

    const std::string ckpt =
        checkpoint.empty() ? (dir / "discriminator.ckpt").string() : checkpoint;
    if (input_width_of(read_checkpoint(ckpt)) != 2) {
        throw std::runtime_error(ckpt + ": not a 2-D-input model, cannot raster its boundary");
    }
    const TrainConfig tc = train_config_from(config);
    Network disc = build_mlp_discriminator(tc.k, tc.mlp, tc.seed);
    load_checkpoint(ckpt, disc);

    RasterBounds bounds;
    bounds.x_min = config.get_double("raster.x_min", bounds.x_min);
    bounds.x_max = config.get_double("raster.x_max", bounds.x_max);
    bounds.y_min = config.get_double("raster.y_min", bounds.y_min);
    bounds.y_max = config.get_double("raster.y_max", bounds.y_max);

    BoundaryRaster raster = boundary_raster(disc, tc.k, bounds, resolution);
    write_raster_text(text_path.string(), raster);
    write_raster_ppm(ppm_path.string(), raster);
    std::cout << "wrote " << text_path.string() << " and " << ppm_path.string() << "\n";
    return 0;
}

int cmd_experiment(const Config& config, const std::string& out, int runs, bool force) {
    const fs::path dir = ensure_out_dir(out);
    const fs::path report_path = dir / "experiment_report.txt";
    require_fresh(report_path, force);

    const TrainConfig tc = train_config_from(config);
    SplitFactory make_split;
    if (tc.domain == "dummy") {
        make_split = [&config](std::uint64_t run_seed) {
            return dummy_domain_from(config, run_seed).split;
        };
    } else {
        // Load once; every run redraws classes and samples from its seed.
        auto train_set = std::make_shared<ImageSet>(
            load_labelled_idx(config, "data.train_images", "data.train_labels"));
        auto test_set = std::make_shared<ImageSet>(
            load_labelled_idx(config, "data.test_images", "data.test_labels"));
        SplitParams params = split_params_from(config);
        make_split = [train_set, test_set, params](std::uint64_t run_seed) {
            SplitParams p = params;
            p.seed = run_seed;
            return build_sslac_split(*train_set, *test_set, p);
        };
    }

    ExperimentReport report =
        run_experiment(runs, tc, make_split, foreign_sets_from(config));
    write_experiment_report(report_path.string(), report);

    std::cout << "completed " << (report.requested_runs - report.failed_runs) << "/"
              << report.requested_runs << " runs, f1_macro " << report.f1_mean << " +- "
              << report.f1_std << "\n";
    std::cout << "wrote " << report_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open-set semi-supervised GAN classifier toolkit"};
    app.require_subcommand(1);

    std::string config_path, out = ".", manifest, checkpoint;
    std::size_t resolution = 64;
    int runs = 20;
    bool force = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file")->required();
        cmd->add_option("--out", out, "output directory");
        cmd->add_flag("--force", force, "overwrite existing outputs");
    };

    CLI::App* prepare = app.add_subcommand("prepare", "draw the data split and write its manifest");
    add_common(prepare);

    CLI::App* train = app.add_subcommand("train", "train one model and save checkpoints");
    add_common(train);
    train->add_option("--manifest", manifest, "split manifest from prepare");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the test split");
    add_common(evaluate);
    evaluate->add_option("--manifest", manifest, "split manifest from prepare");
    evaluate->add_option("--checkpoint", checkpoint, "discriminator checkpoint");

    CLI::App* boundary =
        app.add_subcommand("boundary", "raster the decision regions of a 2-D model");
    add_common(boundary);
    boundary->add_option("--checkpoint", checkpoint, "discriminator checkpoint");
    boundary->add_option("--resolution", resolution, "grid cells per side");

    CLI::App* experiment = app.add_subcommand("experiment", "repeat the protocol over many runs");
    add_common(experiment);
    experiment->add_option("--runs", runs, "number of independent runs");

    CLI11_PARSE(app, argc, argv);

    try {
        const Config config = Config::load(config_path);
        if (prepare->parsed()) return cmd_prepare(config, out, force);
        if (train->parsed()) return cmd_train(config, out, manifest, force);
        if (evaluate->parsed()) return cmd_evaluate(config, out, checkpoint, manifest, force);
        if (boundary->parsed()) return cmd_boundary(config, out, checkpoint, resolution, force);
        if (experiment->parsed()) return cmd_experiment(config, out, runs, force);
    } catch (const TrainingDivergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
