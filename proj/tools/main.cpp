#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cropscan/augment.hpp"
#include "cropscan/dataset.hpp"
#include "cropscan/hyperspectral.hpp"
#include "cropscan/image_io.hpp"
#include "cropscan/metrics.hpp"
#include "cropscan/network.hpp"
#include "cropscan/rng.hpp"
#include "cropscan/survey.hpp"
#include "cropscan/trainer.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace cropscan;
using cli::RunConfig;

namespace {

// independent seed streams per pipeline stage
std::uint64_t stage_seed(const RunConfig& config, std::string_view stage) {
    return mix_seed(config.seed, hash_text(stage));
}

int run_fixture(const RunConfig& config) {
    cli::persist_run_config(config);

    Corpus corpus =
        generate_fixture(config.fixture.per_class, stage_seed(config, "fixture"));
    save_corpus(corpus, config.fixture_dir());
    std::printf("fixture: %zu images (%zu per class) -> %s\n",
                corpus.manifest.size(), config.fixture.per_class,
                config.fixture_dir().c_str());

    // demo field mosaic with known tile labels, for the survey subcommand
    const std::size_t grid = config.fixture.mosaic_grid;
    const std::size_t tiles = grid * grid;
    Corpus extra = generate_fixture((tiles + kClassCount - 1) / kClassCount,
                                    stage_seed(config, "mosaic"));
    Rng shuffle_rng(stage_seed(config, "mosaic-order"));
    std::vector<std::size_t> order(extra.images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);

    std::vector<Tensor> tile_images;
    nlohmann::json labels = nlohmann::json::array();
    for (std::size_t t = 0; t < tiles; ++t) {
        tile_images.push_back(extra.images[order[t]]);
        labels.push_back(
            static_cast<int>(extra.manifest.records[order[t]].label));
    }
    const Tensor mosaic = compose_mosaic(tile_images, grid);
    write_ppm(mosaic, config.fixture_dir() / "mosaic.ppm");
    std::ofstream labels_out(config.fixture_dir() / "mosaic_labels.json");
    labels_out << nlohmann::json{{"grid", grid}, {"labels", labels}}.dump(2)
               << "\n";

    // the same scene as a hyperspectral cube, for the .cscube survey path
    std::vector<double> bands;
    for (int i = 0; i < 10; ++i) bands.push_back(450.0 + 50.0 * i);
    save_cube(synthesize_cube(mosaic, bands, stage_seed(config, "cube")),
              config.fixture_dir() / "mosaic.cscube");

    std::printf("fixture: %zux%zu demo mosaic -> %s (+ .cscube)\n", grid, grid,
                (config.fixture_dir() / "mosaic.ppm").c_str());
    return 0;
}

fs::path input_manifest_for_augment(const RunConfig& config) {
    if (!config.dataset.manifest.empty()) return config.dataset.manifest;
    if (!config.dataset.root.empty()) {
        // ingest the external tree first, persist it next to the outputs
        const IngestReport report = ingest(config.dataset.root);
        for (const auto& err : report.file_errors)
            std::fprintf(stderr, "ingest: skipped %s\n", err.c_str());
        std::printf("ingest: %zu images decoded, %zu skipped\n",
                    report.corpus.manifest.size(), report.file_errors.size());
        Corpus corpus = report.corpus;
        save_corpus(corpus, config.out() / "ingested");
        return config.out() / "ingested" / "manifest.jsonl";
    }
    return config.fixture_dir() / "manifest.jsonl";
}

int run_augment(const RunConfig& config) {
    cli::persist_run_config(config);

    const Corpus input = load_corpus(input_manifest_for_augment(config));
    AugmentationSpec spec;
    spec.seed = stage_seed(config, "augment");
    spec.rotation_max_degrees = config.augment.rotation_max_degrees;
    spec.brightness_min = config.augment.brightness_min;
    spec.brightness_max = config.augment.brightness_max;

    Corpus augmented = augment_dataset(input, spec);
    save_corpus(augmented, config.augmented_dir());
    std::printf("augment: %zu -> %zu images -> %s\n", input.manifest.size(),
                augmented.manifest.size(), config.augmented_dir().c_str());
    return 0;
}

int run_train(const RunConfig& config) {
    cli::persist_run_config(config);

    Corpus corpus = load_corpus(config.augmented_dir() / "manifest.jsonl");
    stratified_split(corpus.manifest, config.split_fractions,
                     stage_seed(config, "split"));
    save_manifest(corpus.manifest, config.split_manifest_path());

    const auto train_set = collect_split(corpus, "train");
    const auto val_set = collect_split(corpus, "val");
    std::printf("train: %zu train / %zu val samples\n", train_set.size(),
                val_set.size());

    Network network =
        build_micro_vgg(micro_vgg_config(stage_seed(config, "init")));

    Hyperparams hp;
    hp.epochs = config.training.epochs;
    hp.batch_size = config.training.batch_size;
    hp.learning_rate = config.training.learning_rate;
    hp.momentum = config.training.momentum;
    hp.clip_norm = config.training.clip_norm;
    hp.seed = stage_seed(config, "shuffle");

    const TrainResult result = train(std::move(network), train_set, val_set, hp);

    fs::create_directories(config.train_dir());
    std::ofstream log(config.train_dir() / "train_log.jsonl");
    for (const auto& r : result.records) {
        std::printf(
            "epoch %zu: train loss %.4f acc %.4f | val loss %.4f acc %.4f\n",
            r.epoch, r.train_loss, r.train_accuracy, r.val_loss,
            r.val_accuracy);
        log << nlohmann::json{{"epoch", r.epoch},
                              {"train_loss", r.train_loss},
                              {"train_accuracy", r.train_accuracy},
                              {"val_loss", r.val_loss},
                              {"val_accuracy", r.val_accuracy}}
                   .dump()
            << "\n";
    }
    result.network.save(config.train_dir() / "checkpoint.bin");
    std::printf("train: best epoch %zu -> %s\n", result.best_epoch,
                (config.train_dir() / "checkpoint.bin").c_str());
    return 0;
}

int run_eval(const RunConfig& config) {
    cli::persist_run_config(config);

    const Network network = Network::load(config.checkpoint_path());
    const Corpus corpus = load_corpus(config.split_manifest_path());
    const auto test_set = collect_split(corpus, "test");
    if (test_set.empty()) throw InputError("no test split in the manifest");

    const EvalResult eval = evaluate(network, test_set);
    ConfusionMatrix matrix;
    for (std::size_t i = 0; i < test_set.size(); ++i)
        matrix.add(test_set[i].label, to_class(eval.predictions[i]));
    const ClassificationReport rep = report(matrix);

    const std::string table = render_text(rep);
    std::fputs(table.c_str(), stdout);

    fs::create_directories(config.eval_dir());
    std::ofstream json_out(config.eval_dir() / "report.json");
    json_out << report_json(rep, matrix) << "\n";
    std::ofstream text_out(config.eval_dir() / "report.txt");
    text_out << table;
    std::printf("eval: %zu test samples, accuracy %.4f -> %s\n",
                test_set.size(), rep.accuracy,
                config.eval_dir().c_str());
    return 0;
}

int run_survey_cmd(const RunConfig& config) {
    cli::persist_run_config(config);

    const Network network = Network::load(config.checkpoint_path());

    fs::path mosaic_path = config.survey.mosaic.empty()
                               ? config.fixture_dir() / "mosaic.ppm"
                               : fs::path(config.survey.mosaic);
    Tensor mosaic_image;
    if (mosaic_path.extension() == ".cscube") {
        const DataCube cube = load_cube(mosaic_path);
        mosaic_image = project_to_rgb(
            calibrate(cube, CalibrationProfile::identity(cube.band_count())));
    } else {
        mosaic_image = read_image(mosaic_path);
    }
    const FieldMosaic mosaic = make_mosaic(std::move(mosaic_image));

    const SurveyPlan plan = plan_survey(mosaic, config.survey.stride);
    const DiseaseMap map = run_survey(mosaic, plan, network);

    fs::create_directories(config.survey_dir());
    render_map(map, config.survey_dir() / "map.ppm",
               config.survey_dir() / "report.json");

    std::printf("survey: %zux%zu tiles at stride %zu\n", map.grid_rows,
                map.grid_cols, map.stride);
    for (std::size_t k = 0; k < kClassCount; ++k)
        if (map.tile_counts[k] > 0)
            std::printf("  %-18s %3zu tiles  %5.1f%% area\n",
                        std::string(class_name(to_class(int(k)))).c_str(),
                        map.tile_counts[k], 100.0 * map.area_fractions[k]);
    std::printf("survey: healthy %.1f%% / diseased %.1f%% -> %s\n",
                100.0 * map.healthy_fraction, 100.0 * map.diseased_fraction,
                config.survey_dir().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cropscan: train and run the cucumber-disease survey pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags remain valid after the subcommand

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    app.add_option("--config", config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--out", out_override, "override the output directory");

    auto* cmd_fixture =
        app.add_subcommand("fixture", "generate the synthetic corpus and mosaic");
    std::optional<std::size_t> per_class_override;
    cmd_fixture->add_option("--per-class", per_class_override,
                            "images per class");

    auto* cmd_augment =
        app.add_subcommand("augment", "expand the corpus five-fold");

    auto* cmd_train = app.add_subcommand("train", "split, train and checkpoint");
    std::optional<std::size_t> epochs_override;
    cmd_train->add_option("--epochs", epochs_override, "training epochs");

    auto* cmd_eval =
        app.add_subcommand("eval", "evaluate the checkpoint on the test split");

    auto* cmd_survey =
        app.add_subcommand("survey", "sweep a mosaic and emit the disease map");
    std::optional<std::size_t> stride_override;
    std::optional<std::string> mosaic_override, checkpoint_override;
    cmd_survey->add_option("--stride", stride_override, "tile stride (1..50)");
    cmd_survey->add_option("--mosaic", mosaic_override,
                           "mosaic image or .cscube file");
    cmd_survey->add_option("--checkpoint", checkpoint_override,
                           "checkpoint path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    RunConfig config;
    try {
        config = cli::load_run_config(config_path);
        if (seed_override) config.seed = *seed_override;
        if (out_override) config.output_dir = *out_override;
        if (per_class_override) config.fixture.per_class = *per_class_override;
        if (epochs_override) config.training.epochs = *epochs_override;
        if (stride_override) config.survey.stride = *stride_override;
        if (mosaic_override) config.survey.mosaic = *mosaic_override;
        if (checkpoint_override) config.survey.checkpoint = *checkpoint_override;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cropscan: %s\n", e.what());
        return 2;
    }

    try {
        if (cmd_fixture->parsed()) return run_fixture(config);
        if (cmd_augment->parsed()) return run_augment(config);
        if (cmd_train->parsed()) return run_train(config);
        if (cmd_eval->parsed()) return run_eval(config);
        if (cmd_survey->parsed()) return run_survey_cmd(config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cropscan: %s\n", e.what());
        return 1;
    }
    return 0;
}
