#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "cropscan/trainer.hpp"

namespace cropscan::cli {

/// One config drives every subcommand; each field has a default, flags win
/// over the file, and the resolved config is written into the output
/// directory for provenance.
struct RunConfig {
    std::uint64_t seed = 42;
    std::string output_dir;  // default derived from the config file name

    struct Fixture {
        std::size_t per_class = 160;
        std::size_t mosaic_grid = 4;  // demo mosaic is grid x grid tiles
    } fixture;

    struct Dataset {
        std::string root;      // when set, ingest this tree instead of the fixture
        std::string manifest;  // when set, augment/train read this manifest
    } dataset;

    std::array<double, 3> split_fractions{0.70, 0.15, 0.15};

    struct Augment {
        double rotation_max_degrees = 15.0;
        double brightness_min = 0.8;
        double brightness_max = 1.2;
    } augment;

    struct Training {
        std::size_t epochs = Hyperparams{}.epochs;
        std::size_t batch_size = Hyperparams{}.batch_size;
        double learning_rate = Hyperparams{}.learning_rate;
        double momentum = Hyperparams{}.momentum;
        double clip_norm = Hyperparams{}.clip_norm;
    } training;

    struct Survey {
        std::size_t stride = 50;
        std::string mosaic;      // image or .cscube; default <out>/fixture/mosaic.ppm
        std::string checkpoint;  // default <out>/train/checkpoint.bin
    } survey;

    // resolved paths inside the output directory
    std::filesystem::path out() const { return output_dir; }
    std::filesystem::path fixture_dir() const { return out() / "fixture"; }
    std::filesystem::path augmented_dir() const { return out() / "augmented"; }
    std::filesystem::path train_dir() const { return out() / "train"; }
    std::filesystem::path eval_dir() const { return out() / "eval"; }
    std::filesystem::path survey_dir() const { return out() / "survey"; }
    std::filesystem::path checkpoint_path() const;
    std::filesystem::path split_manifest_path() const;
};

/// Loads the file (when given) over the defaults; unknown keys are rejected.
RunConfig load_run_config(const std::optional<std::string>& config_path);

std::string run_config_to_json(const RunConfig& config);

/// Serializes the resolved config into <out>/config.json.
void persist_run_config(const RunConfig& config);

}  // namespace cropscan::cli
