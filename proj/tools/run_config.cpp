#include "run_config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "cropscan/errors.hpp"

namespace cropscan::cli {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!known.contains(key))
            throw ConfigError("unknown config key \"" + key + "\" in " + where);
}

}  // namespace

std::filesystem::path RunConfig::checkpoint_path() const {
    if (!survey.checkpoint.empty()) return survey.checkpoint;
    return train_dir() / "checkpoint.bin";
}

std::filesystem::path RunConfig::split_manifest_path() const {
    return augmented_dir() / "manifest.split.jsonl";
}

RunConfig load_run_config(const std::optional<std::string>& config_path) {
    RunConfig config;
    if (!config_path) {
        config.output_dir = "runs/default";
        return config;
    }

    std::ifstream in(*config_path);
    if (!in) throw ConfigError("cannot open config file: " + *config_path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + *config_path + ": " +
                          e.what());
    }

    reject_unknown_keys(j,
                        {"seed", "output_dir", "fixture", "dataset", "split",
                         "augment", "training", "survey"},
                        *config_path);

    config.seed = j.value("seed", config.seed);
    config.output_dir = j.value("output_dir", std::string{});
    if (const auto it = j.find("fixture"); it != j.end()) {
        reject_unknown_keys(*it, {"per_class", "mosaic_grid"}, "fixture");
        config.fixture.per_class =
            it->value("per_class", config.fixture.per_class);
        config.fixture.mosaic_grid =
            it->value("mosaic_grid", config.fixture.mosaic_grid);
    }
    if (const auto it = j.find("dataset"); it != j.end()) {
        reject_unknown_keys(*it, {"root", "manifest"}, "dataset");
        config.dataset.root = it->value("root", std::string{});
        config.dataset.manifest = it->value("manifest", std::string{});
    }
    if (const auto it = j.find("split"); it != j.end()) {
        reject_unknown_keys(*it, {"train", "val", "test"}, "split");
        config.split_fractions[0] = it->value("train", 0.70);
        config.split_fractions[1] = it->value("val", 0.15);
        config.split_fractions[2] = it->value("test", 0.15);
    }
    if (const auto it = j.find("augment"); it != j.end()) {
        reject_unknown_keys(
            *it, {"rotation_max_degrees", "brightness_min", "brightness_max"},
            "augment");
        config.augment.rotation_max_degrees =
            it->value("rotation_max_degrees", 15.0);
        config.augment.brightness_min = it->value("brightness_min", 0.8);
        config.augment.brightness_max = it->value("brightness_max", 1.2);
    }
    if (const auto it = j.find("training"); it != j.end()) {
        reject_unknown_keys(
            *it,
            {"epochs", "batch_size", "learning_rate", "momentum", "clip_norm"},
            "training");
        config.training.epochs = it->value("epochs", config.training.epochs);
        config.training.batch_size =
            it->value("batch_size", config.training.batch_size);
        config.training.learning_rate =
            it->value("learning_rate", config.training.learning_rate);
        config.training.momentum =
            it->value("momentum", config.training.momentum);
        config.training.clip_norm =
            it->value("clip_norm", config.training.clip_norm);
    }
    if (const auto it = j.find("survey"); it != j.end()) {
        reject_unknown_keys(*it, {"stride", "mosaic", "checkpoint"}, "survey");
        config.survey.stride = it->value("stride", config.survey.stride);
        config.survey.mosaic = it->value("mosaic", std::string{});
        config.survey.checkpoint = it->value("checkpoint", std::string{});
    }

    if (config.output_dir.empty()) {
        // timestamp-free, config-named directory keeps repeat runs comparable
        const auto stem = std::filesystem::path(*config_path).stem().string();
        config.output_dir = "runs/" + stem;
    }
    return config;
}

std::string run_config_to_json(const RunConfig& config) {
    json j;
    j["seed"] = config.seed;
    j["output_dir"] = config.output_dir;
    j["fixture"] = {{"per_class", config.fixture.per_class},
                    {"mosaic_grid", config.fixture.mosaic_grid}};
    j["dataset"] = {{"root", config.dataset.root},
                    {"manifest", config.dataset.manifest}};
    j["split"] = {{"train", config.split_fractions[0]},
                  {"val", config.split_fractions[1]},
                  {"test", config.split_fractions[2]}};
    j["augment"] = {{"rotation_max_degrees", config.augment.rotation_max_degrees},
                    {"brightness_min", config.augment.brightness_min},
                    {"brightness_max", config.augment.brightness_max}};
    j["training"] = {{"epochs", config.training.epochs},
                     {"batch_size", config.training.batch_size},
                     {"learning_rate", config.training.learning_rate},
                     {"momentum", config.training.momentum},
                     {"clip_norm", config.training.clip_norm}};
    j["survey"] = {{"stride", config.survey.stride},
                   {"mosaic", config.survey.mosaic},
                   {"checkpoint", config.survey.checkpoint}};
    return j.dump(2);
}

void persist_run_config(const RunConfig& config) {
    std::filesystem::create_directories(config.out());
    std::ofstream out(config.out() / "config.json");
    if (!out)
        throw IoError("cannot write config into " + config.out().string());
    out << run_config_to_json(config) << "\n";
}

}  // namespace cropscan::cli
