#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cropscan/tensor.hpp"

namespace cropscan {

/// The eight cucumber classes, in canonical listing order.
enum class ClassId : int {
    Anthracnose = 0,
    BacterialWilt = 1,
    BellyRot = 2,
    DownyMildew = 3,
    PythiumFruitRot = 4,
    GummyStemBlight = 5,
    FreshLeaves = 6,
    FreshCucumber = 7,
};

inline constexpr std::size_t kClassCount = 8;

/// Display names in ClassId order.
const std::array<std::string_view, kClassCount>& class_names();

std::string_view class_name(ClassId id);

/// Case-insensitive match; spaces, hyphens and underscores are equivalent.
std::optional<ClassId> class_from_name(std::string_view name);

/// Directory-friendly name: lower case, underscores.
std::string class_dir_name(ClassId id);

/// Fresh leaves and fresh cucumber count as healthy; everything else is a
/// disease class.
bool is_healthy(ClassId id);

ClassId to_class(int value);  // validates [0,7]

/// Where a record came from: the original file, or an augmentation of one.
struct Provenance {
    std::string original_id;
    std::string transform = "original";  // original|hflip|vflip|rotate|brightness
    double rotation_deg = 0.0;
    double brightness = 1.0;
};

struct ManifestRecord {
    std::string id;
    std::string path;  // relative to the manifest file; empty until saved
    ClassId label = ClassId::Anthracnose;
    std::string split;  // train|val|test, empty before splitting
    Provenance provenance;
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;

    std::size_t size() const { return records.size(); }
    std::array<std::size_t, kClassCount> per_class_counts() const;
};

/// One decoded sample: 3x50x50, values in [0,1].
struct LabeledImage {
    std::string id;
    ClassId label = ClassId::Anthracnose;
    Tensor image;
};

/// Manifest plus decoded tensors, index-aligned.
struct Corpus {
    DatasetManifest manifest;
    std::vector<Tensor> images;
};

inline constexpr std::size_t kImageSize = 50;

struct IngestReport {
    Corpus corpus;
    std::vector<std::string> file_errors;  // per-file decode failures
};

/// Walks a class-per-directory tree, decodes PNG/PPM files, converts to
/// 3 channels in [0,1] and resizes to 50x50. Undecodable files are
/// collected in the report; an unrecognized class directory aborts.
IngestReport ingest(const std::filesystem::path& root);

/// Tags every record with train/val/test such that per-class counts follow
/// the fractions (largest-remainder rounding) and all records sharing an
/// original stay in one split.
void stratified_split(DatasetManifest& manifest,
                      const std::array<double, 3>& fractions,
                      std::uint64_t seed);

/// Synthetic eight-class corpus: per class a distinctly colored Gaussian
/// blob at a random position over a noisy background. The color carries the
/// class, so flips, small rotations and brightness changes preserve it.
Corpus generate_fixture(std::size_t per_class, std::uint64_t seed);

/// Samples of one split as trainer inputs; empty split string selects all.
std::vector<LabeledImage> collect_split(const Corpus& corpus,
                                        std::string_view split);

// --- persistence (JSON-lines manifest next to the image files) -----------

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes images as binary PPM under dir (one subdirectory per class),
/// fills in record paths, then writes dir/manifest.jsonl.
void save_corpus(Corpus& corpus, const std::filesystem::path& dir);

/// Loads a manifest and decodes every referenced image.
Corpus load_corpus(const std::filesystem::path& manifest_path);

}  // namespace cropscan
