#include "cropscan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "cropscan/image_io.hpp"
#include "cropscan/rng.hpp"

namespace cropscan {

namespace {

std::string normalize_name(std::string_view name) {
    std::string out;
    for (const char c : name) {
        if (c == ' ' || c == '-' || c == '_') continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

const std::array<std::string_view, kClassCount>& class_names() {
    static const std::array<std::string_view, kClassCount> names = {
        "Anthracnose",      "Bacterial Wilt",   "Belly Rot",
        "Downy Mildew",     "Pythium Fruit Rot", "Gummy Stem Blight",
        "Fresh Leaves",     "Fresh Cucumber",
    };
    return names;
}

std::string_view class_name(ClassId id) {
    return class_names()[static_cast<std::size_t>(id)];
}

std::optional<ClassId> class_from_name(std::string_view name) {
    const std::string needle = normalize_name(name);
    for (std::size_t k = 0; k < kClassCount; ++k)
        if (normalize_name(class_names()[k]) == needle)
            return static_cast<ClassId>(k);
    return std::nullopt;
}

std::string class_dir_name(ClassId id) {
    std::string out;
    for (const char c : class_name(id)) {
        if (c == ' ')
            out += '_';
        else
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

bool is_healthy(ClassId id) {
    return id == ClassId::FreshLeaves || id == ClassId::FreshCucumber;
}

ClassId to_class(int value) {
    if (value < 0 || value >= static_cast<int>(kClassCount))
        throw DomainError("class id " + std::to_string(value) +
                          " outside [0,7]");
    return static_cast<ClassId>(value);
}

std::array<std::size_t, kClassCount> DatasetManifest::per_class_counts() const {
    std::array<std::size_t, kClassCount> counts{};
    for (const auto& r : records) counts[static_cast<std::size_t>(r.label)]++;
    return counts;
}

IngestReport ingest(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root))
        throw InputError("dataset root is not a directory: " + root.string());

    IngestReport report;

    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());

    for (const auto& dir : class_dirs) {
        const auto label = class_from_name(dir.filename().string());
        if (!label)
            throw LabelError("unrecognized class directory: " +
                             dir.filename().string());

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());

        for (const auto& file : files) {
            Tensor image;
            try {
                image = read_image(file);
            } catch (const std::exception& e) {
                report.file_errors.emplace_back(file.string() + ": " + e.what());
                continue;
            }
            image = quantize_8bit(
                resize_bilinear(image, kImageSize, kImageSize));

            ManifestRecord record;
            record.id = class_dir_name(*label) + "/" + file.stem().string();
            record.path = fs::relative(file, root).string();
            record.label = *label;
            record.provenance.original_id = record.id;
            report.corpus.manifest.records.push_back(std::move(record));
            report.corpus.images.push_back(std::move(image));
        }
    }
    return report;
}

void stratified_split(DatasetManifest& manifest,
                      const std::array<double, 3>& fractions,
                      std::uint64_t seed) {
    double sum = 0.0;
    for (const double f : fractions) {
        if (f < 0.0) throw InputError("split fractions must be nonnegative");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw InputError("split fractions must sum to 1");

    std::size_t positive = 0;
    for (const double f : fractions)
        if (f > 0.0) ++positive;

    static const char* kSplitNames[3] = {"train", "val", "test"};

    // groups keyed by original id, so augmented variants follow their source
    for (std::size_t k = 0; k < kClassCount; ++k) {
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < manifest.records.size(); ++i) {
            const auto& r = manifest.records[i];
            if (static_cast<std::size_t>(r.label) != k) continue;
            const std::string& key = r.provenance.original_id.empty()
                                         ? r.id
                                         : r.provenance.original_id;
            groups[key].push_back(i);
        }
        if (groups.empty()) continue;
        if (groups.size() < positive)
            throw InputError("class " + std::string(class_name(to_class(int(k)))) +
                             " has too few samples to split");

        std::vector<std::string> keys;
        keys.reserve(groups.size());
        for (const auto& [key, _] : groups) keys.push_back(key);
        Rng rng(mix_seed(seed, k));
        rng.shuffle(keys);

        // largest-remainder apportionment over the group count
        const std::size_t n = keys.size();
        std::array<std::size_t, 3> take{};
        std::array<double, 3> remainder{};
        std::size_t assigned = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            const double exact = fractions[s] * static_cast<double>(n);
            take[s] = static_cast<std::size_t>(exact);
            remainder[s] = exact - static_cast<double>(take[s]);
            assigned += take[s];
        }
        while (assigned < n) {
            std::size_t best = 0;
            for (std::size_t s = 1; s < 3; ++s)
                if (remainder[s] > remainder[best]) best = s;
            take[best]++;
            remainder[best] = -1.0;
            ++assigned;
        }

        std::size_t cursor = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t j = 0; j < take[s]; ++j, ++cursor)
                for (const std::size_t idx : groups[keys[cursor]])
                    manifest.records[idx].split = kSplitNames[s];
        }
    }
}

namespace {

// Fixed, well-separated class colors (RGB in [0,1]); the hue is the class
// signal, so label-preserving transforms cannot alias two classes.
constexpr double kClassColors[kClassCount][3] = {
    {0.90, 0.12, 0.12},  // Anthracnose
    {0.95, 0.65, 0.10},  // Bacterial Wilt
    {0.85, 0.85, 0.15},  // Belly Rot
    {0.20, 0.80, 0.20},  // Downy Mildew
    {0.10, 0.80, 0.75},  // Pythium Fruit Rot
    {0.15, 0.35, 0.90},  // Gummy Stem Blight
    {0.60, 0.15, 0.85},  // Fresh Leaves
    {0.90, 0.15, 0.60},  // Fresh Cucumber
};

}  // namespace

Corpus generate_fixture(std::size_t per_class, std::uint64_t seed) {
    if (per_class == 0) throw InputError("per-class count must be >= 1");

    Corpus corpus;
    const std::size_t n = kImageSize;
    for (std::size_t k = 0; k < kClassCount; ++k) {
        Rng rng(mix_seed(seed, 0x464958ULL + k));  // per-class stream
        for (std::size_t i = 0; i < per_class; ++i) {
            const double cx = rng.uniform(15.0, 35.0);
            const double cy = rng.uniform(15.0, 35.0);
            const double sigma = rng.uniform(6.0, 9.0);
            const double amplitude = rng.uniform(0.75, 0.95);

            Tensor image({3, n, n});
            const std::size_t plane = n * n;
            for (std::size_t y = 0; y < n; ++y) {
                for (std::size_t x = 0; x < n; ++x) {
                    const double dx = static_cast<double>(x) - cx;
                    const double dy = static_cast<double>(y) - cy;
                    const double g = amplitude *
                        std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                    for (std::size_t c = 0; c < 3; ++c) {
                        const double noise = rng.uniform(0.0, 0.06);
                        const double v = 0.06 + noise + g * kClassColors[k][c];
                        image[c * plane + y * n + x] = std::min(v, 1.0);
                    }
                }
            }

            char idx[32];
            std::snprintf(idx, sizeof(idx), "fx%04zu", i);
            ManifestRecord record;
            record.id = class_dir_name(static_cast<ClassId>(k)) + "/" + idx;
            record.label = static_cast<ClassId>(k);
            record.provenance.original_id = record.id;
            corpus.manifest.records.push_back(std::move(record));
            corpus.images.push_back(quantize_8bit(image));
        }
    }
    return corpus;
}

std::vector<LabeledImage> collect_split(const Corpus& corpus,
                                        std::string_view split) {
    std::vector<LabeledImage> out;
    for (std::size_t i = 0; i < corpus.manifest.records.size(); ++i) {
        const auto& r = corpus.manifest.records[i];
        if (!split.empty() && r.split != split) continue;
        out.push_back({r.id, r.label, corpus.images[i]});
    }
    return out;
}

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& r : manifest.records) {
        nlohmann::json j;
        j["id"] = r.id;
        j["path"] = r.path;
        j["class"] = static_cast<int>(r.label);
        j["class_name"] = class_name(r.label);
        j["split"] = r.split;
        j["provenance"] = {{"original_id", r.provenance.original_id},
                           {"transform", r.provenance.transform},
                           {"params",
                            {{"rotation_deg", r.provenance.rotation_deg},
                             {"brightness", r.provenance.brightness}}}};
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("manifest write failed: " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    DatasetManifest manifest;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": " +
                          e.what());
        }
        ManifestRecord r;
        r.id = j.at("id").get<std::string>();
        r.path = j.value("path", std::string{});
        r.label = to_class(j.at("class").get<int>());
        r.split = j.value("split", std::string{});
        if (j.contains("provenance")) {
            const auto& p = j["provenance"];
            r.provenance.original_id = p.value("original_id", r.id);
            r.provenance.transform = p.value("transform", "original");
            if (p.contains("params")) {
                r.provenance.rotation_deg =
                    p["params"].value("rotation_deg", 0.0);
                r.provenance.brightness = p["params"].value("brightness", 1.0);
            }
        } else {
            r.provenance.original_id = r.id;
        }
        manifest.records.push_back(std::move(r));
    }
    return manifest;
}

void save_corpus(Corpus& corpus, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (corpus.manifest.records.size() != corpus.images.size())
        throw InputError("corpus manifest and images are out of step");
    fs::create_directories(dir);

    for (std::size_t i = 0; i < corpus.manifest.records.size(); ++i) {
        auto& r = corpus.manifest.records[i];
        std::string rel = r.id + ".ppm";
        std::replace(rel.begin(), rel.end(), '#', '_');
        const fs::path file = dir / rel;
        fs::create_directories(file.parent_path());
        write_ppm(corpus.images[i], file);
        r.path = rel;
    }
    save_manifest(corpus.manifest, dir / "manifest.jsonl");
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
    Corpus corpus;
    corpus.manifest = load_manifest(manifest_path);
    const auto base = manifest_path.parent_path();
    corpus.images.reserve(corpus.manifest.records.size());
    for (const auto& r : corpus.manifest.records) {
        if (r.path.empty())
            throw InputError("manifest record " + r.id + " has no file path");
        corpus.images.push_back(read_image(base / r.path));
    }
    return corpus;
}

}  // namespace cropscan
