#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "cropscan/dataset.hpp"
#include "cropscan/image_io.hpp"
#include "cropscan/rng.hpp"
#include "test_support.hpp"

using namespace cropscan;
using testutil::random_tensor;

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("class taxonomy is a bijection over the eight names") {
    std::set<std::string> seen;
    for (int k = 0; k < 8; ++k) {
        const auto name = class_name(to_class(k));
        seen.insert(std::string(name));
        const auto round = class_from_name(name);
        REQUIRE(round.has_value());
        CHECK(*round == to_class(k));
    }
    CHECK(seen.size() == 8);
    CHECK(class_from_name("FRESH_LEAVES") == ClassId::FreshLeaves);
    CHECK(class_from_name("bacterial-wilt") == ClassId::BacterialWilt);
    CHECK(!class_from_name("powdery mildew").has_value());
}

TEST_CASE("healthy classes are exactly fresh leaves and fresh cucumber") {
    int healthy = 0;
    for (int k = 0; k < 8; ++k)
        if (is_healthy(to_class(k))) ++healthy;
    CHECK(healthy == 2);
    CHECK(is_healthy(ClassId::FreshLeaves));
    CHECK(is_healthy(ClassId::FreshCucumber));
    CHECK(!is_healthy(ClassId::Anthracnose));
}

TEST_CASE("fixture generation is deterministic and balanced") {
    const Corpus a = generate_fixture(20, 31);
    const Corpus b = generate_fixture(20, 31);
    CHECK(a.manifest.size() == 160);
    for (const std::size_t count : a.manifest.per_class_counts())
        CHECK(count == 20);
    for (std::size_t i = 0; i < a.images.size(); ++i)
        CHECK(Tensor::max_abs_diff(a.images[i], b.images[i]) == 0.0);
}

TEST_CASE("fixture classes have distinct mean images") {
    const Corpus corpus = generate_fixture(6, 2);
    std::array<Tensor, 2> means = {Tensor({3, 50, 50}), Tensor({3, 50, 50})};
    std::array<std::size_t, 2> counts{};
    for (std::size_t i = 0; i < corpus.images.size(); ++i) {
        const int label = static_cast<int>(corpus.manifest.records[i].label);
        if (label > 1) continue;
        for (std::size_t p = 0; p < corpus.images[i].size(); ++p)
            means[label][p] += corpus.images[i][p];
        counts[label]++;
    }
    double l2 = 0.0;
    for (std::size_t p = 0; p < means[0].size(); ++p) {
        const double d = means[0][p] / counts[0] - means[1][p] / counts[1];
        l2 += d * d;
    }
    CHECK(std::sqrt(l2) > 0.0);
}

TEST_CASE("fixture pixel values live on the 8-bit grid in [0,1]") {
    const Corpus corpus = generate_fixture(2, 77);
    for (const Tensor& image : corpus.images)
        for (std::size_t i = 0; i < image.size(); ++i) {
            CHECK(image[i] >= 0.0);
            CHECK(image[i] <= 1.0);
            const double scaled = image[i] * 255.0;
            CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
        }
}

TEST_CASE("ingest decodes a class-per-directory tree") {
    TempDir tmp("cropscan_ingest");
    Rng rng(3);
    const char* dirs[] = {"anthracnose", "Fresh Leaves"};
    for (const char* d : dirs) {
        fs::create_directories(tmp.path / d);
        for (int i = 0; i < 3; ++i) {
            const Tensor image =
                quantize_8bit(random_tensor({3, 50, 50}, rng, 0.0, 1.0));
            write_ppm(image, tmp.path / d / ("img" + std::to_string(i) + ".ppm"));
        }
    }

    const IngestReport report = ingest(tmp.path);
    CHECK(report.file_errors.empty());
    CHECK(report.corpus.manifest.size() == 6);
    const auto counts = report.corpus.manifest.per_class_counts();
    CHECK(counts[static_cast<int>(ClassId::Anthracnose)] == 3);
    CHECK(counts[static_cast<int>(ClassId::FreshLeaves)] == 3);
    for (const Tensor& image : report.corpus.images) {
        CHECK(image.extent(1) == 50);
        CHECK(image.extent(2) == 50);
    }
}

TEST_CASE("ingest rejects unknown class directories") {
    TempDir tmp("cropscan_ingest_bad");
    fs::create_directories(tmp.path / "powdery_mildew");
    CHECK_THROWS_AS(ingest(tmp.path), LabelError);
}

TEST_CASE("ingest collects per-file decode errors and continues") {
    TempDir tmp("cropscan_ingest_err");
    fs::create_directories(tmp.path / "belly_rot");
    {
        std::ofstream bad(tmp.path / "belly_rot" / "broken.ppm");
        bad << "not an image";
    }
    Rng rng(4);
    write_ppm(quantize_8bit(random_tensor({3, 20, 30}, rng, 0.0, 1.0)),
              tmp.path / "belly_rot" / "ok.ppm");

    const IngestReport report = ingest(tmp.path);
    CHECK(report.file_errors.size() == 1);
    CHECK(report.corpus.manifest.size() == 1);
    CHECK(report.corpus.images[0].extent(1) == 50);
}

TEST_CASE("a 50x50 image resizes to itself exactly") {
    Rng rng(5);
    const Tensor image = random_tensor({3, 50, 50}, rng, 0.0, 1.0);
    CHECK(Tensor::max_abs_diff(resize_bilinear(image, 50, 50), image) == 0.0);
}

TEST_CASE("a constant image resizes to the same constant") {
    const Tensor image = Tensor::full({3, 2, 2}, 0.375);
    const Tensor out = resize_bilinear(image, 1, 1);
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.at(c, 0, 0) == 0.375);
}

TEST_CASE("png and ppm round-trip through the 8-bit grid") {
    TempDir tmp("cropscan_imgio");
    Rng rng(6);
    const Tensor image = quantize_8bit(random_tensor({3, 13, 9}, rng, 0.0, 1.0));
    write_ppm(image, tmp.path / "a.ppm");
    write_png(image, tmp.path / "a.png");
    CHECK(Tensor::max_abs_diff(read_image(tmp.path / "a.ppm"), image) == 0.0);
    CHECK(Tensor::max_abs_diff(read_image(tmp.path / "a.png"), image) == 0.0);
}

namespace {

/// Manifest shaped like an augmented corpus: per class, `originals` groups
/// of five records sharing one original id.
DatasetManifest synthetic_augmented_manifest(std::size_t originals) {
    DatasetManifest manifest;
    static const char* kTransforms[] = {"original", "hflip", "vflip", "rotate",
                                        "brightness"};
    for (int k = 0; k < 8; ++k)
        for (std::size_t i = 0; i < originals; ++i) {
            const std::string base =
                class_dir_name(to_class(k)) + "/fx" + std::to_string(i);
            for (int t = 0; t < 5; ++t) {
                ManifestRecord r;
                r.id = t == 0 ? base : base + "#" + kTransforms[t];
                r.label = to_class(k);
                r.provenance.original_id = base;
                r.provenance.transform = kTransforms[t];
                manifest.records.push_back(std::move(r));
            }
        }
    return manifest;
}

}  // namespace

TEST_CASE("stratified split hits the per-class targets exactly") {
    DatasetManifest manifest = synthetic_augmented_manifest(160);  // 800/class
    stratified_split(manifest, {0.70, 0.15, 0.15}, 99);

    std::map<std::string, std::array<std::size_t, 8>> counts;
    for (const auto& r : manifest.records)
        counts[r.split][static_cast<int>(r.label)]++;
    for (int k = 0; k < 8; ++k) {
        CHECK(counts["train"][k] == 560);
        CHECK(counts["val"][k] == 120);
        CHECK(counts["test"][k] == 120);
    }
}

TEST_CASE("split keeps augmented variants with their originals") {
    DatasetManifest manifest = synthetic_augmented_manifest(10);
    stratified_split(manifest, {0.70, 0.15, 0.15}, 5);
    std::map<std::string, std::set<std::string>> split_of_group;
    for (const auto& r : manifest.records)
        split_of_group[r.provenance.original_id].insert(r.split);
    for (const auto& [group, splits] : split_of_group)
        CHECK(splits.size() == 1);
}

TEST_CASE("split is a partition and deterministic in the seed") {
    DatasetManifest a = synthetic_augmented_manifest(12);
    DatasetManifest b = synthetic_augmented_manifest(12);
    stratified_split(a, {0.70, 0.15, 0.15}, 7);
    stratified_split(b, {0.70, 0.15, 0.15}, 7);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(!a.records[i].split.empty());
        CHECK(a.records[i].split == b.records[i].split);
    }
}

TEST_CASE("degenerate fractions route everything to train") {
    DatasetManifest manifest = synthetic_augmented_manifest(2);
    stratified_split(manifest, {1.0, 0.0, 0.0}, 1);
    for (const auto& r : manifest.records) CHECK(r.split == "train");
}

TEST_CASE("split validates fractions and class sizes") {
    DatasetManifest manifest = synthetic_augmented_manifest(4);
    CHECK_THROWS_AS(stratified_split(manifest, {0.5, 0.4, 0.2}, 1), InputError);
    CHECK_THROWS_AS(stratified_split(manifest, {-0.1, 0.6, 0.5}, 1), InputError);

    DatasetManifest tiny = synthetic_augmented_manifest(2);  // 2 groups/class
    CHECK_THROWS_AS(stratified_split(tiny, {0.70, 0.15, 0.15}, 1), InputError);
}

TEST_CASE("manifests survive a save/load round trip") {
    TempDir tmp("cropscan_manifest");
    DatasetManifest manifest = synthetic_augmented_manifest(3);
    stratified_split(manifest, {0.70, 0.15, 0.15}, 2);
    manifest.records[0].provenance.rotation_deg = -4.25;
    manifest.records[0].provenance.brightness = 1.125;
    for (auto& r : manifest.records) r.path = r.id + ".ppm";

    save_manifest(manifest, tmp.path / "m.jsonl");
    const DatasetManifest loaded = load_manifest(tmp.path / "m.jsonl");
    REQUIRE(loaded.size() == manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        CHECK(loaded.records[i].id == manifest.records[i].id);
        CHECK(loaded.records[i].path == manifest.records[i].path);
        CHECK(loaded.records[i].label == manifest.records[i].label);
        CHECK(loaded.records[i].split == manifest.records[i].split);
        CHECK(loaded.records[i].provenance.original_id ==
              manifest.records[i].provenance.original_id);
        CHECK(loaded.records[i].provenance.transform ==
              manifest.records[i].provenance.transform);
        CHECK(loaded.records[i].provenance.rotation_deg ==
              manifest.records[i].provenance.rotation_deg);
        CHECK(loaded.records[i].provenance.brightness ==
              manifest.records[i].provenance.brightness);
    }
}

TEST_CASE("a corpus reloads with identical tensors") {
    TempDir tmp("cropscan_corpus");
    Corpus corpus = generate_fixture(2, 8);
    save_corpus(corpus, tmp.path);
    const Corpus loaded = load_corpus(tmp.path / "manifest.jsonl");
    REQUIRE(loaded.images.size() == corpus.images.size());
    for (std::size_t i = 0; i < corpus.images.size(); ++i)
        CHECK(Tensor::max_abs_diff(loaded.images[i], corpus.images[i]) == 0.0);
    for (std::size_t i = 0; i < corpus.manifest.size(); ++i)
        CHECK(loaded.manifest.records[i].id == corpus.manifest.records[i].id);
}

TEST_CASE("collect_split filters by tag") {
    Corpus corpus = generate_fixture(4, 9);
    stratified_split(corpus.manifest, {0.5, 0.25, 0.25}, 3);
    const auto train = collect_split(corpus, "train");
    const auto val = collect_split(corpus, "val");
    const auto test = collect_split(corpus, "test");
    CHECK(train.size() + val.size() + test.size() == corpus.images.size());
    const auto all = collect_split(corpus, "");
    CHECK(all.size() == corpus.images.size());
}
