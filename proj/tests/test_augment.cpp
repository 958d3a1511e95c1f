#include <doctest.h>

#include <cmath>

#include "cropscan/augment.hpp"
#include "cropscan/dataset.hpp"
#include "cropscan/rng.hpp"
#include "test_support.hpp"

using namespace cropscan;
using testutil::random_tensor;

TEST_CASE("horizontal flip reverses each row") {
    Tensor image({1, 2, 2}, {1, 2, 3, 4});
    const Tensor flipped = flip_horizontal(image);
    CHECK(flipped.at(0, 0, 0) == 2.0);
    CHECK(flipped.at(0, 0, 1) == 1.0);
    CHECK(flipped.at(0, 1, 0) == 4.0);
    CHECK(flipped.at(0, 1, 1) == 3.0);
}

TEST_CASE("flips are involutions") {
    Rng rng(10);
    const Tensor image = random_tensor({3, 7, 5}, rng, 0.0, 1.0);
    CHECK(Tensor::max_abs_diff(flip_horizontal(flip_horizontal(image)), image) == 0.0);
    CHECK(Tensor::max_abs_diff(flip_vertical(flip_vertical(image)), image) == 0.0);
}

TEST_CASE("brightness factor one leaves the image unchanged") {
    Rng rng(11);
    const Tensor image = random_tensor({3, 4, 4}, rng, 0.0, 1.0);
    CHECK(Tensor::max_abs_diff(scale_brightness(image, 1.0), image) == 0.0);
}

TEST_CASE("dyadic brightness factors invert exactly when nothing clamps") {
    Rng rng(12);
    const Tensor image = random_tensor({3, 4, 4}, rng, 0.0, 0.5);
    const Tensor back = scale_brightness(scale_brightness(image, 0.5), 2.0);
    CHECK(Tensor::max_abs_diff(back, image) == 0.0);
}

TEST_CASE("generic brightness factors invert within rounding when nothing clamps") {
    Rng rng(13);
    const Tensor image = random_tensor({3, 4, 4}, rng, 0.0, 0.8);
    const Tensor back =
        scale_brightness(scale_brightness(image, 1.2), 1.0 / 1.2);
    CHECK(Tensor::max_abs_diff(back, image) <= 1e-12);
}

TEST_CASE("zero-degree rotation is the identity") {
    Rng rng(14);
    const Tensor image = random_tensor({3, 6, 6}, rng, 0.0, 1.0);
    CHECK(Tensor::max_abs_diff(rotate_bilinear(image, 0.0), image) == 0.0);
}

TEST_CASE("rotation keeps values within the input range") {
    Rng rng(15);
    const Tensor image = random_tensor({3, 50, 50}, rng, 0.0, 1.0);
    const Tensor rotated = rotate_bilinear(image, 15.0);
    for (std::size_t i = 0; i < rotated.size(); ++i) {
        CHECK(rotated[i] >= 0.0);
        CHECK(rotated[i] <= 1.0);
    }
}

TEST_CASE("augment rejects non-finite pixels") {
    Tensor image({1, 2, 2}, {0.0, 0.5, 1.0, std::nan("")});
    CHECK_THROWS_AS(flip_horizontal(image), DomainError);
    CHECK_THROWS_AS(augment_image(image, AugmentParams{}), DomainError);
}

TEST_CASE("augment_dataset expands every class five-fold") {
    const Corpus fixture = generate_fixture(1, 123);
    REQUIRE(fixture.manifest.size() == 8);
    AugmentationSpec spec;
    spec.seed = 9;
    const Corpus out = augment_dataset(fixture, spec);
    CHECK(out.manifest.size() == 40);
    CHECK(out.images.size() == 40);
    for (const std::size_t count : out.manifest.per_class_counts())
        CHECK(count == 5);
}

TEST_CASE("augmenting an empty corpus yields an empty corpus") {
    const Corpus out = augment_dataset(Corpus{}, AugmentationSpec{});
    CHECK(out.manifest.size() == 0);
    CHECK(out.images.empty());
}

TEST_CASE("augment_dataset rejects duplicate ids") {
    Corpus corpus = generate_fixture(1, 5);
    corpus.manifest.records[1].id = corpus.manifest.records[0].id;
    CHECK_THROWS_AS(augment_dataset(corpus, AugmentationSpec{}), InputError);
}

TEST_CASE("augmentation is deterministic for a fixed seed") {
    const Corpus fixture = generate_fixture(2, 33);
    AugmentationSpec spec;
    spec.seed = 44;
    const Corpus a = augment_dataset(fixture, spec);
    const Corpus b = augment_dataset(fixture, spec);
    REQUIRE(a.images.size() == b.images.size());
    for (std::size_t i = 0; i < a.images.size(); ++i)
        CHECK(Tensor::max_abs_diff(a.images[i], b.images[i]) == 0.0);
    for (std::size_t i = 0; i < a.manifest.size(); ++i) {
        CHECK(a.manifest.records[i].id == b.manifest.records[i].id);
        CHECK(a.manifest.records[i].provenance.rotation_deg ==
              b.manifest.records[i].provenance.rotation_deg);
        CHECK(a.manifest.records[i].provenance.brightness ==
              b.manifest.records[i].provenance.brightness);
    }
}

TEST_CASE("augmented records keep their original's label and id link") {
    const Corpus fixture = generate_fixture(2, 7);
    AugmentationSpec spec;
    spec.seed = 8;
    const Corpus out = augment_dataset(fixture, spec);
    REQUIRE(out.manifest.size() == fixture.manifest.size() * 5);
    for (std::size_t i = 0; i < fixture.manifest.size(); ++i) {
        const auto& original = fixture.manifest.records[i];
        for (std::size_t t = 0; t < 5; ++t) {
            const auto& r = out.manifest.records[i * 5 + t];
            CHECK(r.label == original.label);
            CHECK(r.provenance.original_id == original.id);
        }
        CHECK(out.manifest.records[i * 5].provenance.transform == "original");
    }
}

TEST_CASE("sampled parameters stay within the configured ranges") {
    const Corpus fixture = generate_fixture(4, 21);
    AugmentationSpec spec;
    spec.seed = 2;
    const Corpus out = augment_dataset(fixture, spec);
    for (const auto& r : out.manifest.records) {
        if (r.provenance.transform == "rotate") {
            CHECK(r.provenance.rotation_deg >= -15.0);
            CHECK(r.provenance.rotation_deg <= 15.0);
        }
        if (r.provenance.transform == "brightness") {
            CHECK(r.provenance.brightness >= 0.8);
            CHECK(r.provenance.brightness <= 1.2);
        }
    }
}
