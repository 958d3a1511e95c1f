#include <doctest.h>

#include <cmath>
#include <vector>

#include "cropscan/metrics.hpp"
#include "cropscan/rng.hpp"

using namespace cropscan;

namespace {

/// Independent recomputation straight from the raw pairs; shares nothing
/// with the ConfusionMatrix/report path.
ClassificationReport brute_force_report(
    const std::vector<std::pair<int, int>>& pairs) {
    ClassificationReport rep;
    std::array<std::uint64_t, 8> tp{}, fp{}, fn{}, truth_count{};
    std::uint64_t correct = 0;
    for (const auto& [t, p] : pairs) {
        truth_count[t]++;
        if (t == p) {
            tp[t]++;
            ++correct;
        } else {
            fn[t]++;
            fp[p]++;
        }
    }
    std::uint64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    for (int k = 0; k < 8; ++k) {
        rep.support[k] = truth_count[k];
        const std::uint64_t predicted = tp[k] + fp[k];
        const std::uint64_t actual = tp[k] + fn[k];
        rep.per_class[k].precision =
            predicted ? double(tp[k]) / double(predicted) : 0.0;
        rep.per_class[k].recall = actual ? double(tp[k]) / double(actual) : 0.0;
        const double pr = rep.per_class[k].precision + rep.per_class[k].recall;
        rep.per_class[k].f1 =
            pr > 0 ? 2.0 * rep.per_class[k].precision *
                         rep.per_class[k].recall / pr
                   : 0.0;
        tp_sum += tp[k];
        fp_sum += fp[k];
        fn_sum += fn[k];
    }
    rep.accuracy = double(correct) / double(pairs.size());
    rep.micro.precision = double(tp_sum) / double(tp_sum + fp_sum);
    rep.micro.recall = double(tp_sum) / double(tp_sum + fn_sum);
    rep.micro.f1 = 2.0 * rep.micro.precision * rep.micro.recall /
                   (rep.micro.precision + rep.micro.recall);
    for (int k = 0; k < 8; ++k) {
        const double weight = double(truth_count[k]) / double(pairs.size());
        rep.weighted.precision += weight * rep.per_class[k].precision;
        rep.weighted.recall += weight * rep.per_class[k].recall;
        rep.weighted.f1 += weight * rep.per_class[k].f1;
    }
    return rep;
}

std::vector<std::pair<int, int>> random_pairs(std::size_t count, Rng& rng) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int truth = static_cast<int>(rng.below(8));
        // biased toward the diagonal so the matrix looks like a classifier's
        const int predicted = rng.uniform() < 0.6
                                  ? truth
                                  : static_cast<int>(rng.below(8));
        pairs.emplace_back(truth, predicted);
    }
    return pairs;
}

}  // namespace

TEST_CASE("accumulate counts (true, predicted) pairs") {
    const std::vector<std::pair<int, int>> pairs = {
        {0, 0}, {0, 1}, {1, 1}, {1, 1}};
    const ConfusionMatrix matrix = accumulate(pairs);
    CHECK(matrix.at(0, 0) == 1);
    CHECK(matrix.at(0, 1) == 1);
    CHECK(matrix.at(1, 1) == 2);
    CHECK(matrix.total() == 4);
}

TEST_CASE("all-correct predictions give a diagonal matrix") {
    std::vector<std::pair<int, int>> pairs;
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < 10; ++i) pairs.emplace_back(k, k);
    const ConfusionMatrix matrix = accumulate(pairs);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(matrix.at(i, j) == (i == j ? 10u : 0u));
}

TEST_CASE("an empty input accumulates a zero matrix") {
    const ConfusionMatrix matrix = accumulate({});
    CHECK(matrix.total() == 0);
}

TEST_CASE("accumulate rejects out-of-range ids") {
    const std::vector<std::pair<int, int>> pairs = {{0, 9}};
    CHECK_THROWS_AS(accumulate(pairs), DomainError);
}

TEST_CASE("a perfect matrix reports all ones") {
    ConfusionMatrix matrix;
    for (int k = 0; k < 8; ++k) matrix.add(to_class(k), to_class(k), 5);
    const ClassificationReport rep = report(matrix);
    CHECK(rep.accuracy == 1.0);
    for (int k = 0; k < 8; ++k) {
        CHECK(rep.per_class[k].precision == 1.0);
        CHECK(rep.per_class[k].recall == 1.0);
        CHECK(rep.per_class[k].f1 == 1.0);
    }
    CHECK(rep.micro.f1 == 1.0);
    CHECK(rep.weighted.f1 == 1.0);
}

TEST_CASE("a two-class submatrix reports hand-computed values") {
    ConfusionMatrix matrix;
    matrix.add(to_class(0), to_class(0), 2);
    matrix.add(to_class(1), to_class(0), 1);
    matrix.add(to_class(1), to_class(1), 1);
    const ClassificationReport rep = report(matrix);
    CHECK(rep.per_class[0].precision == doctest::Approx(2.0 / 3.0));
    CHECK(rep.per_class[1].precision == 1.0);
    CHECK(rep.per_class[0].recall == 1.0);
    CHECK(rep.per_class[1].recall == 0.5);
    CHECK(rep.accuracy == 0.75);
}

TEST_CASE("report rejects an empty matrix") {
    CHECK_THROWS_AS(report(ConfusionMatrix{}), InputError);
}

TEST_CASE("micro averages equal accuracy; weighted recall equals accuracy") {
    Rng rng(1234);
    for (int iter = 0; iter < 200; ++iter) {
        ConfusionMatrix matrix;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                matrix.add(to_class(i), to_class(j), rng.below(20));
        if (matrix.total() == 0) continue;
        const ClassificationReport rep = report(matrix);
        CHECK(std::abs(rep.micro.precision - rep.accuracy) <= 1e-12);
        CHECK(std::abs(rep.micro.recall - rep.accuracy) <= 1e-12);
        CHECK(std::abs(rep.micro.f1 - rep.accuracy) <= 1e-12);
        CHECK(std::abs(rep.weighted.recall - rep.accuracy) <= 1e-12);
    }
}

TEST_CASE("report matches a brute-force recomputation from raw pairs") {
    Rng rng(77);
    for (int iter = 0; iter < 20; ++iter) {
        const auto pairs = random_pairs(500, rng);
        const ClassificationReport got = report(accumulate(pairs));
        const ClassificationReport want = brute_force_report(pairs);
        CHECK(std::abs(got.accuracy - want.accuracy) <= 1e-12);
        for (int k = 0; k < 8; ++k) {
            CHECK(std::abs(got.per_class[k].precision -
                           want.per_class[k].precision) <= 1e-12);
            CHECK(std::abs(got.per_class[k].recall -
                           want.per_class[k].recall) <= 1e-12);
            CHECK(std::abs(got.per_class[k].f1 - want.per_class[k].f1) <=
                  1e-12);
            CHECK(got.support[k] == want.support[k]);
        }
        CHECK(std::abs(got.weighted.precision - want.weighted.precision) <=
              1e-12);
        CHECK(std::abs(got.weighted.f1 - want.weighted.f1) <= 1e-12);
    }
}

TEST_CASE("consistent label permutation permutes the report rows") {
    Rng rng(88);
    const auto pairs = random_pairs(300, rng);
    // rotate labels by 3
    std::vector<std::pair<int, int>> rotated;
    for (const auto& [t, p] : pairs)
        rotated.emplace_back((t + 3) % 8, (p + 3) % 8);

    const ClassificationReport a = report(accumulate(pairs));
    const ClassificationReport b = report(accumulate(rotated));
    CHECK(a.accuracy == b.accuracy);
    for (int k = 0; k < 8; ++k) {
        const int kr = (k + 3) % 8;
        CHECK(a.per_class[k].precision == b.per_class[kr].precision);
        CHECK(a.per_class[k].recall == b.per_class[kr].recall);
        CHECK(a.per_class[k].f1 == b.per_class[kr].f1);
    }
}

TEST_CASE("report values are bounded and f1 never exceeds its inputs' max") {
    Rng rng(99);
    for (int iter = 0; iter < 50; ++iter) {
        ConfusionMatrix matrix;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                matrix.add(to_class(i), to_class(j), rng.below(5));
        if (matrix.total() == 0) continue;
        const ClassificationReport rep = report(matrix);
        for (int k = 0; k < 8; ++k) {
            const auto& m = rep.per_class[k];
            CHECK(m.precision >= 0.0);
            CHECK(m.precision <= 1.0);
            CHECK(m.recall >= 0.0);
            CHECK(m.recall <= 1.0);
            CHECK(m.f1 >= 0.0);
            CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
        }
        CHECK(rep.accuracy >= 0.0);
        CHECK(rep.accuracy <= 1.0);
    }
}

TEST_CASE("the text table renders the expected cells") {
    ClassificationReport rep;
    rep.per_class[1] = {0.90, 0.88, 0.89};  // Bacterial Wilt row
    rep.accuracy = 0.875;
    rep.micro = {0.875, 0.875, 0.875};
    rep.weighted = {0.86, 0.85, 0.875};

    const std::string text = render_text(rep);
    CHECK(text.find("Bacterial Wilt") != std::string::npos);
    CHECK(text.find("0.90") != std::string::npos);
    CHECK(text.find("0.88") != std::string::npos);
    CHECK(text.find("0.89") != std::string::npos);
    CHECK(text.find("0.875") != std::string::npos);
    CHECK(text.find("Accuracy") != std::string::npos);
    CHECK(text.find("Micro Avg") != std::string::npos);
    CHECK(text.find("Weighted Avg") != std::string::npos);

    // class rows precede the summary rows, in id order
    CHECK(text.find("Anthracnose") < text.find("Bacterial Wilt"));
    CHECK(text.find("Fresh Cucumber") < text.find("Accuracy"));
    CHECK(text.find("Accuracy") < text.find("Micro Avg"));
    CHECK(text.find("Micro Avg") < text.find("Weighted Avg"));
}

TEST_CASE("an all-ones report renders 1.00 cells") {
    ClassificationReport rep;
    for (int k = 0; k < 8; ++k) rep.per_class[k] = {1.0, 1.0, 1.0};
    rep.accuracy = 1.0;
    rep.micro = {1.0, 1.0, 1.0};
    rep.weighted = {1.0, 1.0, 1.0};
    const std::string text = render_text(rep);
    CHECK(text.find("1.00") != std::string::npos);
    CHECK(text.find("1.000") != std::string::npos);  // the accuracy row
}

TEST_CASE("the json report carries the matrix and full precision values") {
    Rng rng(111);
    const auto pairs = random_pairs(100, rng);
    const ConfusionMatrix matrix = accumulate(pairs);
    const ClassificationReport rep = report(matrix);
    const std::string json = report_json(rep, matrix);
    CHECK(json.find("\"accuracy\"") != std::string::npos);
    CHECK(json.find("\"confusion_matrix\"") != std::string::npos);
    CHECK(json.find("\"micro_avg\"") != std::string::npos);
    CHECK(json.find("\"weighted_avg\"") != std::string::npos);
    CHECK(json.find("\"support\"") != std::string::npos);
}
