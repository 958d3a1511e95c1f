#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "cropscan/dataset.hpp"

namespace cropscan {

/// 8x8 count matrix; rows are true classes, columns predicted.
class ConfusionMatrix {
public:
    void add(ClassId truth, ClassId predicted, std::uint64_t count = 1);

    std::uint64_t at(std::size_t truth, std::size_t predicted) const {
        return counts_[truth][predicted];
    }
    std::uint64_t total() const;
    std::uint64_t row_total(std::size_t truth) const;
    std::uint64_t col_total(std::size_t predicted) const;
    std::uint64_t diagonal() const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

private:
    std::array<std::array<std::uint64_t, kClassCount>, kClassCount> counts_{};
};

/// Counts (true, predicted) pairs; ids outside [0,7] are rejected.
ConfusionMatrix accumulate(
    std::span<const std::pair<int, int>> pairs);

struct MetricTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ClassificationReport {
    std::array<MetricTriple, kClassCount> per_class{};
    std::array<std::uint64_t, kClassCount> support{};  // true count per class
    double accuracy = 0.0;
    MetricTriple micro;     // from global TP/FP/FN counts
    MetricTriple weighted;  // support-weighted per-class average
};

/// Precision/recall are 0 when their denominator is empty; f1 is the
/// harmonic mean (0 when both inputs are 0). Requires a nonempty matrix.
ClassificationReport report(const ConfusionMatrix& matrix);

/// Fixed-width table: one row per class (2 decimals), then Accuracy
/// (3 decimals), Micro Avg and Weighted Avg.
std::string render_text(const ClassificationReport& rep);

/// Full-precision JSON with the raw matrix included.
std::string report_json(const ClassificationReport& rep,
                        const ConfusionMatrix& matrix);

}  // namespace cropscan
