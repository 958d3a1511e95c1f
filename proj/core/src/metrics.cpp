#include "cropscan/metrics.hpp"

#include <cstdio>

#include <json.hpp>

namespace cropscan {

void ConfusionMatrix::add(ClassId truth, ClassId predicted,
                          std::uint64_t count) {
    counts_[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)] +=
        count;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts_)
        for (const std::uint64_t v : row) n += v;
    return n;
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
    std::uint64_t n = 0;
    for (const std::uint64_t v : counts_[truth]) n += v;
    return n;
}

std::uint64_t ConfusionMatrix::col_total(std::size_t predicted) const {
    std::uint64_t n = 0;
    for (const auto& row : counts_) n += row[predicted];
    return n;
}

std::uint64_t ConfusionMatrix::diagonal() const {
    std::uint64_t n = 0;
    for (std::size_t k = 0; k < kClassCount; ++k) n += counts_[k][k];
    return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    for (std::size_t i = 0; i < kClassCount; ++i)
        for (std::size_t j = 0; j < kClassCount; ++j)
            counts_[i][j] += other.counts_[i][j];
    return *this;
}

ConfusionMatrix accumulate(std::span<const std::pair<int, int>> pairs) {
    ConfusionMatrix matrix;
    for (const auto& [truth, predicted] : pairs)
        matrix.add(to_class(truth), to_class(predicted));
    return matrix;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic_f1(double precision, double recall) {
    const double sum = precision + recall;
    return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

}  // namespace

ClassificationReport report(const ConfusionMatrix& matrix) {
    const std::uint64_t total = matrix.total();
    if (total == 0) throw InputError("cannot report on an empty matrix");

    ClassificationReport rep;
    std::uint64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    for (std::size_t k = 0; k < kClassCount; ++k) {
        const std::uint64_t tp = matrix.at(k, k);
        const std::uint64_t row = matrix.row_total(k);
        const std::uint64_t col = matrix.col_total(k);
        rep.support[k] = row;
        rep.per_class[k].precision = ratio(tp, col);
        rep.per_class[k].recall = ratio(tp, row);
        rep.per_class[k].f1 =
            harmonic_f1(rep.per_class[k].precision, rep.per_class[k].recall);
        tp_sum += tp;
        fp_sum += col - tp;
        fn_sum += row - tp;
    }
    rep.accuracy = ratio(matrix.diagonal(), total);

    rep.micro.precision = ratio(tp_sum, tp_sum + fp_sum);
    rep.micro.recall = ratio(tp_sum, tp_sum + fn_sum);
    rep.micro.f1 = harmonic_f1(rep.micro.precision, rep.micro.recall);

    for (std::size_t k = 0; k < kClassCount; ++k) {
        const double weight =
            static_cast<double>(rep.support[k]) / static_cast<double>(total);
        rep.weighted.precision += weight * rep.per_class[k].precision;
        rep.weighted.recall += weight * rep.per_class[k].recall;
        rep.weighted.f1 += weight * rep.per_class[k].f1;
    }
    return rep;
}

std::string render_text(const ClassificationReport& rep) {
    std::string out;
    char line[128];

    std::snprintf(line, sizeof(line), "%-18s %9s %9s %9s\n", "",
                  "Precision", "Recall", "F1-Score");
    out += line;
    for (std::size_t k = 0; k < kClassCount; ++k) {
        std::snprintf(line, sizeof(line), "%-18s %9.2f %9.2f %9.2f\n",
                      std::string(class_name(to_class(int(k)))).c_str(),
                      rep.per_class[k].precision, rep.per_class[k].recall,
                      rep.per_class[k].f1);
        out += line;
    }
    std::snprintf(line, sizeof(line), "%-18s %9s %9s %9.3f\n", "Accuracy", "",
                  "", rep.accuracy);
    out += line;
    std::snprintf(line, sizeof(line), "%-18s %9.2f %9.2f %9.2f\n", "Micro Avg",
                  rep.micro.precision, rep.micro.recall, rep.micro.f1);
    out += line;
    std::snprintf(line, sizeof(line), "%-18s %9.2f %9.2f %9.2f\n",
                  "Weighted Avg", rep.weighted.precision, rep.weighted.recall,
                  rep.weighted.f1);
    out += line;
    return out;
}

std::string report_json(const ClassificationReport& rep,
                        const ConfusionMatrix& matrix) {
    nlohmann::json j;
    j["accuracy"] = rep.accuracy;
    auto triple = [](const MetricTriple& t) {
        return nlohmann::json{
            {"precision", t.precision}, {"recall", t.recall}, {"f1", t.f1}};
    };
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t k = 0; k < kClassCount; ++k) {
        nlohmann::json c = triple(rep.per_class[k]);
        c["name"] = class_name(to_class(int(k)));
        c["support"] = rep.support[k];
        classes.push_back(c);
    }
    j["classes"] = classes;
    j["micro_avg"] = triple(rep.micro);
    j["weighted_avg"] = triple(rep.weighted);

    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < kClassCount; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t jj = 0; jj < kClassCount; ++jj)
            row.push_back(matrix.at(i, jj));
        rows.push_back(row);
    }
    j["confusion_matrix"] = rows;
    j["total"] = matrix.total();
    return j.dump(2);
}

}  // namespace cropscan
