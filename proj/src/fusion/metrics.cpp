#include "xcc/fusion/metrics.hpp"

#include <cstdio>
#include <json.hpp>

#include "xcc/error.hpp"

namespace xcc::inline XCC_PRECISION_NS {

namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

double f1_score(double precision, double recall) {
    return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.tn = tn;
    m.fn = fn;
    m.accuracy = ratio(tp + tn, tp + fp + tn + fn, m.accuracy_undefined);
    m.precision = ratio(tp, tp + fp, m.precision_undefined);
    m.recall = ratio(tp, tp + fn, m.recall_undefined);
    m.f1_undefined = m.precision + m.recall == 0;
    m.f1 = f1_score(m.precision, m.recall);
    return m;
}

Metrics Metrics::from_predictions(const std::vector<double>& probs, const std::vector<int>& labels) {
    if (probs.empty() || probs.size() != labels.size()) throw ValueError("metrics need matching, nonempty inputs");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool pred = probs[i] >= 0.5;
        const bool pos = labels[i] == 1;
        tp += pred && pos;
        fp += pred && !pos;
        tn += !pred && !pos;
        fn += !pred && pos;
    }
    return from_counts(tp, fp, tn, fn);
}

std::string metrics_csv_header() { return "split,tp,fp,tn,fn,accuracy,precision,recall,f1"; }

std::string metrics_csv_row(const std::string& split, const Metrics& m) {
    return split + "," + std::to_string(m.tp) + "," + std::to_string(m.fp) + "," + std::to_string(m.tn) + "," +
           std::to_string(m.fn) + "," + fmt(m.accuracy) + "," + fmt(m.precision) + "," + fmt(m.recall) + "," +
           fmt(m.f1);
}

std::string metrics_json(const std::string& split, const Metrics& m) {
    nlohmann::ordered_json j{{"split", split},         {"tp", m.tp},
                             {"fp", m.fp},             {"tn", m.tn},
                             {"fn", m.fn},             {"accuracy", m.accuracy},
                             {"precision", m.precision}, {"recall", m.recall},
                             {"f1", m.f1}};
    nlohmann::ordered_json warnings = nlohmann::ordered_json::array();
    if (m.accuracy_undefined) warnings.push_back("accuracy: empty split, reported as 0");
    if (m.precision_undefined) warnings.push_back("precision: no positive predictions, reported as 0");
    if (m.recall_undefined) warnings.push_back("recall: no positive labels, reported as 0");
    if (m.f1_undefined) warnings.push_back("f1: precision + recall = 0, reported as 0");
    j["warnings"] = warnings;
    return j.dump();
}

}  // namespace xcc::inline XCC_PRECISION_NS
