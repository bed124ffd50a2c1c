#pragma once

#include <string>
#include <vector>

#include "xcc/precision.hpp"

namespace xcc::inline XCC_PRECISION_NS {

/// Confusion counts with the positive class = pneumonia (label 1).
struct Metrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    /// Set when a ratio had a zero denominator and was reported as 0.
    bool precision_undefined = false, recall_undefined = false, f1_undefined = false, accuracy_undefined = false;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool any_undefined() const { return precision_undefined || recall_undefined || f1_undefined || accuracy_undefined; }

    static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
    /// Counts at the 0.5 threshold (ties positive). Throws ValueError on
    /// empty or mismatched input.
    static Metrics from_predictions(const std::vector<double>& probs, const std::vector<int>& labels);
};

/// Harmonic mean 2PR / (P + R); 0 when P + R = 0.
double f1_score(double precision, double recall);

/// "split,tp,fp,tn,fn,accuracy,precision,recall,f1"
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& split, const Metrics& m);
/// One JSON object; undefined ratios are listed under "warnings".
std::string metrics_json(const std::string& split, const Metrics& m);

}  // namespace xcc::inline XCC_PRECISION_NS
