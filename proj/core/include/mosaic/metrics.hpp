#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mosaic/gateway.hpp"

namespace mosaic::metrics {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + tn + fp + fn; }
};

// Label 1 is the positive class.
ConfusionCounts confusion(const std::vector<int>& preds, const std::vector<int>& labels);

// Matthews correlation coefficient; 0.0 when any denominator factor is zero
// (the sklearn convention).
double mcc(const ConfusionCounts& c);

struct F1Accuracy {
    double f1 = 0;
    double accuracy = 0;
};

F1Accuracy f1_accuracy(const ConfusionCounts& c);

struct MetricsReport {
    double accuracy = 0;
    double f1 = 0;
    double mcc = 0;
    std::int64_t n = 0;
    ConfusionCounts counts;

    std::string to_json() const;
    std::string to_table() const;
};

MetricsReport metrics_report(const std::vector<int>& preds,
                             const std::vector<int>& labels);

struct FaithfulnessReport {
    std::int64_t n_rationales = 0;   // judged successfully
    std::int64_t n_yes = 0;
    std::int64_t n_parse_errors = 0;  // excluded from the denominator
    double score = 0;                 // n_yes / n_rationales
    std::vector<std::string> verdicts;  // "yes" / "no" / "error" per rationale

    std::string to_json() const;
};

struct RationaleSet {
    std::string knowledge;
    std::vector<std::string> rationales;
};

// Judge every rationale independently; judge-parse failures are counted and
// excluded from the denominator. Throws DomainError on an empty evaluation.
FaithfulnessReport faithfulness(const std::vector<RationaleSet>& sets,
                                const prompts::TemplateLibrary& lib,
                                gateway::Gateway& gw);

// Split a model output's bullet lists on the "- " item prefix of the
// rearview format.
std::vector<std::string> extract_rationales(const std::string& output);

struct SweepRow {
    double tau = 0;
    double accuracy = 0;
    double faithfulness = 0;
};

// CSV serialization: header "tau,accuracy,faithfulness", one row per tau.
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Deduplicate and ascending-sort taus; all must be > 0. Returns the number
// of duplicates removed via *dropped when non-null.
std::vector<double> normalize_taus(const std::vector<double>& taus,
                                   std::size_t* dropped = nullptr);

}  // namespace mosaic::metrics
