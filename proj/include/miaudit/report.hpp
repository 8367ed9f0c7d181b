#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miaudit/corpus.hpp"
#include "miaudit/detection.hpp"
#include "miaudit/metrics.hpp"
#include "miaudit/stats.hpp"

namespace miaudit::report {

/// Fixed-point formatting used by all reports (3 decimals, to match the
/// published tables).
std::string fmt3(double v);
/// p-value formatting: "<0.001" below that level, else 3 decimals.
std::string fmt_p(double p);

/// High/low samples of one metric, aligned with the corpus quality labels.
struct GroupSamples {
    std::vector<double> high;
    std::vector<double> low;
};
GroupSamples group_samples(const Corpus& corpus,
                           std::span<const MetricVector> vectors, MetricId id,
                           CensoringMode mode);

/// One comparison row per metric in table order. Rows whose comparison is
/// degenerate (zero pooled SD) are skipped.
std::vector<GroupComparison> build_comparisons(
    const Corpus& corpus, std::span<const MetricVector> vectors,
    CensoringMode mode, TTestKind kind = TTestKind::pooled);

/// Risk-oriented scores (higher = more likely low quality) and labels
/// (1 = low) for curve analysis, skipping undefined scores.
struct OrientedScores {
    std::vector<double> scores;
    std::vector<int> labels;
};
OrientedScores oriented_scores(const Corpus& corpus,
                               std::span<const MetricVector> vectors,
                               MetricId id);

// ---- delimiter-separated artifacts (schema header line + header row)

std::string metrics_csv(const Corpus& corpus,
                        std::span<const MetricVector> vectors,
                        char delim = ',');
std::string metrics_jsonl(const Corpus& corpus,
                          std::span<const MetricVector> vectors);
std::string comparisons_csv(std::span<const GroupComparison> rows,
                            CensoringMode mode, char delim = ',');
std::string detection_csv(std::span<const DetectionOutcome> outcomes,
                          char delim = ',');
std::string sweep_csv(const SweepResult& sweep, char delim = ',');
std::string curve_csv(const CurveResult& curve, char delim = ',');
std::string bootstrap_csv(std::span<const BootstrapCI> cis, char delim = ',');

// ---- markdown fragments

std::string comparison_table_markdown(std::span<const GroupComparison> rows);
std::string mann_whitney_table_markdown(std::span<const GroupComparison> rows);
std::string detection_table_markdown(std::span<const DetectionOutcome> outcomes);
std::string case_markdown(const CaseTrace& trace, const MetricVector& metrics);
std::string case_json(const CaseTrace& trace, const MetricVector& metrics);

/// Creates parent directories as needed.
void write_file(const std::string& path, const std::string& content);

}  // namespace miaudit::report
