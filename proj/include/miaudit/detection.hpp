#pragma once

#include <span>
#include <string>
#include <vector>

#include "miaudit/corpus.hpp"
#include "miaudit/metrics.hpp"

namespace miaudit {

enum class DetectionMethod {
    per_turn,
    temporal,
    early_warning_temporal,
    early_warning_per_turn,
    combined,
};
const char* to_string(DetectionMethod m);

/// One thresholded flagging pass counted against the expert quality labels.
/// All flag rules use strict '<' on the underlying metric.
struct DetectionOutcome {
    DetectionMethod method = DetectionMethod::temporal;
    double threshold = 0.0;
    std::vector<std::string> flagged;  // conversation ids, corpus order
    long detected = 0;      // flags among low-quality conversations
    long false_alarms = 0;  // flags among high-quality conversations
    long n_low = 0;
    long n_high = 0;
    long skipped = 0;  // conversations without a defined score
    double detection_rate = 0.0;
    double false_alarm_rate = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Flags conversations with sustain_delta < theta.
DetectionOutcome detect_temporal(const Corpus& corpus,
                                 std::span<const MetricVector> vectors,
                                 double theta);

/// Flags conversations with per_turn < theta_pt; conversations without a
/// defined per-turn score are skipped (counted in `skipped`).
DetectionOutcome detect_per_turn(const Corpus& corpus,
                                 std::span<const MetricVector> vectors,
                                 double theta_pt);

struct EarlyWarningOutcomes {
    DetectionOutcome temporal;  // ew_delta < theta_ew
    DetectionOutcome per_turn;  // midpoint per-turn score < theta_pt
    DetectionOutcome combined;  // union of the two
};

/// Midpoint early warning: only first-half evidence is used.
EarlyWarningOutcomes detect_early_warning(const Corpus& corpus,
                                          std::span<const MetricVector> vectors,
                                          double theta_ew, double theta_pt);

enum class CombineRule { either, both };

/// Union (either) or intersection (both) of flag sets computed on the same
/// corpus. Throws ValidationError when the outcomes' group sizes disagree.
DetectionOutcome combine(const Corpus& corpus,
                         std::span<const DetectionOutcome> outcomes,
                         CombineRule rule);

struct GridSpec {
    enum class Kind { range, data_driven };
    Kind kind = Kind::range;
    double start = -0.05;
    double stop = -0.50;
    double step = 0.05;

    /// Parses "start:stop:step" or "data".
    static GridSpec parse(const std::string& text);
};

enum class SweepMetric { temporal, early_warning, per_turn };
const char* to_string(SweepMetric metric);

struct SweepPoint {
    double threshold = 0.0;
    double f1 = 0.0;
    long detected = 0;
    long false_alarms = 0;
};

struct SweepResult {
    std::vector<SweepPoint> grid;
    double best_threshold = 0.0;
    double best_f1 = 0.0;
};

/// F1 across the grid. Ties break toward the threshold nearest zero. The
/// data-driven grid is the midpoints of consecutive distinct observed
/// values of the swept metric.
SweepResult sweep_threshold(const Corpus& corpus,
                            std::span<const MetricVector> vectors,
                            SweepMetric metric, const GridSpec& grid);

}  // namespace miaudit
