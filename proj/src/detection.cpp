#include "miaudit/detection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <set>

#include "miaudit/common.hpp"

namespace miaudit {

const char* to_string(DetectionMethod m) {
    switch (m) {
        case DetectionMethod::per_turn: return "per_turn";
        case DetectionMethod::temporal: return "temporal";
        case DetectionMethod::early_warning_temporal:
            return "early_warning_temporal";
        case DetectionMethod::early_warning_per_turn:
            return "early_warning_per_turn";
        case DetectionMethod::combined: return "combined";
    }
    return "combined";
}

const char* to_string(SweepMetric metric) {
    switch (metric) {
        case SweepMetric::temporal: return "temporal";
        case SweepMetric::early_warning: return "early_warning";
        case SweepMetric::per_turn: return "per_turn";
    }
    return "temporal";
}

namespace {

void check_alignment(const Corpus& corpus,
                     std::span<const MetricVector> vectors) {
    if (corpus.included.size() != vectors.size())
        throw ConfigError("metric vectors do not match corpus.included");
}

// Flags conversations whose score is < threshold; absent scores are skipped.
DetectionOutcome run_detection(
    const Corpus& corpus, std::span<const MetricVector> vectors,
    DetectionMethod method, double threshold,
    const std::function<std::optional<double>(const MetricVector&)>& score) {
    check_alignment(corpus, vectors);
    DetectionOutcome out;
    out.method = method;
    out.threshold = threshold;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const Conversation& conv = corpus.included[i];
        (conv.quality == Quality::low ? out.n_low : out.n_high) += 1;
        std::optional<double> value = score(vectors[i]);
        if (!value) {
            ++out.skipped;
            continue;
        }
        if (*value < threshold) {
            out.flagged.push_back(conv.id);
            (conv.quality == Quality::low ? out.detected : out.false_alarms) += 1;
        }
    }
    out.detection_rate =
        out.n_low ? static_cast<double>(out.detected) / out.n_low : 0.0;
    out.false_alarm_rate =
        out.n_high ? static_cast<double>(out.false_alarms) / out.n_high : 0.0;
    long n_flagged = out.detected + out.false_alarms;
    out.precision =
        n_flagged ? static_cast<double>(out.detected) / n_flagged : 0.0;
    out.recall = out.detection_rate;
    double pr = out.precision + out.recall;
    out.f1 = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
    return out;
}

std::optional<double> metric_for_sweep(const MetricVector& m,
                                       SweepMetric metric) {
    switch (metric) {
        case SweepMetric::temporal: return m.sustain_delta;
        case SweepMetric::early_warning: return m.ew_delta;
        case SweepMetric::per_turn: return m.per_turn;
    }
    return std::nullopt;
}

}  // namespace

DetectionOutcome detect_temporal(const Corpus& corpus,
                                 std::span<const MetricVector> vectors,
                                 double theta) {
    return run_detection(corpus, vectors, DetectionMethod::temporal, theta,
                         [](const MetricVector& m) {
                             return std::optional<double>(m.sustain_delta);
                         });
}

DetectionOutcome detect_per_turn(const Corpus& corpus,
                                 std::span<const MetricVector> vectors,
                                 double theta_pt) {
    return run_detection(corpus, vectors, DetectionMethod::per_turn, theta_pt,
                         [](const MetricVector& m) { return m.per_turn; });
}

EarlyWarningOutcomes detect_early_warning(const Corpus& corpus,
                                          std::span<const MetricVector> vectors,
                                          double theta_ew, double theta_pt) {
    EarlyWarningOutcomes out;
    out.temporal = run_detection(
        corpus, vectors, DetectionMethod::early_warning_temporal, theta_ew,
        [](const MetricVector& m) { return std::optional<double>(m.ew_delta); });
    out.per_turn = run_detection(
        corpus, vectors, DetectionMethod::early_warning_per_turn, theta_pt,
        [](const MetricVector& m) { return m.midpoint_per_turn; });
    std::array<DetectionOutcome, 2> parts{out.temporal, out.per_turn};
    out.combined = combine(corpus, parts, CombineRule::either);
    return out;
}

DetectionOutcome combine(const Corpus& corpus,
                         std::span<const DetectionOutcome> outcomes,
                         CombineRule rule) {
    if (outcomes.empty()) throw ConfigError("combine of zero outcomes");
    for (const DetectionOutcome& o : outcomes)
        if (o.n_low != outcomes.front().n_low ||
            o.n_high != outcomes.front().n_high)
            throw ValidationError("combine over mismatched corpora");

    std::set<std::string> flags(outcomes.front().flagged.begin(),
                                outcomes.front().flagged.end());
    for (std::size_t i = 1; i < outcomes.size(); ++i) {
        std::set<std::string> other(outcomes[i].flagged.begin(),
                                    outcomes[i].flagged.end());
        std::set<std::string> merged;
        if (rule == CombineRule::either) {
            std::set_union(flags.begin(), flags.end(), other.begin(),
                           other.end(), std::inserter(merged, merged.begin()));
        } else {
            std::set_intersection(flags.begin(), flags.end(), other.begin(),
                                  other.end(),
                                  std::inserter(merged, merged.begin()));
        }
        flags = std::move(merged);
    }

    DetectionOutcome out;
    out.method = DetectionMethod::combined;
    out.threshold = std::numeric_limits<double>::quiet_NaN();
    for (const Conversation& conv : corpus.included) {
        (conv.quality == Quality::low ? out.n_low : out.n_high) += 1;
        if (flags.count(conv.id)) {
            out.flagged.push_back(conv.id);
            (conv.quality == Quality::low ? out.detected : out.false_alarms) += 1;
        }
    }
    out.detection_rate =
        out.n_low ? static_cast<double>(out.detected) / out.n_low : 0.0;
    out.false_alarm_rate =
        out.n_high ? static_cast<double>(out.false_alarms) / out.n_high : 0.0;
    long n_flagged = out.detected + out.false_alarms;
    out.precision =
        n_flagged ? static_cast<double>(out.detected) / n_flagged : 0.0;
    out.recall = out.detection_rate;
    double pr = out.precision + out.recall;
    out.f1 = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
    return out;
}

GridSpec GridSpec::parse(const std::string& text) {
    GridSpec spec;
    if (text == "data") {
        spec.kind = Kind::data_driven;
        return spec;
    }
    auto first = text.find(':');
    auto second = text.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos)
        throw ConfigError("sweep grid must be start:stop:step or data: " + text);
    try {
        spec.start = std::stod(text.substr(0, first));
        spec.stop = std::stod(text.substr(first + 1, second - first - 1));
        spec.step = std::stod(text.substr(second + 1));
    } catch (const std::exception&) {
        throw ConfigError("sweep grid must be numeric start:stop:step: " + text);
    }
    if (spec.step == 0.0) throw ConfigError("sweep step must be nonzero");
    return spec;
}

SweepResult sweep_threshold(const Corpus& corpus,
                            std::span<const MetricVector> vectors,
                            SweepMetric metric, const GridSpec& grid) {
    check_alignment(corpus, vectors);
    std::vector<double> thresholds;
    if (grid.kind == GridSpec::Kind::range) {
        double step = std::fabs(grid.step);
        double dir = grid.stop >= grid.start ? 1.0 : -1.0;
        long count =
            static_cast<long>(std::round(std::fabs(grid.stop - grid.start) / step)) + 1;
        for (long i = 0; i < count; ++i)
            thresholds.push_back(grid.start + dir * step * static_cast<double>(i));
    } else {
        std::vector<double> observed;
        for (const MetricVector& m : vectors)
            if (auto v = metric_for_sweep(m, metric)) observed.push_back(*v);
        std::sort(observed.begin(), observed.end());
        observed.erase(std::unique(observed.begin(), observed.end()),
                       observed.end());
        for (std::size_t i = 1; i < observed.size(); ++i)
            thresholds.push_back((observed[i - 1] + observed[i]) / 2.0);
    }
    if (thresholds.empty()) throw ConfigError("empty sweep grid");

    auto detect_at = [&](double theta) {
        switch (metric) {
            case SweepMetric::temporal:
                return detect_temporal(corpus, vectors, theta);
            case SweepMetric::early_warning:
                return run_detection(corpus, vectors,
                                     DetectionMethod::early_warning_temporal,
                                     theta, [](const MetricVector& m) {
                                         return std::optional<double>(m.ew_delta);
                                     });
            case SweepMetric::per_turn:
                return detect_per_turn(corpus, vectors, theta);
        }
        return detect_temporal(corpus, vectors, theta);
    };

    SweepResult result;
    result.grid.resize(thresholds.size());
    const long n = static_cast<long>(thresholds.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        DetectionOutcome outcome = detect_at(thresholds[static_cast<std::size_t>(i)]);
        result.grid[static_cast<std::size_t>(i)] = {
            thresholds[static_cast<std::size_t>(i)], outcome.f1,
            outcome.detected, outcome.false_alarms};
    }

    const SweepPoint* best = &result.grid.front();
    for (const SweepPoint& point : result.grid) {
        bool better = point.f1 > best->f1;
        bool tie_closer_to_zero =
            point.f1 == best->f1 &&
            std::fabs(point.threshold) < std::fabs(best->threshold);
        if (better || tie_closer_to_zero) best = &point;
    }
    result.best_threshold = best->threshold;
    result.best_f1 = best->f1;
    return result;
}

}  // namespace miaudit
