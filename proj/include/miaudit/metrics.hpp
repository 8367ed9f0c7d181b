#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miaudit/corpus.hpp"

namespace miaudit {

struct HalfRatios {
    double c1 = 0.0;  // first-half change-talk ratio
    double c2 = 0.0;  // second-half change-talk ratio
    double s1 = 0.0;  // first-half sustain-talk ratio
    double s2 = 0.0;  // second-half sustain-talk ratio
};

/// The per-conversation scores. per_turn is absent when the conversation
/// has no therapist turns (it is then skipped in per-turn analyses).
/// midpoint_per_turn is absent when no therapist turn precedes the second
/// client half.
struct MetricVector {
    std::string conversation_id;
    std::optional<double> per_turn;
    std::optional<double> midpoint_per_turn;
    double sustain_delta = 0.0;   // s1 - s2, in [-1, 1]
    double temporal_score = 0.0;  // (c2 - c1) + (s1 - s2), in [-2, 2]
    long t_dom = 0;               // = n_labeled when censored
    bool censored = false;
    double t_norm = 0.0;  // t_dom / n_labeled, in (0, 1]
    long s_max = 0;
    double ew_delta = 0.0;  // c1 - s1, in [-1, 1]
    HalfRatios halves;
    long n_labeled = 0;
};

struct SustainRun {
    long start = 0;  // 1-based labeled client turn index
    long length = 0;
};

/// Case diagnostics: the stagnation run (longest neutral stretch) and the
/// backsliding index (first-half change ratio minus second-half change
/// ratio) that the simple sustain-delta metric does not represent.
struct CaseTrace {
    std::string conversation_id;
    std::vector<TalkType> talk_type_sequence;
    std::vector<SustainRun> sustain_runs;
    long longest_neutral_run = 0;
    long change_count_first = 0;
    long change_count_second = 0;
    double sustain_ratio_first = 0.0;
    double sustain_ratio_second = 0.0;
    double backslide_index = 0.0;  // c1 - c2
};

// ---- sequence-level kernels (defined for n >= 2; window metrics for n >= 1)

HalfRatios half_ratios(std::span<const TalkType> turns);
double sustain_delta(std::span<const TalkType> turns);
double temporal_score(std::span<const TalkType> turns);
double early_warning_score(std::span<const TalkType> turns);

/// First window of 3 consecutive turns holding >= 2 sustain labels; returns
/// the 1-based index of that window's final turn. Right-censored at n when
/// no window qualifies.
struct DominanceResult {
    long t_dom = 0;
    bool censored = false;
};
DominanceResult first_sustain_dominance(std::span<const TalkType> turns);

long max_sustain_streak(std::span<const TalkType> turns);

// ---- conversation-level operations

/// Fraction of therapist turns labeled reflection or question. Throws
/// ValidationError when the conversation has no therapist turns.
double per_turn_score(const Conversation& conv);

/// Same ratio over only the therapist turns preceding the second client
/// half. Throws ValidationError when that set is empty.
double midpoint_per_turn_score(const Conversation& conv);

/// All scores for one included conversation. Throws ValidationError when
/// the conversation fails the inclusion rule (n < 4 labeled client turns).
MetricVector evaluate(const Conversation& conv);

CaseTrace case_trace(const Conversation& conv);

/// Scores for every included conversation, aligned with corpus.included.
/// Parallel over conversations; results are deterministic.
std::vector<MetricVector> evaluate_corpus(const Corpus& corpus);

// ---- metric table (row order and labels of the comparison report)

enum class MetricId { per_turn, sustain_delta, temporal_score, t_norm, t_dom, s_max };

enum class CensoringMode { include_censored, events_only };
const char* to_string(CensoringMode mode);

struct MetricSpec {
    MetricId id;
    const char* key;         // machine name in tables and records
    const char* display;     // report row label
    const char* type_label;  // report row category
    int risk_sign;           // risk score = risk_sign * value (higher = riskier)
};

std::span<const MetricSpec> metric_table();
const MetricSpec& metric_spec(MetricId id);
std::optional<MetricId> metric_id_from_key(std::string_view key);

/// Sample of one metric over a set of conversations. Undefined per-turn
/// scores are skipped; the censoring mode controls whether censored
/// conversations enter the timing metrics (valued at n / 1.0) or are
/// dropped. Non-timing metrics ignore the mode.
std::vector<double> metric_sample(std::span<const MetricVector> vectors,
                                  MetricId id, CensoringMode mode);

}  // namespace miaudit
