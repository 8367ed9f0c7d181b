#include "miaudit/metrics.hpp"

#include <array>

#include "miaudit/common.hpp"

namespace miaudit {

namespace {

double ratio_of(std::span<const TalkType> turns, TalkType type) {
    if (turns.empty()) return 0.0;
    long count = 0;
    for (TalkType t : turns)
        if (t == type) ++count;
    return static_cast<double>(count) / static_cast<double>(turns.size());
}

void require_splittable(std::span<const TalkType> turns) {
    if (turns.size() < 2)
        throw ValidationError("half-split metrics need at least 2 labeled "
                              "client turns");
}

void require_included(const Conversation& conv) {
    if (conv.n_labeled() < kMinLabeledClientTurns)
        throw ValidationError("conversation " + conv.id +
                              " excluded: fewer than 4 labeled client turns");
}

}  // namespace

HalfRatios half_ratios(std::span<const TalkType> turns) {
    require_splittable(turns);
    std::size_t mid = turns.size() / 2;
    auto first = turns.subspan(0, mid);
    auto second = turns.subspan(mid);
    return {ratio_of(first, TalkType::change), ratio_of(second, TalkType::change),
            ratio_of(first, TalkType::sustain),
            ratio_of(second, TalkType::sustain)};
}

double sustain_delta(std::span<const TalkType> turns) {
    HalfRatios h = half_ratios(turns);
    return h.s1 - h.s2;
}

double temporal_score(std::span<const TalkType> turns) {
    HalfRatios h = half_ratios(turns);
    return (h.c2 - h.c1) + (h.s1 - h.s2);
}

double early_warning_score(std::span<const TalkType> turns) {
    HalfRatios h = half_ratios(turns);
    return h.c1 - h.s1;
}

DominanceResult first_sustain_dominance(std::span<const TalkType> turns) {
    long n = static_cast<long>(turns.size());
    long in_window = 0;
    for (long i = 0; i < n; ++i) {
        if (turns[static_cast<std::size_t>(i)] == TalkType::sustain) ++in_window;
        if (i >= 3 && turns[static_cast<std::size_t>(i - 3)] == TalkType::sustain)
            --in_window;
        if (i >= 2 && in_window >= 2) return {i + 1, false};
    }
    return {n, true};
}

long max_sustain_streak(std::span<const TalkType> turns) {
    long best = 0, run = 0;
    for (TalkType t : turns) {
        run = (t == TalkType::sustain) ? run + 1 : 0;
        if (run > best) best = run;
    }
    return best;
}

namespace {

double qualifying_ratio(const std::vector<TherapistTurn>& turns) {
    long qualifying = 0;
    for (const TherapistTurn& turn : turns)
        if (turn.behavior && (*turn.behavior == Behavior::reflection ||
                              *turn.behavior == Behavior::question))
            ++qualifying;
    return static_cast<double>(qualifying) / static_cast<double>(turns.size());
}

}  // namespace

double per_turn_score(const Conversation& conv) {
    if (conv.therapist_turns.empty())
        throw ValidationError("conversation " + conv.id +
                              ": per-turn score undefined (no therapist turns)");
    return qualifying_ratio(conv.therapist_turns);
}

double midpoint_per_turn_score(const Conversation& conv) {
    std::vector<TherapistTurn> turns = first_half_therapist_turns(conv);
    if (turns.empty())
        throw ValidationError("conversation " + conv.id +
                              ": midpoint per-turn score undefined (no "
                              "first-half therapist turns)");
    return qualifying_ratio(turns);
}

MetricVector evaluate(const Conversation& conv) {
    require_included(conv);
    std::vector<TalkType> turns = conv.labeled_client_turns();

    MetricVector m;
    m.conversation_id = conv.id;
    m.n_labeled = static_cast<long>(turns.size());
    m.halves = half_ratios(turns);
    m.sustain_delta = m.halves.s1 - m.halves.s2;
    m.temporal_score = (m.halves.c2 - m.halves.c1) + m.sustain_delta;
    m.ew_delta = m.halves.c1 - m.halves.s1;
    DominanceResult dom = first_sustain_dominance(turns);
    m.t_dom = dom.t_dom;
    m.censored = dom.censored;
    m.t_norm = static_cast<double>(m.t_dom) / static_cast<double>(m.n_labeled);
    m.s_max = max_sustain_streak(turns);
    if (!conv.therapist_turns.empty()) m.per_turn = per_turn_score(conv);
    if (!first_half_therapist_turns(conv).empty())
        m.midpoint_per_turn = midpoint_per_turn_score(conv);
    return m;
}

CaseTrace case_trace(const Conversation& conv) {
    require_included(conv);
    CaseTrace trace;
    trace.conversation_id = conv.id;
    trace.talk_type_sequence = conv.labeled_client_turns();
    const auto& seq = trace.talk_type_sequence;

    long run_start = 0, run_len = 0;
    long neutral_run = 0;
    for (long i = 0; i <= static_cast<long>(seq.size()); ++i) {
        bool sustain = i < static_cast<long>(seq.size()) &&
                       seq[static_cast<std::size_t>(i)] == TalkType::sustain;
        if (sustain) {
            if (run_len == 0) run_start = i + 1;
            ++run_len;
        } else if (run_len > 0) {
            trace.sustain_runs.push_back({run_start, run_len});
            run_len = 0;
        }
        bool neutral = i < static_cast<long>(seq.size()) &&
                       seq[static_cast<std::size_t>(i)] == TalkType::neutral;
        neutral_run = neutral ? neutral_run + 1 : 0;
        if (neutral_run > trace.longest_neutral_run)
            trace.longest_neutral_run = neutral_run;
    }

    std::size_t mid = seq.size() / 2;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i] != TalkType::change) continue;
        if (i < mid) ++trace.change_count_first;
        else ++trace.change_count_second;
    }
    HalfRatios h = half_ratios(seq);
    trace.sustain_ratio_first = h.s1;
    trace.sustain_ratio_second = h.s2;
    trace.backslide_index = h.c1 - h.c2;
    return trace;
}

std::vector<MetricVector> evaluate_corpus(const Corpus& corpus) {
    std::vector<MetricVector> out(corpus.included.size());
    const long n = static_cast<long>(corpus.included.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            evaluate(corpus.included[static_cast<std::size_t>(i)]);
    return out;
}

const char* to_string(CensoringMode mode) {
    return mode == CensoringMode::include_censored ? "include-censored"
                                                   : "events-only";
}

namespace {

constexpr std::array<MetricSpec, 6> kMetricTable{{
    {MetricId::per_turn, "per_turn", "Per-turn process score",
     "Per-turn baseline", -1},
    {MetricId::sustain_delta, "sustain_delta", "Sustain-talk delta",
     "Temporal direction", -1},
    {MetricId::temporal_score, "temporal_score", "Temporal score",
     "Temporal direction", -1},
    {MetricId::t_norm, "t_norm", "Dominance normalized", "Timing", -1},
    {MetricId::t_dom, "t_dom", "First sustain dominance", "Timing", -1},
    {MetricId::s_max, "s_max", "Max sustain streak", "Persistence", 1},
}};

}  // namespace

std::span<const MetricSpec> metric_table() { return kMetricTable; }

const MetricSpec& metric_spec(MetricId id) {
    for (const MetricSpec& spec : kMetricTable)
        if (spec.id == id) return spec;
    return kMetricTable[0];
}

std::optional<MetricId> metric_id_from_key(std::string_view key) {
    for (const MetricSpec& spec : kMetricTable)
        if (key == spec.key) return spec.id;
    return std::nullopt;
}

std::vector<double> metric_sample(std::span<const MetricVector> vectors,
                                  MetricId id, CensoringMode mode) {
    std::vector<double> out;
    out.reserve(vectors.size());
    for (const MetricVector& m : vectors) {
        switch (id) {
            case MetricId::per_turn:
                if (m.per_turn) out.push_back(*m.per_turn);
                break;
            case MetricId::sustain_delta:
                out.push_back(m.sustain_delta);
                break;
            case MetricId::temporal_score:
                out.push_back(m.temporal_score);
                break;
            case MetricId::t_norm:
                if (!m.censored || mode == CensoringMode::include_censored)
                    out.push_back(m.t_norm);
                break;
            case MetricId::t_dom:
                if (!m.censored || mode == CensoringMode::include_censored)
                    out.push_back(static_cast<double>(m.t_dom));
                break;
            case MetricId::s_max:
                out.push_back(static_cast<double>(m.s_max));
                break;
        }
    }
    return out;
}

}  // namespace miaudit
