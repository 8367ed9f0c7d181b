#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "miaudit/common.hpp"
#include "miaudit/corpus.hpp"
#include "miaudit/metrics.hpp"
#include "miaudit/rng.hpp"
#include "reference/reference.hpp"

using namespace miaudit;

namespace {

// decode index into a base-3 talk-type sequence of the given length
std::vector<TalkType> sequence_at(long index, int length) {
    std::vector<TalkType> out(static_cast<std::size_t>(length));
    for (int i = length - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<TalkType>(index % 3);
        index /= 3;
    }
    return out;
}

long pow3(int n) {
    long v = 1;
    while (n--) v *= 3;
    return v;
}

Conversation conv_from(const std::vector<TalkType>& types,
                       const std::vector<Behavior>& behaviors) {
    Conversation conv;
    conv.id = "test";
    long order = 0;
    for (Behavior b : behaviors) {
        conv.utterances.push_back({conv.id, order, Speaker::therapist, b,
                                   std::nullopt, ""});
        conv.therapist_turns.push_back({order, b});
        ++order;
    }
    for (TalkType t : types) {
        conv.utterances.push_back({conv.id, order, Speaker::client,
                                   std::nullopt, t, ""});
        conv.labeled_client.push_back({order, t});
        ++order;
    }
    return conv;
}

constexpr TalkType C = TalkType::change;
constexpr TalkType N = TalkType::neutral;
constexpr TalkType S = TalkType::sustain;

}  // namespace

TEST_CASE("brute-force oracle equivalence on all sequences of length <= 8") {
    for (int n = 2; n <= 8; ++n) {
        for (long idx = 0; idx < pow3(n); ++idx) {
            std::vector<TalkType> seq = sequence_at(idx, n);
            auto naive = reference::naive_metrics(seq);
            CHECK(sustain_delta(seq) == doctest::Approx(naive.sustain_delta).epsilon(1e-12));
            CHECK(temporal_score(seq) == doctest::Approx(naive.temporal_score).epsilon(1e-12));
            CHECK(early_warning_score(seq) == doctest::Approx(naive.ew_delta).epsilon(1e-12));
            auto dom = first_sustain_dominance(seq);
            CHECK(dom.t_dom == naive.t_dom);
            CHECK(dom.censored == naive.censored);
            CHECK(max_sustain_streak(seq) == naive.s_max);
        }
    }
}

TEST_CASE("bounds hold on every sequence of length <= 8") {
    for (int n = 2; n <= 8; ++n) {
        for (long idx = 0; idx < pow3(n); ++idx) {
            std::vector<TalkType> seq = sequence_at(idx, n);
            HalfRatios h = half_ratios(seq);
            double delta = h.s1 - h.s2;
            double temp = (h.c2 - h.c1) + delta;
            double ew = h.c1 - h.s1;
            CHECK(delta >= -1.0);
            CHECK(delta <= 1.0);
            CHECK(temp >= -2.0);
            CHECK(temp <= 2.0);
            CHECK(ew >= -1.0);
            CHECK(ew <= 1.0);
            auto dom = first_sustain_dominance(seq);
            CHECK(dom.t_dom >= 1);
            CHECK(dom.t_dom <= n);
            double t_norm = static_cast<double>(dom.t_dom) / n;
            CHECK(t_norm > 0.0);
            CHECK(t_norm <= 1.0);
            if (dom.censored) CHECK(dom.t_dom == n);
            CHECK(max_sustain_streak(seq) <= n);
        }
    }
}

TEST_CASE("reversal antisymmetry on all even-length sequences <= 8") {
    for (int n : {2, 4, 6, 8}) {
        for (long idx = 0; idx < pow3(n); ++idx) {
            std::vector<TalkType> seq = sequence_at(idx, n);
            std::vector<TalkType> rev(seq.rbegin(), seq.rend());
            CHECK(sustain_delta(rev) ==
                  doctest::Approx(-sustain_delta(seq)).epsilon(1e-12));
            CHECK(temporal_score(rev) ==
                  doctest::Approx(-temporal_score(seq)).epsilon(1e-12));
        }
    }
}

TEST_CASE("within-half permutation invariance for ratio metrics only") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 4 + static_cast<int>(rng.bounded(5));
        std::vector<TalkType> seq(static_cast<std::size_t>(n));
        for (auto& t : seq) t = static_cast<TalkType>(rng.bounded(3));
        std::vector<TalkType> shuffled = seq;
        auto mid = shuffled.begin() + n / 2;
        for (auto it = shuffled.begin(); it != mid; ++it)
            std::iter_swap(it, shuffled.begin() + static_cast<long>(rng.bounded(
                                    static_cast<std::uint64_t>(n / 2))));
        for (auto it = mid; it != shuffled.end(); ++it)
            std::iter_swap(it, mid + static_cast<long>(rng.bounded(
                                    static_cast<std::uint64_t>(n - n / 2))));
        CHECK(sustain_delta(shuffled) == doctest::Approx(sustain_delta(seq)));
        CHECK(temporal_score(shuffled) == doctest::Approx(temporal_score(seq)));
        CHECK(early_warning_score(shuffled) ==
              doctest::Approx(early_warning_score(seq)));
    }
    // T_dom and S_max are order-sensitive by design: same per-half
    // multisets, different values
    std::vector<TalkType> a{S, N, N, S};
    std::vector<TalkType> b{N, S, S, N};
    CHECK(first_sustain_dominance(a).censored);
    CHECK(first_sustain_dominance(a).t_dom == 4);
    CHECK(first_sustain_dominance(b).t_dom == 3);
    CHECK(max_sustain_streak(a) == 1);
    CHECK(max_sustain_streak(b) == 2);
}

TEST_CASE("first_sustain_dominance examples") {
    CHECK(first_sustain_dominance(std::vector<TalkType>{S, S, S, S}).t_dom == 3);
    CHECK_FALSE(first_sustain_dominance(std::vector<TalkType>{S, S, S, S}).censored);
    auto censored = first_sustain_dominance(
        std::vector<TalkType>(10, TalkType::neutral));
    CHECK(censored.t_dom == 10);
    CHECK(censored.censored);
    auto late = first_sustain_dominance(std::vector<TalkType>{S, N, S, S});
    CHECK(late.t_dom == 3);  // window (1-3) holds two sustains
    CHECK_FALSE(late.censored);
}

TEST_CASE("max_sustain_streak examples") {
    CHECK(max_sustain_streak(std::vector<TalkType>{C, N, C, N}) == 0);
    CHECK(max_sustain_streak(std::vector<TalkType>(5, TalkType::sustain)) == 5);
    CHECK(max_sustain_streak(std::vector<TalkType>{S, S, N, S, S, S}) == 3);
}

TEST_CASE("sustain_delta and temporal_score examples") {
    // all-neutral
    CHECK(sustain_delta(std::vector<TalkType>(6, N)) == doctest::Approx(0.0));
    CHECK(temporal_score(std::vector<TalkType>(6, N)) == doctest::Approx(0.0));
    // halves [sustain, sustain] / [neutral, neutral] -> +1.0
    CHECK(sustain_delta(std::vector<TalkType>{S, S, N, N}) ==
          doctest::Approx(1.0));
    // c1=0, c2=0.5, s1=0.5, s2=0 -> temporal 1.0
    CHECK(temporal_score(std::vector<TalkType>{S, N, C, N}) ==
          doctest::Approx(1.0));
}

TEST_CASE("early_warning_score examples") {
    CHECK(early_warning_score(std::vector<TalkType>{S, S, N, N}) ==
          doctest::Approx(-1.0));
    // first half [change, change, sustain, neutral] -> 0.5 - 0.25
    std::vector<TalkType> seq{C, C, S, N, N, N, N, N};
    CHECK(early_warning_score(seq) == doctest::Approx(0.25));
}

TEST_CASE("per_turn_score examples and error") {
    auto conv = conv_from({N, N, N, N}, {Behavior::reflection,
                                         Behavior::question,
                                         Behavior::reflection});
    CHECK(per_turn_score(conv) == doctest::Approx(1.0));
    auto half = conv_from({N, N, N, N},
                          {Behavior::reflection, Behavior::other,
                           Behavior::question, Behavior::other});
    CHECK(per_turn_score(half) == doctest::Approx(0.5));
    auto none = conv_from({N, N, N, N}, {});
    CHECK_THROWS_AS(per_turn_score(none), ValidationError);
    // unlabeled behavior counts in the denominator only
    Conversation unl = conv_from({N, N, N, N}, {Behavior::reflection});
    unl.therapist_turns.push_back({100, std::nullopt});
    CHECK(per_turn_score(unl) == doctest::Approx(0.5));
}

TEST_CASE("evaluate enforces the inclusion rule") {
    auto small = conv_from({N, N, N}, {Behavior::question});
    CHECK_THROWS_AS(evaluate(small), ValidationError);
    CHECK_THROWS_AS(case_trace(small), ValidationError);
}

TEST_CASE("evaluate satisfies the algebraic invariants") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 4 + static_cast<int>(rng.bounded(10));
        std::vector<TalkType> types(static_cast<std::size_t>(n));
        for (auto& t : types) t = static_cast<TalkType>(rng.bounded(3));
        auto conv = conv_from(types, {Behavior::question, Behavior::other});
        MetricVector m = evaluate(conv);
        CHECK(m.temporal_score ==
              doctest::Approx((m.halves.c2 - m.halves.c1) +
                              (m.halves.s1 - m.halves.s2)).epsilon(1e-12));
        CHECK(m.sustain_delta ==
              doctest::Approx(m.halves.s1 - m.halves.s2).epsilon(1e-12));
        CHECK(m.t_norm ==
              doctest::Approx(static_cast<double>(m.t_dom) / m.n_labeled));
        if (m.censored) CHECK(m.t_dom == m.n_labeled);
        CHECK(m.s_max <= m.n_labeled);
    }
}

TEST_CASE("case_trace diagnostics") {
    auto conv = conv_from({N, S, C, C, S}, {Behavior::question});
    CaseTrace trace = case_trace(conv);
    REQUIRE(trace.sustain_runs.size() == 2);
    CHECK(trace.sustain_runs[0].start == 2);
    CHECK(trace.sustain_runs[0].length == 1);
    CHECK(trace.sustain_runs[1].start == 5);
    CHECK(trace.sustain_runs[1].length == 1);
    CHECK(trace.longest_neutral_run == 1);
    CHECK(trace.change_count_first == 0);
    CHECK(trace.change_count_second == 2);
    CHECK(trace.backslide_index == doctest::Approx(-2.0 / 3.0));

    // all-neutral n=6
    CaseTrace neutral = case_trace(conv_from(std::vector<TalkType>(6, N),
                                             {Behavior::question}));
    CHECK(neutral.longest_neutral_run == 6);
    CHECK(neutral.backslide_index == doctest::Approx(0.0));
    CHECK(neutral.sustain_runs.empty());

    // max sustain run equals s_max
    auto conv2 = conv_from({S, S, N, S, S, S}, {Behavior::question});
    CaseTrace t2 = case_trace(conv2);
    long longest = 0;
    for (const SustainRun& run : t2.sustain_runs)
        longest = std::max(longest, run.length);
    CHECK(longest == evaluate(conv2).s_max);
    // change counts by half sum to the total
    CHECK(t2.change_count_first + t2.change_count_second == 0);
}

TEST_CASE("case_trace invariants on random sequences") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 4 + static_cast<int>(rng.bounded(12));
        std::vector<TalkType> types(static_cast<std::size_t>(n));
        for (auto& t : types) t = static_cast<TalkType>(rng.bounded(3));
        auto conv = conv_from(types, {Behavior::question});
        CaseTrace trace = case_trace(conv);
        MetricVector m = evaluate(conv);
        long longest = 0, total_changes = 0;
        for (const SustainRun& run : trace.sustain_runs)
            longest = std::max(longest, run.length);
        CHECK(longest == m.s_max);
        for (TalkType t : types)
            if (t == TalkType::change) ++total_changes;
        CHECK(trace.change_count_first + trace.change_count_second ==
              total_changes);
        CHECK(trace.backslide_index ==
              doctest::Approx(m.halves.c1 - m.halves.c2));
    }
}

TEST_CASE("metric_sample censoring modes") {
    auto censored_conv = conv_from({N, N, N, N}, {Behavior::question});
    auto event_conv = conv_from({S, S, N, N}, {Behavior::question});
    std::vector<MetricVector> vectors{evaluate(censored_conv),
                                      evaluate(event_conv)};
    auto include =
        metric_sample(vectors, MetricId::t_dom, CensoringMode::include_censored);
    auto events =
        metric_sample(vectors, MetricId::t_dom, CensoringMode::events_only);
    CHECK(include.size() == 2);
    CHECK(events.size() == 1);
    CHECK(events[0] == doctest::Approx(3.0));
    // non-timing metrics ignore the mode
    CHECK(metric_sample(vectors, MetricId::s_max, CensoringMode::events_only)
              .size() == 2);
}

TEST_CASE("annomi conversation 27 mechanism" *
          doctest::description("runs only when ANNOMI_CSV is set")) {
    const char* path = std::getenv("ANNOMI_CSV");
    if (!path || !*path) {
        MESSAGE("ANNOMI_CSV not set; skipping conversation 27 check");
        return;
    }
    Corpus corpus = ingest_file(path);
    const Conversation* conv = corpus.find_included("27");
    REQUIRE(conv);
    MetricVector m = evaluate(*conv);
    REQUIRE(m.per_turn);
    CHECK(*m.per_turn == doctest::Approx(0.083).epsilon(0.02));
    CHECK(m.sustain_delta == doctest::Approx(-0.667).epsilon(0.002));
    // change talk is absent, so the temporal score collapses to the delta
    CHECK(m.temporal_score == doctest::Approx(-0.667).epsilon(0.002));
    // the first half is entirely neutral, so the early warning score is 0
    CHECK(m.ew_delta == doctest::Approx(0.0));
    CHECK(m.s_max == 4);
}

TEST_CASE("evaluate_corpus matches per-conversation evaluate and reference") {
    Rng rng(17);
    Corpus corpus;
    for (int c = 0; c < 64; ++c) {
        int n = 4 + static_cast<int>(rng.bounded(12));
        std::vector<TalkType> types(static_cast<std::size_t>(n));
        for (auto& t : types) t = static_cast<TalkType>(rng.bounded(3));
        Conversation conv =
            conv_from(types, {static_cast<Behavior>(rng.bounded(4)),
                              static_cast<Behavior>(rng.bounded(4))});
        conv.id = std::to_string(c);
        conv.quality = rng.bounded(2) ? Quality::high : Quality::low;
        conv.ingest_order = static_cast<std::size_t>(c);
        corpus.included.push_back(std::move(conv));
    }
    auto vectors = evaluate_corpus(corpus);
    REQUIRE(vectors.size() == corpus.included.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const Conversation& conv = corpus.included[i];
        auto naive = reference::naive_metrics(conv.labeled_client_turns());
        CHECK(vectors[i].conversation_id == conv.id);
        CHECK(vectors[i].sustain_delta == doctest::Approx(naive.sustain_delta));
        CHECK(vectors[i].temporal_score == doctest::Approx(naive.temporal_score));
        CHECK(vectors[i].ew_delta == doctest::Approx(naive.ew_delta));
        CHECK(vectors[i].t_dom == naive.t_dom);
        CHECK(vectors[i].censored == naive.censored);
        CHECK(vectors[i].s_max == naive.s_max);
        std::vector<std::optional<Behavior>> behaviors;
        for (const auto& turn : conv.therapist_turns)
            behaviors.push_back(turn.behavior);
        CHECK(*vectors[i].per_turn ==
              doctest::Approx(reference::naive_per_turn(behaviors)));
    }
}
