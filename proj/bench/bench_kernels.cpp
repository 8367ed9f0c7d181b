// Compares the OpenMP kernels against the serial reference implementations.

#include <benchmark/benchmark.h>

#include "miaudit/corpus.hpp"
#include "miaudit/metrics.hpp"
#include "miaudit/rng.hpp"
#include "miaudit/stats.hpp"
#include "miaudit/tsni.hpp"
#include "reference/reference.hpp"

namespace {

using namespace miaudit;

Corpus synthetic_corpus(long conversations, long turns, std::uint64_t seed) {
    Corpus corpus;
    Rng rng(seed);
    for (long c = 0; c < conversations; ++c) {
        Conversation conv;
        conv.id = std::to_string(c);
        conv.quality = rng.bounded(5) == 0 ? Quality::low : Quality::high;
        conv.ingest_order = static_cast<std::size_t>(c);
        for (long t = 0; t < turns; ++t) {
            Utterance utt;
            utt.conversation_id = conv.id;
            utt.order_index = t;
            if (t % 2 == 0) {
                utt.speaker = Speaker::therapist;
                utt.behavior = static_cast<Behavior>(rng.bounded(4));
                conv.therapist_turns.push_back({t, utt.behavior});
            } else {
                utt.speaker = Speaker::client;
                utt.talk_type = static_cast<TalkType>(rng.bounded(3));
                conv.labeled_client.push_back({t, *utt.talk_type});
            }
            conv.utterances.push_back(std::move(utt));
        }
        corpus.included.push_back(std::move(conv));
    }
    return corpus;
}

void bm_metrics_serial(benchmark::State& state) {
    Corpus corpus = synthetic_corpus(state.range(0), 120, 7);
    for (auto _ : state) {
        double acc = 0.0;
        for (const Conversation& conv : corpus.included) {
            auto naive = reference::naive_metrics(conv.labeled_client_turns());
            acc += naive.sustain_delta + naive.temporal_score +
                   static_cast<double>(naive.s_max);
        }
        benchmark::DoNotOptimize(acc);
    }
}

void bm_metrics_openmp(benchmark::State& state) {
    Corpus corpus = synthetic_corpus(state.range(0), 120, 7);
    for (auto _ : state) {
        auto vectors = evaluate_corpus(corpus);
        benchmark::DoNotOptimize(vectors.data());
    }
}

void bm_bootstrap_serial(benchmark::State& state) {
    std::vector<std::uint8_t> flags(110, 0);
    for (std::size_t i = 0; i < flags.size(); i += 8) flags[i] = 1;
    for (auto _ : state) {
        auto ci = reference::naive_bootstrap_rate_ci(flags, state.range(0), 42);
        benchmark::DoNotOptimize(ci.lo);
    }
}

void bm_bootstrap_openmp(benchmark::State& state) {
    std::vector<std::uint8_t> flags(110, 0);
    for (std::size_t i = 0; i < flags.size(); i += 8) flags[i] = 1;
    for (auto _ : state) {
        auto ci = bootstrap_rate_ci(flags, "rate", state.range(0), 42);
        benchmark::DoNotOptimize(ci.lo);
    }
}

void bm_tsni_scan_serial(benchmark::State& state) {
    tsni::Alphabets a = tsni::Alphabets::defaults();
    tsni::TrajectorySpace space(a, static_cast<int>(state.range(0)));
    auto phi = tsni::phi::mean_risk(a);
    auto safety = tsni::predicates::constant(1);
    for (auto _ : state) {
        auto witness = reference::naive_find_witness(space, phi, safety);
        benchmark::DoNotOptimize(witness.has_value());
    }
}

void bm_tsni_scan_openmp(benchmark::State& state) {
    tsni::Alphabets a = tsni::Alphabets::defaults();
    tsni::TrajectorySpace space(a, static_cast<int>(state.range(0)));
    auto phi = tsni::phi::mean_risk(a);
    auto safety = tsni::predicates::constant(1);
    for (auto _ : state) {
        auto result = tsni::check_identifiability(space, phi, safety);
        benchmark::DoNotOptimize(result.identifiable);
    }
}

BENCHMARK(bm_metrics_serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_metrics_openmp)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_bootstrap_serial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_bootstrap_openmp)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_tsni_scan_serial)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_tsni_scan_openmp)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
