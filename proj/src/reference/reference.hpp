#pragma once

// Serial, direct-from-definition reference implementations. These are the
// oracles the test suites compare the production kernels against and the
// baseline the benchmark target measures speedups over. They intentionally
// share no computation code with the main library.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miaudit/corpus.hpp"
#include "miaudit/stats.hpp"
#include "miaudit/tsni.hpp"

namespace miaudit::reference {

struct NaiveMetrics {
    double sustain_delta = 0.0;
    double temporal_score = 0.0;
    double ew_delta = 0.0;
    long t_dom = 0;
    bool censored = false;
    double t_norm = 0.0;
    long s_max = 0;
};

/// All sequence metrics recomputed literally from their definitions.
NaiveMetrics naive_metrics(const std::vector<TalkType>& turns);

double naive_per_turn(const std::vector<std::optional<Behavior>>& behaviors);

/// P(score of a positive > score of a negative), ties counted half;
/// quadratic pairwise scan.
double naive_auc(std::span<const double> scores, std::span<const int> labels);

/// F1 of the rule "flag when value < threshold" against labels (1 = low).
double naive_f1(std::span<const double> values, std::span<const int> labels,
                double threshold);

/// Serial percentile bootstrap identical in contract to the parallel one.
BootstrapCI naive_bootstrap_rate_ci(std::span<const std::uint8_t> flags,
                                    long resamples, std::uint64_t seed);

/// Straightforward serial scan for the first witness in canonical order.
std::optional<tsni::Witness> naive_find_witness(
    const tsni::TrajectorySpace& space, const tsni::CompressionFn& phi,
    const tsni::SafetyPredicate& safety);

}  // namespace miaudit::reference
