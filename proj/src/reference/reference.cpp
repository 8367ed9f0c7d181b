#include "reference.hpp"

#include <algorithm>
#include <map>

#include "miaudit/rng.hpp"

namespace miaudit::reference {

NaiveMetrics naive_metrics(const std::vector<TalkType>& turns) {
    NaiveMetrics out;
    const long n = static_cast<long>(turns.size());
    const long mid = n / 2;

    double c1 = 0, c2 = 0, s1 = 0, s2 = 0;
    for (long i = 0; i < n; ++i) {
        bool first_half = i < mid;
        if (turns[static_cast<std::size_t>(i)] == TalkType::change)
            (first_half ? c1 : c2) += 1.0;
        if (turns[static_cast<std::size_t>(i)] == TalkType::sustain)
            (first_half ? s1 : s2) += 1.0;
    }
    c1 /= static_cast<double>(mid);
    s1 /= static_cast<double>(mid);
    c2 /= static_cast<double>(n - mid);
    s2 /= static_cast<double>(n - mid);

    out.sustain_delta = s1 - s2;
    out.temporal_score = (c2 - c1) + (s1 - s2);
    out.ew_delta = c1 - s1;

    out.t_dom = n;
    out.censored = true;
    for (long end = 3; end <= n; ++end) {
        long sustains = 0;
        for (long i = end - 3; i < end; ++i)
            if (turns[static_cast<std::size_t>(i)] == TalkType::sustain)
                ++sustains;
        if (sustains >= 2) {
            out.t_dom = end;
            out.censored = false;
            break;
        }
    }
    out.t_norm = static_cast<double>(out.t_dom) / static_cast<double>(n);

    for (long i = 0; i < n; ++i) {
        long run = 0;
        for (long j = i; j < n; ++j) {
            if (turns[static_cast<std::size_t>(j)] != TalkType::sustain) break;
            ++run;
        }
        out.s_max = std::max(out.s_max, run);
    }
    return out;
}

double naive_per_turn(const std::vector<std::optional<Behavior>>& behaviors) {
    long qualifying = 0;
    for (const auto& b : behaviors)
        if (b && (*b == Behavior::reflection || *b == Behavior::question))
            ++qualifying;
    return static_cast<double>(qualifying) /
           static_cast<double>(behaviors.size());
}

double naive_auc(std::span<const double> scores, std::span<const int> labels) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

double naive_f1(std::span<const double> values, std::span<const int> labels,
                double threshold) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        bool flagged = values[i] < threshold;
        if (flagged && labels[i]) ++tp;
        if (flagged && !labels[i]) ++fp;
        if (!flagged && labels[i]) ++fn;
    }
    if (tp == 0) return 0.0;
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

BootstrapCI naive_bootstrap_rate_ci(std::span<const std::uint8_t> flags,
                                    long resamples, std::uint64_t seed) {
    const std::uint64_t n = flags.size();
    std::vector<double> rates;
    rates.reserve(static_cast<std::size_t>(resamples));
    for (long i = 0; i < resamples; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        long hits = 0;
        for (std::uint64_t k = 0; k < n; ++k) hits += flags[rng.bounded(n)];
        rates.push_back(static_cast<double>(hits) / static_cast<double>(n));
    }
    long total = 0;
    for (std::uint8_t f : flags) total += f;
    BootstrapCI ci;
    ci.point = static_cast<double>(total) / static_cast<double>(n);
    ci.lo = percentile(rates, 0.025);
    ci.hi = percentile(rates, 0.975);
    ci.resamples = resamples;
    ci.seed = seed;
    return ci;
}

std::optional<tsni::Witness> naive_find_witness(
    const tsni::TrajectorySpace& space, const tsni::CompressionFn& phi,
    const tsni::SafetyPredicate& safety) {
    // first-seen trajectory per (compressed value, status)
    std::map<std::string, std::map<int, std::uint64_t>> seen;
    for (std::uint64_t i = 0; i < space.size(); ++i) {
        tsni::Trajectory t = space.at(i);
        std::string value = phi.eval(t);
        int status = safety.eval(t);
        auto& bucket = seen[value];
        for (const auto& [other_status, other_index] : bucket) {
            if (other_status == status) continue;
            tsni::Witness w;
            w.index_tau = other_index;
            w.index_tau_prime = i;
            w.tau = space.at(other_index);
            w.tau_prime = t;
            w.compressed_value = value;
            w.status_tau = other_status;
            w.status_tau_prime = status;
            return w;
        }
        bucket.try_emplace(status, i);
    }
    return std::nullopt;
}

}  // namespace miaudit::reference
