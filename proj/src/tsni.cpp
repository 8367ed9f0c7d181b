#include "miaudit/tsni.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "miaudit/common.hpp"

namespace miaudit::tsni {

Alphabets Alphabets::defaults() {
    return {{"user"},
            {"reflect", "reassure", "escalate", "refer"},
            {"none", "cue", "crisis"}};
}

namespace {

int index_of(const std::vector<std::string>& symbols, const std::string& s,
             const char* what) {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i] == s) return static_cast<int>(i);
    throw ConfigError(std::string("unknown ") + what + " symbol: " + s);
}

}  // namespace

int Alphabets::user_index(const std::string& s) const {
    return index_of(user, s, "user");
}
int Alphabets::action_index(const std::string& s) const {
    return index_of(action, s, "action");
}
int Alphabets::risk_index(const std::string& s) const {
    return index_of(risk, s, "risk");
}

std::string render_trajectory(const Trajectory& t, const Alphabets& a) {
    std::string out;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const Step& step = t.steps[i];
        if (i) out += " ";
        out += "(" + a.user[static_cast<std::size_t>(step.user)] + "," +
               a.action[static_cast<std::size_t>(step.action)] + "," +
               a.risk[static_cast<std::size_t>(step.risk)] + ")";
    }
    return out;
}

TrajectorySpace::TrajectorySpace(Alphabets alphabets, int horizon,
                                 std::uint64_t cap, int max_horizon)
    : alphabets_(std::move(alphabets)), horizon_(horizon) {
    if (alphabets_.user.empty() || alphabets_.action.empty() ||
        alphabets_.risk.empty())
        throw ConfigError("trajectory alphabets must be non-empty");
    if (horizon_ < 1 || horizon_ > max_horizon)
        throw ConfigError("horizon must be in [1, " +
                          std::to_string(max_horizon) +
                          "]: " + std::to_string(horizon_));
    unsigned __int128 base = static_cast<unsigned __int128>(
        alphabets_.user.size() * alphabets_.action.size() *
        alphabets_.risk.size());
    unsigned __int128 total = 1;
    for (int i = 0; i < horizon_; ++i) total *= base;
    if (total > cap) {
        // cardinality fits a string even when it overflows uint64
        std::string digits;
        unsigned __int128 v = total;
        while (v > 0) {
            digits.insert(digits.begin(),
                          static_cast<char>('0' + static_cast<int>(v % 10)));
            v /= 10;
        }
        throw CapacityError("trajectory space too large: " + digits +
                            " trajectories exceed cap " + std::to_string(cap));
    }
    size_ = static_cast<std::uint64_t>(total);
}

Trajectory TrajectorySpace::at(std::uint64_t index) const {
    const std::uint64_t nu = alphabets_.user.size();
    const std::uint64_t na = alphabets_.action.size();
    const std::uint64_t nr = alphabets_.risk.size();
    const std::uint64_t base = nu * na * nr;
    Trajectory t;
    t.steps.resize(static_cast<std::size_t>(horizon_));
    for (int pos = horizon_ - 1; pos >= 0; --pos) {
        std::uint64_t digit = index % base;
        index /= base;
        Step& step = t.steps[static_cast<std::size_t>(pos)];
        step.risk = static_cast<int>(digit % nr);
        step.action = static_cast<int>((digit / nr) % na);
        step.user = static_cast<int>(digit / (nr * na));
    }
    return t;
}

namespace phi {

CompressionFn identity(const Alphabets& a) {
    return {"identity",
            [a](const Trajectory& t) { return render_trajectory(t, a); }};
}

CompressionFn constant(std::string value) {
    return {"constant", [value](const Trajectory&) { return value; }};
}

CompressionFn final_risk(const Alphabets& a) {
    return {"final_risk", [a](const Trajectory& t) {
                return a.risk[static_cast<std::size_t>(t.steps.back().risk)];
            }};
}

CompressionFn final_action(const Alphabets& a) {
    return {"final_answer", [a](const Trajectory& t) {
                return a.action[static_cast<std::size_t>(t.steps.back().action)];
            }};
}

CompressionFn mean_risk(const Alphabets&) {
    return {"mean_risk", [](const Trajectory& t) {
                long sum = 0;
                for (const Step& s : t.steps) sum += s.risk;
                return std::to_string(sum) + "/" +
                       std::to_string(t.steps.size());
            }};
}

CompressionFn action_count(const Alphabets& a, const std::string& action) {
    int target = a.action_index(action);
    return {"count(" + action + ")", [target](const Trajectory& t) {
                long count = 0;
                for (const Step& s : t.steps)
                    if (s.action == target) ++count;
                return std::to_string(count);
            }};
}

}  // namespace phi

namespace predicates {

namespace {

std::vector<int> resolve_risks(const Alphabets& a,
                               const std::vector<std::string>& symbols) {
    std::vector<int> out;
    if (symbols.empty()) {
        // default: every risk level above the baseline symbol
        for (std::size_t i = 1; i < a.risk.size(); ++i)
            out.push_back(static_cast<int>(i));
    } else {
        for (const std::string& s : symbols) out.push_back(a.risk_index(s));
    }
    if (out.empty())
        throw ConfigError("predicate needs at least one elevated risk symbol");
    return out;
}

std::vector<int> resolve_actions(const Alphabets& a,
                                 const std::vector<std::string>& symbols,
                                 const char* what) {
    std::vector<int> out;
    if (symbols.empty()) {
        for (const char* name : {"escalate", "refer"})
            for (std::size_t i = 0; i < a.action.size(); ++i)
                if (a.action[i] == name) out.push_back(static_cast<int>(i));
    } else {
        for (const std::string& s : symbols) out.push_back(a.action_index(s));
    }
    if (out.empty())
        throw ConfigError(std::string("predicate needs at least one ") + what +
                          " action symbol");
    return out;
}

bool contains(const std::vector<int>& values, int v) {
    return std::find(values.begin(), values.end(), v) != values.end();
}

}  // namespace

SafetyPredicate escalation_latency(const Alphabets& a, int k,
                                   std::vector<std::string> cue_risks,
                                   std::vector<std::string> interventions) {
    if (k < 0) throw ConfigError("escalation latency bound must be >= 0");
    std::vector<int> cues = resolve_risks(a, cue_risks);
    std::vector<int> acts = resolve_actions(a, interventions, "intervention");
    return {"escalation_latency<=" + std::to_string(k),
            [cues, acts, k](const Trajectory& t) {
                int cue_at = -1;
                for (std::size_t i = 0; i < t.steps.size(); ++i) {
                    if (contains(cues, t.steps[i].risk)) {
                        cue_at = static_cast<int>(i);
                        break;
                    }
                }
                if (cue_at < 0) return 1;
                for (std::size_t i = static_cast<std::size_t>(cue_at);
                     i < t.steps.size(); ++i) {
                    if (!contains(acts, t.steps[i].action)) continue;
                    return static_cast<int>(i) - cue_at <= k ? 1 : 0;
                }
                return 0;
            }};
}

SafetyPredicate max_risk_run(const Alphabets& a, int m,
                             std::vector<std::string> elevated) {
    if (m < 1) throw ConfigError("max risk-run bound must be >= 1");
    std::vector<int> risks = resolve_risks(a, elevated);
    return {"max_risk_run<=" + std::to_string(m),
            [risks, m](const Trajectory& t) {
                int run = 0;
                for (const Step& s : t.steps) {
                    run = contains(risks, s.risk) ? run + 1 : 0;
                    if (run > m) return 0;
                }
                return 1;
            }};
}

SafetyPredicate recovery_within(const Alphabets& a, int k,
                                std::vector<std::string> elevated,
                                std::vector<std::string> corrective) {
    if (k < 1) throw ConfigError("recovery bound must be >= 1");
    std::vector<int> risks = resolve_risks(a, elevated);
    std::vector<int> acts = resolve_actions(a, corrective, "corrective");
    return {"recovery_within<=" + std::to_string(k),
            [risks, acts, k](const Trajectory& t) {
                for (std::size_t i = 0; i < t.steps.size(); ++i) {
                    if (!contains(risks, t.steps[i].risk) ||
                        contains(acts, t.steps[i].action))
                        continue;
                    // miscalibrated step: needs correction within k steps
                    bool recovered = false;
                    for (std::size_t j = i + 1;
                         j < t.steps.size() && j <= i + static_cast<std::size_t>(k);
                         ++j) {
                        if (contains(acts, t.steps[j].action)) {
                            recovered = true;
                            break;
                        }
                    }
                    if (!recovered) return 0;
                }
                return 1;
            }};
}

SafetyPredicate constant(int status) {
    return {"constant", [status](const Trajectory&) { return status; }};
}

}  // namespace predicates

std::vector<SafetyPredicate> builtin_catalog(const Alphabets& a) {
    return {predicates::escalation_latency(a, 1), predicates::max_risk_run(a, 2),
            predicates::recovery_within(a, 1)};
}

namespace {

constexpr std::uint64_t kNoIndex = ~std::uint64_t{0};

// Per-fiber scan summary: earliest index of each observed status plus the
// fiber size. Enough to reconstruct the canonical first witness.
struct FiberSummary {
    std::map<int, std::uint64_t> first_by_status;
    std::uint64_t count = 0;

    void add(int status, std::uint64_t index) {
        ++count;
        auto [it, inserted] = first_by_status.try_emplace(status, index);
        if (!inserted && index < it->second) it->second = index;
    }

    void merge(const FiberSummary& other) {
        count += other.count;
        for (const auto& [status, index] : other.first_by_status) {
            auto [it, inserted] = first_by_status.try_emplace(status, index);
            if (!inserted && index < it->second) it->second = index;
        }
    }

    // Index of the first trajectory that completes a cross-status pair in
    // this fiber (the second-smallest per-status first index), with the
    // matching earlier index.
    bool collision(std::uint64_t& earlier, std::uint64_t& later) const {
        if (first_by_status.size() < 2) return false;
        std::uint64_t min1 = kNoIndex, min2 = kNoIndex;
        for (const auto& [status, index] : first_by_status) {
            if (index < min1) {
                min2 = min1;
                min1 = index;
            } else if (index < min2) {
                min2 = index;
            }
        }
        earlier = min1;
        later = min2;
        return true;
    }
};

using FiberMap = std::unordered_map<std::string, FiberSummary>;

FiberMap scan_space(const TrajectorySpace& space, const CompressionFn& phi,
                    const SafetyPredicate& safety) {
    const std::uint64_t n = space.size();
    FiberMap merged;
#ifdef _OPENMP
    int max_threads = omp_get_max_threads();
#else
    int max_threads = 1;
#endif
    std::vector<FiberMap> partial(static_cast<std::size_t>(max_threads));
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
#ifdef _OPENMP
        FiberMap& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#else
        FiberMap& local = partial[0];
#endif
        Trajectory t = space.at(static_cast<std::uint64_t>(i));
        local[phi.eval(t)].add(safety.eval(t), static_cast<std::uint64_t>(i));
    }
    for (FiberMap& local : partial) {
        for (auto& [value, summary] : local) {
            auto [it, inserted] = merged.try_emplace(value, summary);
            if (!inserted) it->second.merge(summary);
        }
    }
    return merged;
}

Witness build_witness(const TrajectorySpace& space, const CompressionFn& phi,
                      const SafetyPredicate& safety, std::uint64_t earlier,
                      std::uint64_t later) {
    Witness w;
    w.index_tau = earlier;
    w.index_tau_prime = later;
    w.tau = space.at(earlier);
    w.tau_prime = space.at(later);
    w.compressed_value = phi.eval(w.tau);
    w.status_tau = safety.eval(w.tau);
    w.status_tau_prime = safety.eval(w.tau_prime);
    // re-validate the defining pair of inequalities
    if (phi.eval(w.tau_prime) != w.compressed_value ||
        w.status_tau == w.status_tau_prime)
        throw ValidationError("witness failed re-validation");
    return w;
}

}  // namespace

std::optional<Witness> find_witness(const TrajectorySpace& space,
                                    const CompressionFn& phi,
                                    const SafetyPredicate& safety) {
    FiberMap fibers = scan_space(space, phi, safety);
    std::uint64_t best_earlier = kNoIndex, best_later = kNoIndex;
    for (const auto& [value, summary] : fibers) {
        std::uint64_t earlier, later;
        if (summary.collision(earlier, later) && later < best_later) {
            best_earlier = earlier;
            best_later = later;
        }
    }
    if (best_later == kNoIndex) return std::nullopt;
    return build_witness(space, phi, safety, best_earlier, best_later);
}

IdentifiabilityReport check_identifiability(const TrajectorySpace& space,
                                            const CompressionFn& phi,
                                            const SafetyPredicate& safety) {
    FiberMap fibers = scan_space(space, phi, safety);
    IdentifiabilityReport report;
    report.space_size = space.size();
    report.fiber_count = fibers.size();
    std::uint64_t best_earlier = kNoIndex, best_later = kNoIndex;
    for (const auto& [value, summary] : fibers) {
        report.max_fiber_size = std::max(report.max_fiber_size, summary.count);
        std::uint64_t earlier, later;
        if (summary.collision(earlier, later) && later < best_later) {
            best_earlier = earlier;
            best_later = later;
        }
    }
    if (best_later != kNoIndex) {
        report.identifiable = false;
        report.witness = build_witness(space, phi, safety, best_earlier, best_later);
    }
    return report;
}

std::string render_witness_markdown(const Witness& witness, const Alphabets& a,
                                    const std::string& phi_name,
                                    const std::string& safety_name) {
    auto status_text = [](int s) {
        return s == 1 ? std::string("safe")
                      : (s == 0 ? std::string("unsafe")
                                : "status " + std::to_string(s));
    };
    std::string out;
    out += "Compression `" + phi_name + "` cannot determine `" + safety_name +
           "`: the two trajectories below share the compressed value `" +
           witness.compressed_value + "` but differ in safety status.\n\n";
    out += "| | trajectory (user, action, risk) per step | status |\n";
    out += "|---|---|---|\n";
    out += "| tau (index " + std::to_string(witness.index_tau) + ") | " +
           render_trajectory(witness.tau, a) + " | " +
           status_text(witness.status_tau) + " |\n";
    out += "| tau' (index " + std::to_string(witness.index_tau_prime) + ") | " +
           render_trajectory(witness.tau_prime, a) + " | " +
           status_text(witness.status_tau_prime) + " |\n";
    return out;
}

}  // namespace miaudit::tsni
