#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "miaudit/corpus.hpp"

namespace miaudit::tsni {

/// Finite symbol alphabets for the three step components: user state,
/// system action, risk level. Risk index 0 is the baseline ("no risk")
/// symbol for the builtin predicates.
struct Alphabets {
    std::vector<std::string> user;
    std::vector<std::string> action;
    std::vector<std::string> risk;

    static Alphabets defaults();  // user {user}; action {reflect, reassure,
                                  // escalate, refer}; risk {none, cue, crisis}
    int user_index(const std::string& symbol) const;
    int action_index(const std::string& symbol) const;
    int risk_index(const std::string& symbol) const;
};

struct Step {
    int user = 0;
    int action = 0;
    int risk = 0;
};

/// An interaction trajectory over a fixed horizon. History at step t is the
/// prefix steps[0..t-1].
struct Trajectory {
    std::vector<Step> steps;
};

std::string render_trajectory(const Trajectory& t, const Alphabets& a);

inline constexpr std::uint64_t kDefaultCap = 10'000'000;
inline constexpr int kDefaultMaxHorizon = 6;

/// The full trajectory space over the given alphabets and horizon.
/// Enumeration order is canonical: trajectories are mixed-radix numbers
/// with step 1 most significant; within a step, (user, action, risk) with
/// each component ordered by alphabet index. Construction throws
/// ConfigError for an invalid horizon and CapacityError (reporting the
/// cardinality) when the space exceeds the cap.
class TrajectorySpace {
  public:
    TrajectorySpace(Alphabets alphabets, int horizon,
                    std::uint64_t cap = kDefaultCap,
                    int max_horizon = kDefaultMaxHorizon);

    std::uint64_t size() const { return size_; }
    int horizon() const { return horizon_; }
    const Alphabets& alphabets() const { return alphabets_; }

    /// Decodes the trajectory at a canonical-order index.
    Trajectory at(std::uint64_t index) const;

  private:
    Alphabets alphabets_;
    int horizon_;
    std::uint64_t size_;
};

/// Total deterministic mapping from trajectories to a finite codomain,
/// encoded as strings for uniform bucketing.
struct CompressionFn {
    std::string name;
    std::function<std::string(const Trajectory&)> eval;
};

/// Total deterministic safety status; builtins return 1 = safe, 0 = unsafe.
struct SafetyPredicate {
    std::string name;
    std::function<int(const Trajectory&)> eval;
};

namespace phi {

CompressionFn identity(const Alphabets& a);
CompressionFn constant(std::string value = "z");
CompressionFn final_risk(const Alphabets& a);
CompressionFn final_action(const Alphabets& a);
/// Mean risk level as an exact rational "sum/H" over risk indices.
CompressionFn mean_risk(const Alphabets& a);
/// Number of steps whose action equals the given symbol.
CompressionFn action_count(const Alphabets& a, const std::string& action);

}  // namespace phi

namespace predicates {

/// Safe iff no risk cue occurs, or an intervention action occurs at most k
/// steps after the first cue. Defaults: cues = every risk symbol except
/// index 0; interventions = {escalate, refer} restricted to the alphabet.
/// k must be >= 0.
SafetyPredicate escalation_latency(const Alphabets& a, int k,
                                   std::vector<std::string> cue_risks = {},
                                   std::vector<std::string> interventions = {});

/// Safe iff every run of consecutive elevated-risk steps has length <= m.
/// m must be >= 1.
SafetyPredicate max_risk_run(const Alphabets& a, int m,
                             std::vector<std::string> elevated = {});

/// A step is miscalibrated when its risk is elevated and its action is not
/// corrective; safe iff every miscalibrated step is followed by a
/// corrective action within k steps. k must be >= 1.
SafetyPredicate recovery_within(const Alphabets& a, int k,
                                std::vector<std::string> elevated = {},
                                std::vector<std::string> corrective = {});

SafetyPredicate constant(int status);

}  // namespace predicates

/// The builtin predicate catalog instantiated with default parameters
/// (latency k=1, max run m=2, recovery k=1).
std::vector<SafetyPredicate> builtin_catalog(const Alphabets& a);

/// Two trajectories with equal compressed value and different safety
/// status. Re-validated on construction.
struct Witness {
    std::uint64_t index_tau = 0;
    std::uint64_t index_tau_prime = 0;
    Trajectory tau;
    Trajectory tau_prime;
    std::string compressed_value;
    int status_tau = 0;
    int status_tau_prime = 0;
};

/// First witness pair in canonical order: tau_prime is the earliest
/// trajectory whose phi-bucket already holds an earlier trajectory of a
/// different status, and tau is the earliest such earlier trajectory.
/// Returns nullopt when the predicate is constant on every phi-fiber.
std::optional<Witness> find_witness(const TrajectorySpace& space,
                                    const CompressionFn& phi,
                                    const SafetyPredicate& safety);

struct IdentifiabilityReport {
    bool identifiable = true;
    std::uint64_t space_size = 0;
    std::uint64_t fiber_count = 0;
    std::uint64_t max_fiber_size = 0;
    std::optional<Witness> witness;
};

IdentifiabilityReport check_identifiability(const TrajectorySpace& space,
                                            const CompressionFn& phi,
                                            const SafetyPredicate& safety);

/// Side-by-side human-readable rendering of a witness.
std::string render_witness_markdown(const Witness& witness, const Alphabets& a,
                                    const std::string& phi_name,
                                    const std::string& safety_name);

}  // namespace miaudit::tsni
