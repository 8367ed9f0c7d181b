#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "miaudit/common.hpp"
#include "miaudit/rng.hpp"
#include "miaudit/tsni.hpp"
#include "reference/reference.hpp"

using namespace miaudit;
using namespace miaudit::tsni;

namespace {

// small demonstration space: trivial user alphabet, two actions, two risk
// levels
Alphabets tiny_alphabets() {
    return {{"u"}, {"respond", "escalate"}, {"0", "1"}};
}

}  // namespace

TEST_CASE("enumeration counts and bounds") {
    TrajectorySpace space(tiny_alphabets(), 2);
    CHECK(space.size() == 16);  // (1*2*2)^2

    CHECK_THROWS_AS(TrajectorySpace(tiny_alphabets(), 0), ConfigError);
    CHECK_THROWS_AS(TrajectorySpace(tiny_alphabets(), 7), ConfigError);
    try {
        TrajectorySpace too_big(tiny_alphabets(), 2, /*cap=*/10);
        FAIL("expected CapacityError");
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("16") != std::string::npos);
    }
}

TEST_CASE("canonical order: every trajectory exactly once, lexicographic") {
    TrajectorySpace space(tiny_alphabets(), 2);
    std::set<std::string> seen;
    auto id = phi::identity(space.alphabets());
    for (std::uint64_t i = 0; i < space.size(); ++i)
        seen.insert(id.eval(space.at(i)));
    CHECK(seen.size() == space.size());

    // index 0 is the all-first-symbol trajectory; the last component (risk)
    // varies fastest
    Trajectory first = space.at(0);
    CHECK(first.steps[0].action == 0);
    CHECK(first.steps[0].risk == 0);
    Trajectory second = space.at(1);
    CHECK(second.steps[0].risk == 0);
    CHECK(second.steps[1].risk == 1);
    CHECK(second.steps[1].action == 0);
}

TEST_CASE("builtin predicate boundaries") {
    Alphabets a = tiny_alphabets();
    auto latency0 = predicates::escalation_latency(a, 0, {}, {"escalate"});
    // escalation at the same step as the first cue
    Trajectory same_step{{{0, 1, 1}, {0, 0, 0}}};
    CHECK(latency0.eval(same_step) == 1);
    // escalation one step after the cue fails the k=0 bound
    Trajectory next_step{{{0, 0, 1}, {0, 1, 0}}};
    CHECK(latency0.eval(next_step) == 0);
    // no cue at all is safe
    Trajectory quiet{{{0, 0, 0}, {0, 0, 0}}};
    CHECK(latency0.eval(quiet) == 1);

    Alphabets defaults = Alphabets::defaults();
    auto run2 = predicates::max_risk_run(defaults, 2);
    auto risk = [&](const std::string& s) { return defaults.risk_index(s); };
    Trajectory three_cues{{{0, 0, risk("cue")}, {0, 0, risk("cue")},
                           {0, 0, risk("cue")}}};
    CHECK(run2.eval(three_cues) == 0);
    Trajectory two_cues{{{0, 0, risk("cue")}, {0, 0, risk("cue")},
                         {0, 0, risk("none")}}};
    CHECK(run2.eval(two_cues) == 1);

    // miscalibration with the corrective action two steps later misses k=1
    auto recovery = predicates::recovery_within(defaults, 1);
    int reflect = defaults.action_index("reflect");
    int escalate = defaults.action_index("escalate");
    Trajectory late_fix{{{0, reflect, risk("cue")},
                         {0, reflect, risk("none")},
                         {0, escalate, risk("none")}}};
    CHECK(recovery.eval(late_fix) == 0);
    Trajectory quick_fix{{{0, reflect, risk("cue")},
                          {0, escalate, risk("none")},
                          {0, reflect, risk("none")}}};
    CHECK(recovery.eval(quick_fix) == 1);

    CHECK_THROWS_AS(predicates::escalation_latency(a, -1), ConfigError);
    CHECK_THROWS_AS(predicates::max_risk_run(a, 0), ConfigError);
    CHECK_THROWS_AS(predicates::recovery_within(a, 0), ConfigError);
}

TEST_CASE("identity compression is identifiable for every catalog predicate") {
    Alphabets a = Alphabets::defaults();
    TrajectorySpace space(a, 3);
    for (const SafetyPredicate& predicate : builtin_catalog(a)) {
        IdentifiabilityReport report =
            check_identifiability(space, phi::identity(a), predicate);
        CHECK(report.identifiable);
        CHECK(report.max_fiber_size == 1);
        CHECK(report.fiber_count == space.size());
        CHECK_FALSE(find_witness(space, phi::identity(a), predicate));
    }
}

TEST_CASE("constant predicate admits no witness for any compression") {
    Alphabets a = Alphabets::defaults();
    TrajectorySpace space(a, 3);
    auto always_safe = predicates::constant(1);
    for (const CompressionFn& compression :
         {phi::constant(), phi::final_risk(a), phi::final_action(a),
          phi::mean_risk(a), phi::action_count(a, "escalate")}) {
        CHECK_FALSE(find_witness(space, compression, always_safe));
        CHECK(check_identifiability(space, compression, always_safe)
                  .identifiable);
    }
}

TEST_CASE("constant compression with non-constant predicate: one fiber") {
    Alphabets a = tiny_alphabets();
    TrajectorySpace space(a, 3);
    auto latency = predicates::escalation_latency(a, 1, {}, {"escalate"});
    IdentifiabilityReport report =
        check_identifiability(space, phi::constant(), latency);
    CHECK_FALSE(report.identifiable);
    CHECK(report.fiber_count == 1);
    CHECK(report.max_fiber_size == space.size());
    REQUIRE(report.witness);
}

TEST_CASE("escalate-count compression cannot determine escalation latency") {
    // the frozen demonstration: H=3, count(escalate) collides trajectories
    // whose cue/escalation ordering differs
    Alphabets a = tiny_alphabets();
    TrajectorySpace space(a, 3);
    auto count = phi::action_count(a, "escalate");
    auto latency = predicates::escalation_latency(a, 1, {}, {"escalate"});

    std::optional<Witness> witness = find_witness(space, count, latency);
    REQUIRE(witness);
    // canonical first pair, frozen from the exhaustive enumeration: the
    // all-quiet trajectory vs the one whose only cue arrives at the final
    // step and is never escalated
    CHECK(witness->index_tau == 0);
    CHECK(witness->index_tau_prime == 1);

    // independent re-validation of the defining property
    auto count_escalate = [&](const Trajectory& t) {
        int n = 0;
        for (const Step& s : t.steps)
            if (a.action[static_cast<std::size_t>(s.action)] == "escalate") ++n;
        return n;
    };
    auto safe_latency = [&](const Trajectory& t) {
        int cue = -1;
        for (std::size_t i = 0; i < t.steps.size(); ++i)
            if (t.steps[i].risk == 1) {
                cue = static_cast<int>(i);
                break;
            }
        if (cue < 0) return 1;
        for (std::size_t i = static_cast<std::size_t>(cue); i < t.steps.size();
             ++i)
            if (t.steps[i].action == 1)
                return static_cast<int>(i) - cue <= 1 ? 1 : 0;
        return 0;
    };
    CHECK(count_escalate(witness->tau) == count_escalate(witness->tau_prime));
    CHECK(safe_latency(witness->tau) != safe_latency(witness->tau_prime));
    CHECK(witness->status_tau == safe_latency(witness->tau));
    CHECK(witness->status_tau_prime == safe_latency(witness->tau_prime));

    IdentifiabilityReport report = check_identifiability(space, count, latency);
    CHECK_FALSE(report.identifiable);
    REQUIRE(report.witness);
    CHECK(report.witness->index_tau == witness->index_tau);
}

TEST_CASE("witness search is deterministic and matches the serial reference") {
    Alphabets a = Alphabets::defaults();
    TrajectorySpace space(a, 3);
    auto count = phi::action_count(a, "escalate");
    for (const SafetyPredicate& predicate : builtin_catalog(a)) {
        auto first = find_witness(space, count, predicate);
        auto second = find_witness(space, count, predicate);
        auto serial = reference::naive_find_witness(space, count, predicate);
        REQUIRE(first.has_value() == second.has_value());
        REQUIRE(first.has_value() == serial.has_value());
        if (first) {
            CHECK(first->index_tau == second->index_tau);
            CHECK(first->index_tau_prime == second->index_tau_prime);
            CHECK(first->index_tau == serial->index_tau);
            CHECK(first->index_tau_prime == serial->index_tau_prime);
        }
    }
}

TEST_CASE("no-witness verdicts survive random within-fiber sampling") {
    Alphabets a = tiny_alphabets();
    TrajectorySpace space(a, 3);
    auto compression = phi::final_risk(a);
    // a predicate that depends only on the final risk is constant on the
    // final-risk fibers
    SafetyPredicate final_safe{
        "final_risk_none",
        [](const Trajectory& t) { return t.steps.back().risk == 0 ? 1 : 0; }};
    REQUIRE_FALSE(find_witness(space, compression, final_safe));

    std::map<std::string, std::vector<std::uint64_t>> fibers;
    for (std::uint64_t i = 0; i < space.size(); ++i)
        fibers[compression.eval(space.at(i))].push_back(i);
    Rng rng(71);
    std::vector<const std::vector<std::uint64_t>*> buckets;
    for (const auto& [value, members] : fibers) buckets.push_back(&members);
    for (int draw = 0; draw < 10000; ++draw) {
        const auto& members = *buckets[rng.bounded(buckets.size())];
        std::uint64_t x = members[rng.bounded(members.size())];
        std::uint64_t y = members[rng.bounded(members.size())];
        CHECK(final_safe.eval(space.at(x)) == final_safe.eval(space.at(y)));
    }
}

TEST_CASE("mean-risk compression is an exact rational") {
    Alphabets a = Alphabets::defaults();
    auto mean = phi::mean_risk(a);
    Trajectory t{{{0, 0, 2}, {0, 0, 1}, {0, 0, 0}}};
    CHECK(mean.eval(t) == "3/3");
}

TEST_CASE("unknown symbols are rejected") {
    Alphabets a = Alphabets::defaults();
    CHECK_THROWS_AS(phi::action_count(a, "dance"), ConfigError);
    CHECK_THROWS_AS(predicates::escalation_latency(a, 1, {"volcano"}, {}),
                    ConfigError);
}
