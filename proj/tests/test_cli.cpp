// End-to-end runs of the command-line tool against the bundled fixture.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("miaudit_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunResult run(const std::string& args, const fs::path& dir) {
    fs::path out = dir / "stdout.txt";
    fs::path err = dir / "stderr.txt";
    std::string cmd = std::string(MIAUDIT_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, slurp(out), slurp(err)};
}

const std::string kFixture = FIXTURE_CSV_PATH;

}  // namespace

TEST_CASE("analyze writes the report artifacts") {
    fs::path dir = fresh_dir("analyze");
    RunResult r = run("analyze --input " + kFixture + " --out " +
                          (dir / "out").string(),
                      dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("12 conversations; 10 included (6 high, 4 low), 2 "
                     "excluded") != std::string::npos);
    for (const char* name :
         {"metrics.csv", "metrics.jsonl", "comparisons.csv", "report.md",
          "corpus.jsonl", "corpus_canonical.csv", "roc.svg", "pr.svg",
          "arcs.svg", "curves/roc_per_turn.csv", "curves/pr_temporal.csv"})
        CHECK(fs::exists(dir / "out" / name));
    std::string report = slurp(dir / "out" / "report.md");
    CHECK(report.find("Cohen's d") != std::string::npos);
    CHECK(report.find("include-censored") != std::string::npos);
    CHECK(report.find("events-only") != std::string::npos);
    CHECK(report.find("Mann-Whitney") != std::string::npos);
    // hand-computed fixture group means appear in the comparison row
    CHECK(report.find("| Per-turn process score | Per-turn baseline | 0.903 "
                      "| 0.375 |") != std::string::npos);
    // emitted metric rows carry the hand-computed per-conversation values
    std::string metrics = slurp(dir / "out" / "metrics.csv");
    CHECK(metrics.find("4,low,6,0.000000,0.000000,-1.000000,-1.000000,5,0,"
                       "0.833333,3,0.000000") != std::string::npos);
    CHECK(metrics.find("3,high,6,1.000000,1.000000,0.666667,1.666667,3,0,"
                       "0.500000,2,-0.666667") != std::string::npos);
}

TEST_CASE("analyze honors --format selection") {
    fs::path dir = fresh_dir("format");
    RunResult r = run("analyze --input " + kFixture + " --out " +
                          (dir / "out").string() + " --format csv",
                      dir);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "out" / "metrics.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "report.md"));
    CHECK_FALSE(fs::exists(dir / "out" / "roc.svg"));
    CHECK_FALSE(fs::exists(dir / "out" / "metrics.jsonl"));
}

TEST_CASE("ingestion failures exit with the ingest code") {
    fs::path dir = fresh_dir("ingest");
    std::ofstream(dir / "empty.csv") << "";
    RunResult empty = run("analyze --input " + (dir / "empty.csv").string() +
                              " --out " + (dir / "out").string(),
                          dir);
    CHECK(empty.exit_code == 3);
    CHECK(empty.err.find("ingestion error") != std::string::npos);

    RunResult missing = run("analyze --input " + (dir / "nope.csv").string() +
                                " --out " + (dir / "out").string(),
                            dir);
    CHECK(missing.exit_code == 3);
}

TEST_CASE("missing --input without the environment default is a usage error") {
    fs::path dir = fresh_dir("noinput");
    RunResult r = run("analyze --out " + (dir / "out").string(), dir);
    CHECK(r.exit_code == 2);
}

TEST_CASE("MIAUDIT_INPUT provides the default data path") {
    fs::path dir = fresh_dir("envinput");
    fs::path out = dir / "stdout.txt";
    std::string cmd = "MIAUDIT_INPUT=" + kFixture + " " + MIAUDIT_CLI_PATH +
                      " analyze --out " + (dir / "out").string() + " > " +
                      out.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(slurp(out).find("12 conversations") != std::string::npos);
}

TEST_CASE("detect reports operating points and deterministic bootstrap") {
    fs::path dir = fresh_dir("detect");
    std::string args = "detect --input " + kFixture + " --seed 7 --out ";
    RunResult a = run(args + (dir / "a").string(), dir);
    CHECK(a.exit_code == 0);
    CHECK(a.out.find("temporal: 1/4 detected, 0/6 false alarms") !=
          std::string::npos);
    CHECK(a.out.find("per_turn: 3/4 detected, 0/6 false alarms") !=
          std::string::npos);
    for (const char* name :
         {"detection_full.csv", "detection_midpoint.csv", "sweep_temporal.csv",
          "sweep_early_warning.csv", "sweep_per_turn.csv", "bootstrap.csv",
          "report.md", "sensitivity.svg"})
        CHECK(fs::exists(dir / "a" / name));

    RunResult b = run(args + (dir / "b").string(), dir);
    CHECK(slurp(dir / "a" / "bootstrap.csv") ==
          slurp(dir / "b" / "bootstrap.csv"));

    // a threshold below the attainable range flags nothing
    RunResult none = run("detect --input " + kFixture + " --theta -1.5 --out " +
                             (dir / "none").string(),
                         dir);
    CHECK(none.out.find("temporal: 0/4 detected, 0/6 false alarms") !=
          std::string::npos);
}

TEST_CASE("repeated runs produce byte-identical artifacts") {
    fs::path dir = fresh_dir("determinism");
    for (const char* sub : {"a", "b"}) {
        RunResult r = run("analyze --input " + kFixture + " --out " +
                              (dir / sub).string(),
                          dir);
        REQUIRE(r.exit_code == 0);
    }
    for (const char* name : {"metrics.csv", "comparisons.csv", "report.md",
                             "roc.svg", "metrics.jsonl", "corpus.jsonl"})
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
}

TEST_CASE("case command: trace, unknown id, excluded id") {
    fs::path dir = fresh_dir("case");
    RunResult ok = run("case --input " + kFixture + " --out " +
                           (dir / "out").string() + " 4",
                       dir);
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("sustain ratios 0.000 -> 1.000") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "case_4.json"));
    CHECK(fs::exists(dir / "out" / "case_4.md"));
    CHECK(fs::exists(dir / "out" / "timeline_4.svg"));

    RunResult unknown = run("case --input " + kFixture + " --out " +
                                (dir / "out").string() + " 999",
                            dir);
    CHECK(unknown.exit_code == 4);
    CHECK(unknown.err.find("999") != std::string::npos);

    RunResult excluded = run("case --input " + kFixture + " --out " +
                                 (dir / "out").string() + " 11",
                             dir);
    CHECK(excluded.exit_code == 4);
    CHECK(excluded.err.find("fewer than 4 labeled client turns") !=
          std::string::npos);
}

TEST_CASE("tsni command: witness, identifiable, capacity") {
    fs::path dir = fresh_dir("tsni");
    RunResult witness = run(
        "tsni --phi count-action:escalate --safety latency:1 --horizon 3 "
        "--out " + (dir / "w").string(),
        dir);
    CHECK(witness.exit_code == 0);
    CHECK(witness.out.find("non-identifiable") != std::string::npos);
    CHECK(fs::exists(dir / "w" / "tsni_report.json"));
    CHECK(fs::exists(dir / "w" / "tsni_report.md"));
    CHECK(slurp(dir / "w" / "tsni_report.md").find("Witness") !=
          std::string::npos);

    RunResult ident = run("tsni --phi identity --safety latency:1 --horizon 2 "
                          "--out " + (dir / "i").string(),
                          dir);
    CHECK(ident.exit_code == 0);
    CHECK(ident.out.find("identifiable") == 0);

    RunResult big = run("tsni --phi identity --safety latency:1 --horizon 3 "
                        "--cap 10 --out " + (dir / "c").string(),
                        dir);
    CHECK(big.exit_code == 5);
    CHECK(big.err.find("1728") != std::string::npos);
}

TEST_CASE("scope command gates on claim support") {
    fs::path dir = fresh_dir("scope");
    std::ofstream(dir / "good.json") << R"({
      "safety_claim": {"dimensions": ["harm_accumulation"], "text": "ok"},
      "evaluation_horizon": "one_dialogue",
      "unit_of_analysis": "dialogue",
      "temporal_determinants": ["cumulative_risk_markers"],
      "preserved_evidence": ["cumulative_risk_markers", "worsening_user_state"],
      "outcome_linkage": "none",
      "privacy_constraints": {"text": "aggregated", "aggregation": true}
    })";
    RunResult good = run("scope --card " + (dir / "good.json").string() +
                             " --out " + (dir / "g").string(),
                         dir);
    CHECK(good.exit_code == 0);
    CHECK(good.out.find("harm_accumulation: supported") != std::string::npos);
    CHECK(fs::exists(dir / "g" / "card.md"));
    CHECK(fs::exists(dir / "g" / "card_validated.json"));

    std::ofstream(dir / "bad.json") << R"({
      "safety_claim": {"dimensions": ["intervention_timing"], "text": "x"},
      "evaluation_horizon": "one_turn",
      "unit_of_analysis": "response",
      "temporal_determinants": [],
      "preserved_evidence": ["final_symptom_score"],
      "outcome_linkage": "endpoint_only",
      "privacy_constraints": {"text": ""}
    })";
    RunResult bad = run("scope --card " + (dir / "bad.json").string() +
                            " --out " + (dir / "b").string(),
                        dir);
    CHECK(bad.exit_code == 4);
    CHECK(bad.out.find("escalation_latency") != std::string::npos);

    RunResult warn = run("scope --card " + (dir / "bad.json").string() +
                             " --warn-only --out " + (dir / "w").string(),
                         dir);
    CHECK(warn.exit_code == 0);

    std::ofstream(dir / "broken.json") << R"({"safety_claim": {"dimensions": []}})";
    RunResult broken = run("scope --card " + (dir / "broken.json").string() +
                               " --out " + (dir / "x").string(),
                           dir);
    CHECK(broken.exit_code == 4);
    CHECK(broken.err.find("evaluation_horizon") != std::string::npos);

    RunResult audit = run("scope --from-audit --claim harm_accumulation "
                          "--input " + kFixture + " --out " +
                              (dir / "a").string(),
                          dir);
    CHECK(audit.exit_code == 0);

    RunResult referral = run("scope --from-audit --claim referral_correctness "
                             "--input " + kFixture + " --out " +
                                 (dir / "r").string(),
                             dir);
    CHECK(referral.exit_code == 4);
}
