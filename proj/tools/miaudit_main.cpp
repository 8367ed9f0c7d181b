// miaudit: corpus-audit toolkit for annotated counseling dialogues.
// Subcommands: analyze, detect, case, tsni, scope.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "miaudit/common.hpp"
#include "miaudit/corpus.hpp"
#include "miaudit/detection.hpp"
#include "miaudit/metrics.hpp"
#include "miaudit/report.hpp"
#include "miaudit/scope.hpp"
#include "miaudit/stats.hpp"
#include "miaudit/svg.hpp"
#include "miaudit/tsni.hpp"

namespace {

using namespace miaudit;

struct CommonConfig {
    std::string input;
    std::vector<std::string> map_overrides;
    bool tab = false;
    std::string out_dir = "out";
    std::vector<std::string> formats = {"records", "csv", "md", "svg"};

    bool wants(const std::string& fmt) const {
        for (const auto& f : formats)
            if (f == fmt) return true;
        return false;
    }
};

void add_common(CLI::App* cmd, CommonConfig& cfg, bool needs_input) {
    auto* input = cmd->add_option("--input", cfg.input,
                                  "input corpus (delimiter-separated, header "
                                  "row required); defaults to $MIAUDIT_INPUT");
    input->envname("MIAUDIT_INPUT");
    if (needs_input) input->required();
    cmd->add_option("--map", cfg.map_overrides,
                    "column mapping override field=column (repeatable); "
                    "fields: conversation_id, quality, order, speaker, "
                    "behavior, talk_type, text");
    cmd->add_flag("--tab", cfg.tab, "tab-delimited input");
    cmd->add_option("--out", cfg.out_dir, "output directory")
        ->capture_default_str();
    cmd->add_option("--format", cfg.formats,
                    "output formats: records, csv, md, svg (repeatable)")
        ->check(CLI::IsMember({"records", "csv", "md", "svg"}));
}

Corpus load_corpus(const CommonConfig& cfg) {
    ColumnMapping mapping;
    mapping.apply_overrides(cfg.map_overrides);
    return ingest_file(cfg.input, mapping, cfg.tab ? '\t' : ',');
}

std::string out_path(const CommonConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::string corpus_summary(const Corpus& corpus) {
    std::ostringstream os;
    os << corpus.total() << " conversations; " << corpus.included.size()
       << " included (" << corpus.high_included() << " high, "
       << corpus.low_included() << " low), " << corpus.excluded_count()
       << " excluded";
    if (corpus.warning_count)
        os << "; " << corpus.warning_count << " label warnings";
    return os.str();
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeConfig {
    CommonConfig common;
    CensoringMode censoring = CensoringMode::include_censored;
    bool welch = false;
};

svg::Series curve_series(const CurveResult& curve, const std::string& label,
                         const std::string& color) {
    svg::Series s;
    s.label = label + " (AUC " + report::fmt3(curve.auc) + ")";
    s.color = color;
    for (const CurvePoint& p : curve.points) s.points.emplace_back(p.x, p.y);
    return s;
}

void write_curve_plots(const AnalyzeConfig& cfg, const CurveResult& roc_pt,
                       const CurveResult& pr_pt, const CurveResult& roc_temp,
                       const CurveResult& pr_temp) {
    svg::Plot roc("ROC curves", "false positive rate", "true positive rate");
    roc.set_x_limits(0, 1);
    roc.set_y_limits(0, 1);
    roc.add_series(curve_series(roc_pt, "per-turn baseline", "#1f77b4"));
    roc.add_series(curve_series(roc_temp, "temporal signal", "#d62728"));
    svg::Series diag;
    diag.color = "#999999";
    diag.dashed = true;
    diag.points = {{0, 0}, {1, 1}};
    roc.add_series(diag);
    report::write_file(out_path(cfg.common, "roc.svg"), roc.render());

    svg::Plot pr("Precision-recall curves", "recall", "precision");
    pr.set_x_limits(0, 1);
    pr.set_y_limits(0, 1);
    pr.add_series(curve_series(pr_pt, "per-turn baseline", "#1f77b4"));
    pr.add_series(curve_series(pr_temp, "temporal signal", "#d62728"));
    report::write_file(out_path(cfg.common, "pr.svg"), pr.render());
}

void write_arc_plot(const AnalyzeConfig& cfg, const Corpus& corpus,
                    std::span<const MetricVector> vectors) {
    double c1h = 0, c2h = 0, s1h = 0, s2h = 0;
    double c1l = 0, c2l = 0, s1l = 0, s2l = 0;
    long nh = 0, nl = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const HalfRatios& h = vectors[i].halves;
        if (corpus.included[i].quality == Quality::high) {
            c1h += h.c1; c2h += h.c2; s1h += h.s1; s2h += h.s2; ++nh;
        } else {
            c1l += h.c1; c2l += h.c2; s1l += h.s1; s2l += h.s2; ++nl;
        }
    }
    if (nh == 0 || nl == 0) return;
    svg::Plot plot("Client-language arcs across conversation halves",
                   "conversation half", "mean talk-type ratio");
    plot.set_x_limits(0.8, 2.2);
    auto series = [&](const std::string& label, const std::string& color,
                      bool dashed, double a, double b, long n) {
        svg::Series s;
        s.label = label;
        s.color = color;
        s.dashed = dashed;
        s.markers = true;
        s.points = {{1.0, a / n}, {2.0, b / n}};
        return s;
    };
    plot.add_series(series("change talk, high quality", "#1f77b4", false, c1h, c2h, nh));
    plot.add_series(series("change talk, low quality", "#1f77b4", true, c1l, c2l, nl));
    plot.add_series(series("sustain talk, high quality", "#d62728", false, s1h, s2h, nh));
    plot.add_series(series("sustain talk, low quality", "#d62728", true, s1l, s2l, nl));
    report::write_file(out_path(cfg.common, "arcs.svg"), plot.render());
}

int run_analyze(const AnalyzeConfig& cfg) {
    Corpus corpus = load_corpus(cfg.common);
    std::vector<MetricVector> vectors = evaluate_corpus(corpus);
    long undefined_pt = 0;
    for (const MetricVector& m : vectors)
        if (!m.per_turn) ++undefined_pt;

    auto include_rows = report::build_comparisons(
        corpus, vectors, CensoringMode::include_censored);
    auto events_rows =
        report::build_comparisons(corpus, vectors, CensoringMode::events_only);

    auto pt = report::oriented_scores(corpus, vectors, MetricId::per_turn);
    auto temp = report::oriented_scores(corpus, vectors, MetricId::sustain_delta);
    CurveResult roc_pt = score_curve(pt.scores, pt.labels, CurveKind::roc);
    CurveResult pr_pt =
        score_curve(pt.scores, pt.labels, CurveKind::precision_recall);
    CurveResult roc_temp = score_curve(temp.scores, temp.labels, CurveKind::roc);
    CurveResult pr_temp =
        score_curve(temp.scores, temp.labels, CurveKind::precision_recall);

    if (cfg.common.wants("csv")) {
        report::write_file(out_path(cfg.common, "metrics.csv"),
                           report::metrics_csv(corpus, vectors));
        std::string comparisons =
            report::comparisons_csv(include_rows, CensoringMode::include_censored);
        std::string events =
            report::comparisons_csv(events_rows, CensoringMode::events_only);
        // drop the second schema+header block when appending
        auto body = events.find('\n');
        body = events.find('\n', body + 1);
        comparisons += events.substr(body + 1);
        report::write_file(out_path(cfg.common, "comparisons.csv"), comparisons);
        report::write_file(out_path(cfg.common, "corpus_canonical.csv"),
                           export_tabular(corpus));
        report::write_file(out_path(cfg.common, "curves/roc_per_turn.csv"),
                           report::curve_csv(roc_pt));
        report::write_file(out_path(cfg.common, "curves/pr_per_turn.csv"),
                           report::curve_csv(pr_pt));
        report::write_file(out_path(cfg.common, "curves/roc_temporal.csv"),
                           report::curve_csv(roc_temp));
        report::write_file(out_path(cfg.common, "curves/pr_temporal.csv"),
                           report::curve_csv(pr_temp));
    }
    if (cfg.common.wants("records")) {
        report::write_file(out_path(cfg.common, "metrics.jsonl"),
                           report::metrics_jsonl(corpus, vectors));
        report::write_file(out_path(cfg.common, "corpus.jsonl"),
                           dump_records(corpus));
    }
    if (cfg.common.wants("svg")) {
        write_curve_plots(cfg, roc_pt, pr_pt, roc_temp, pr_temp);
        write_arc_plot(cfg, corpus, vectors);
    }

    std::string md = "<!-- " + schema_line("report") + " -->\n";
    md += "# Corpus audit\n\n";
    md += corpus_summary(corpus) + "\n";
    if (undefined_pt)
        md += "\nwarning: " + std::to_string(undefined_pt) +
              " conversation(s) without therapist turns skipped in per-turn "
              "analyses\n";
    md += "\n## Metric comparison (timing metrics " +
          std::string(to_string(cfg.censoring)) + ")\n\n";
    md += report::comparison_table_markdown(
        cfg.censoring == CensoringMode::include_censored ? include_rows
                                                         : events_rows);
    md += "\n## Metric comparison (timing metrics " +
          std::string(to_string(cfg.censoring == CensoringMode::include_censored
                                    ? CensoringMode::events_only
                                    : CensoringMode::include_censored)) +
          ")\n\n";
    md += report::comparison_table_markdown(
        cfg.censoring == CensoringMode::include_censored ? events_rows
                                                         : include_rows);
    md += "\n## Nonparametric tests\n\n";
    md += report::mann_whitney_table_markdown(include_rows);
    if (cfg.welch) {
        auto welch_rows = report::build_comparisons(
            corpus, vectors, cfg.censoring, TTestKind::welch);
        md += "\n## Welch sensitivity\n\n";
        md += report::comparison_table_markdown(welch_rows);
    }
    md += "\n## Threshold-free curves\n\n";
    md += "- per-turn baseline: ROC AUC = " + report::fmt3(roc_pt.auc) +
          ", PR AUC = " + report::fmt3(pr_pt.auc) + "\n";
    md += "- temporal signal: ROC AUC = " + report::fmt3(roc_temp.auc) +
          ", PR AUC = " + report::fmt3(pr_temp.auc) + "\n";
    if (cfg.common.wants("md"))
        report::write_file(out_path(cfg.common, "report.md"), md);

    std::cout << corpus_summary(corpus) << "\n";
    if (undefined_pt)
        std::cout << "warning: " << undefined_pt
                  << " conversation(s) without therapist turns skipped in "
                     "per-turn analyses\n";
    std::cout << "per-turn ROC AUC " << report::fmt3(roc_pt.auc)
              << ", temporal ROC AUC " << report::fmt3(roc_temp.auc) << "\n";
    std::cout << "artifacts written to " << cfg.common.out_dir << "\n";
    return kExitOk;
}

// ---- detect --------------------------------------------------------------

struct DetectConfig {
    CommonConfig common;
    double theta = -0.10;
    std::optional<double> theta_pt;
    double theta_ew = -0.15;
    std::string sweep_spec = "-0.05:-0.50:0.05";
    long resamples = 1000;
    std::uint64_t seed = 13;
};

int run_detect(const DetectConfig& cfg) {
    Corpus corpus = load_corpus(cfg.common);
    std::vector<MetricVector> vectors = evaluate_corpus(corpus);

    // theta_pt defaults to the F1-best threshold on the data-driven grid
    GridSpec data_grid = GridSpec::parse("data");
    SweepResult pt_sweep =
        sweep_threshold(corpus, vectors, SweepMetric::per_turn, data_grid);
    double theta_pt = cfg.theta_pt.value_or(pt_sweep.best_threshold);

    DetectionOutcome temporal = detect_temporal(corpus, vectors, cfg.theta);
    DetectionOutcome per_turn = detect_per_turn(corpus, vectors, theta_pt);
    std::vector<DetectionOutcome> full_parts{per_turn, temporal};
    DetectionOutcome full_combined =
        combine(corpus, full_parts, CombineRule::either);
    std::vector<DetectionOutcome> full{per_turn, temporal, full_combined};

    EarlyWarningOutcomes midpoint =
        detect_early_warning(corpus, vectors, cfg.theta_ew, theta_pt);
    std::vector<DetectionOutcome> mid{midpoint.per_turn, midpoint.temporal,
                                      midpoint.combined};

    GridSpec grid = GridSpec::parse(cfg.sweep_spec);
    SweepResult temporal_sweep =
        sweep_threshold(corpus, vectors, SweepMetric::temporal, grid);
    SweepResult ew_sweep =
        sweep_threshold(corpus, vectors, SweepMetric::early_warning, grid);

    std::vector<std::uint8_t> low_flags, high_flags;
    {
        std::set<std::string> flagged(temporal.flagged.begin(),
                                      temporal.flagged.end());
        for (const Conversation& conv : corpus.included) {
            std::uint8_t hit = flagged.count(conv.id) ? 1 : 0;
            (conv.quality == Quality::low ? low_flags : high_flags)
                .push_back(hit);
        }
    }
    std::vector<BootstrapCI> cis;
    cis.push_back(bootstrap_rate_ci(low_flags, "detection_rate", cfg.resamples,
                                    cfg.seed));
    cis.push_back(bootstrap_rate_ci(high_flags, "false_alarm_rate",
                                    cfg.resamples, cfg.seed));

    if (cfg.common.wants("csv")) {
        report::write_file(out_path(cfg.common, "detection_full.csv"),
                           report::detection_csv(full));
        report::write_file(out_path(cfg.common, "detection_midpoint.csv"),
                           report::detection_csv(mid));
        report::write_file(out_path(cfg.common, "sweep_temporal.csv"),
                           report::sweep_csv(temporal_sweep));
        report::write_file(out_path(cfg.common, "sweep_early_warning.csv"),
                           report::sweep_csv(ew_sweep));
        report::write_file(out_path(cfg.common, "sweep_per_turn.csv"),
                           report::sweep_csv(pt_sweep));
        report::write_file(out_path(cfg.common, "bootstrap.csv"),
                           report::bootstrap_csv(cis));
    }
    if (cfg.common.wants("svg")) {
        svg::Plot plot("Threshold sensitivity", "threshold", "F1");
        svg::Series ts, ews;
        ts.label = "full-conversation temporal";
        ts.color = "#d62728";
        ts.markers = true;
        for (const SweepPoint& p : temporal_sweep.grid)
            ts.points.emplace_back(p.threshold, p.f1);
        ews.label = "midpoint early warning";
        ews.color = "#2ca02c";
        ews.markers = true;
        ews.dashed = true;
        for (const SweepPoint& p : ew_sweep.grid)
            ews.points.emplace_back(p.threshold, p.f1);
        plot.add_series(ts);
        plot.add_series(ews);
        plot.add_vline(temporal_sweep.best_threshold, "#d62728",
                       "best " + report::fmt3(temporal_sweep.best_threshold));
        plot.add_vline(ew_sweep.best_threshold, "#2ca02c",
                       "best " + report::fmt3(ew_sweep.best_threshold));
        report::write_file(out_path(cfg.common, "sensitivity.svg"),
                           plot.render());
    }

    std::string md = "<!-- " + schema_line("report") + " -->\n";
    md += "# Detection report\n\n";
    md += corpus_summary(corpus) + "\n\n";
    md += "Thresholds: theta = " + report::fmt3(cfg.theta) +
          ", theta_pt = " + report::fmt3(theta_pt) +
          (cfg.theta_pt ? "" : " (F1-selected on the data-driven grid)") +
          ", theta_ew = " + report::fmt3(cfg.theta_ew) + "\n";
    md += "\n## Full-conversation detection\n\n";
    md += report::detection_table_markdown(full);
    md += "\n## Early-warning detection at conversation midpoint\n\n";
    md += report::detection_table_markdown(mid);
    md += "\n## Threshold sweeps\n\n";
    md += "- temporal: best threshold " +
          report::fmt3(temporal_sweep.best_threshold) + ", F1 = " +
          report::fmt3(temporal_sweep.best_f1) + "\n";
    md += "- early warning: best threshold " +
          report::fmt3(ew_sweep.best_threshold) + ", F1 = " +
          report::fmt3(ew_sweep.best_f1) + "\n";
    md += "- per-turn (data-driven): best threshold " +
          report::fmt3(pt_sweep.best_threshold) + ", F1 = " +
          report::fmt3(pt_sweep.best_f1) + "\n";
    md += "\n## Bootstrap (temporal operating point, " +
          std::to_string(cfg.resamples) + " resamples, seed " +
          std::to_string(cfg.seed) + ")\n\n";
    for (const BootstrapCI& ci : cis)
        md += "- " + ci.statistic_name + ": " + report::fmt3(ci.point) +
              ", 95% CI [" + report::fmt3(ci.lo) + ", " + report::fmt3(ci.hi) +
              "]\n";
    if (cfg.common.wants("md"))
        report::write_file(out_path(cfg.common, "report.md"), md);

    for (const DetectionOutcome& o : full)
        std::cout << to_string(o.method) << ": " << o.detected << "/" << o.n_low
                  << " detected, " << o.false_alarms << "/" << o.n_high
                  << " false alarms\n";
    for (const BootstrapCI& ci : cis)
        std::cout << ci.statistic_name << " " << report::fmt3(ci.point)
                  << " CI [" << report::fmt3(ci.lo) << ", "
                  << report::fmt3(ci.hi) << "]\n";
    std::cout << "artifacts written to " << cfg.common.out_dir << "\n";
    return kExitOk;
}

// ---- case ----------------------------------------------------------------

struct CaseConfig {
    CommonConfig common;
    std::string id;
};

int run_case(const CaseConfig& cfg) {
    Corpus corpus = load_corpus(cfg.common);
    const Conversation* conv = corpus.find_included(cfg.id);
    if (!conv) {
        if (corpus.find_excluded(cfg.id))
            throw ValidationError("conversation " + cfg.id +
                                  " excluded: fewer than 4 labeled client turns");
        throw ValidationError("unknown conversation id: " + cfg.id);
    }
    MetricVector metrics = evaluate(*conv);
    CaseTrace trace = case_trace(*conv);

    if (cfg.common.wants("records"))
        report::write_file(out_path(cfg.common, "case_" + cfg.id + ".json"),
                           report::case_json(trace, metrics));
    if (cfg.common.wants("md"))
        report::write_file(out_path(cfg.common, "case_" + cfg.id + ".md"),
                           report::case_markdown(trace, metrics));
    if (cfg.common.wants("svg")) {
        svg::Plot plot("Conversation " + cfg.id + " talk-type timeline",
                       "labeled client turn", "talk type");
        plot.set_y_categories({"sustain", "neutral", "change"});
        svg::Series s;
        s.color = "#1f77b4";
        s.markers = true;
        for (std::size_t i = 0; i < trace.talk_type_sequence.size(); ++i) {
            double y = trace.talk_type_sequence[i] == TalkType::sustain ? 0
                       : trace.talk_type_sequence[i] == TalkType::neutral ? 1
                                                                          : 2;
            s.points.emplace_back(static_cast<double>(i + 1), y);
        }
        plot.add_series(s);
        plot.add_vline(static_cast<double>(metrics.n_labeled / 2) + 0.5,
                       "#999999", "midpoint");
        report::write_file(out_path(cfg.common, "timeline_" + cfg.id + ".svg"),
                           plot.render());
    }

    std::cout << "conversation " << cfg.id << " (" << to_string(conv->quality)
              << " quality): sustain ratios "
              << report::fmt3(trace.sustain_ratio_first) << " -> "
              << report::fmt3(trace.sustain_ratio_second)
              << ", longest neutral run " << trace.longest_neutral_run
              << ", max sustain streak " << metrics.s_max << "\n";
    std::cout << "artifacts written to " << cfg.common.out_dir << "\n";
    return kExitOk;
}

// ---- tsni ----------------------------------------------------------------

struct TsniConfig {
    CommonConfig common;
    std::string phi_spec = "count-action:escalate";
    std::string safety_spec = "latency:1";
    int horizon = 3;
    int max_horizon = tsni::kDefaultMaxHorizon;
    std::uint64_t cap = tsni::kDefaultCap;
    std::string user_symbols, action_symbols, risk_symbols;
};

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

tsni::CompressionFn parse_phi(const std::string& spec,
                              const tsni::Alphabets& a) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::string arg =
        colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    if (kind == "identity") return tsni::phi::identity(a);
    if (kind == "constant") return tsni::phi::constant(arg.empty() ? "z" : arg);
    if (kind == "final-risk") return tsni::phi::final_risk(a);
    if (kind == "final-action") return tsni::phi::final_action(a);
    if (kind == "mean-risk") return tsni::phi::mean_risk(a);
    if (kind == "count-action") {
        if (arg.empty())
            throw ConfigError("count-action needs a symbol: count-action:<a>");
        return tsni::phi::action_count(a, arg);
    }
    throw ConfigError("unknown phi selector: " + spec);
}

tsni::SafetyPredicate parse_safety(const std::string& spec,
                                   const tsni::Alphabets& a) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    int arg = 0;
    if (colon != std::string::npos) {
        try {
            arg = std::stoi(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("safety selector parameter must be an integer: " +
                              spec);
        }
    }
    if (kind == "latency") return tsni::predicates::escalation_latency(a, arg);
    if (kind == "max-run") return tsni::predicates::max_risk_run(a, arg);
    if (kind == "recovery") return tsni::predicates::recovery_within(a, arg);
    if (kind == "constant") return tsni::predicates::constant(arg);
    throw ConfigError("unknown safety selector: " + spec);
}

int run_tsni(const TsniConfig& cfg) {
    tsni::Alphabets alphabets = tsni::Alphabets::defaults();
    if (!cfg.user_symbols.empty()) alphabets.user = split_csv_list(cfg.user_symbols);
    if (!cfg.action_symbols.empty())
        alphabets.action = split_csv_list(cfg.action_symbols);
    if (!cfg.risk_symbols.empty()) alphabets.risk = split_csv_list(cfg.risk_symbols);

    tsni::TrajectorySpace space(alphabets, cfg.horizon, cfg.cap,
                                cfg.max_horizon);
    tsni::CompressionFn phi = parse_phi(cfg.phi_spec, alphabets);
    tsni::SafetyPredicate safety = parse_safety(cfg.safety_spec, alphabets);
    tsni::IdentifiabilityReport result =
        tsni::check_identifiability(space, phi, safety);

    nlohmann::json j{{"schema", "miaudit/tsni"},
                     {"version", kSchemaVersion},
                     {"phi", phi.name},
                     {"safety", safety.name},
                     {"horizon", cfg.horizon},
                     {"space_size", result.space_size},
                     {"fiber_count", result.fiber_count},
                     {"max_fiber_size", result.max_fiber_size},
                     {"identifiable", result.identifiable}};
    if (result.witness) {
        const tsni::Witness& w = *result.witness;
        auto steps_of = [&](const tsni::Trajectory& t) {
            nlohmann::json steps = nlohmann::json::array();
            for (const tsni::Step& s : t.steps)
                steps.push_back(
                    {{"user", alphabets.user[static_cast<std::size_t>(s.user)]},
                     {"action",
                      alphabets.action[static_cast<std::size_t>(s.action)]},
                     {"risk",
                      alphabets.risk[static_cast<std::size_t>(s.risk)]}});
            return steps;
        };
        j["witness"] = {
            {"tau_index", w.index_tau},
            {"tau", steps_of(w.tau)},
            {"tau_rendered", tsni::render_trajectory(w.tau, alphabets)},
            {"tau_prime_index", w.index_tau_prime},
            {"tau_prime", steps_of(w.tau_prime)},
            {"tau_prime_rendered",
             tsni::render_trajectory(w.tau_prime, alphabets)},
            {"compressed_value", w.compressed_value},
            {"status_tau", w.status_tau},
            {"status_tau_prime", w.status_tau_prime}};
    }
    if (cfg.common.wants("records"))
        report::write_file(out_path(cfg.common, "tsni_report.json"),
                           j.dump(2) + "\n");

    std::string md = "<!-- " + schema_line("tsni") + " -->\n";
    md += "# Identifiability report\n\n";
    md += "- compression: " + phi.name + "\n";
    md += "- safety predicate: " + safety.name + "\n";
    md += "- horizon: " + std::to_string(cfg.horizon) + "\n";
    md += "- trajectory space size: " + std::to_string(result.space_size) + "\n";
    md += "- fibers: " + std::to_string(result.fiber_count) +
          " (largest " + std::to_string(result.max_fiber_size) + ")\n\n";
    if (result.identifiable) {
        md += "The safety predicate is constant on every fiber of the "
              "compression: it is identifiable from the compressed "
              "representation on this space.\n";
    } else {
        md += "## Witness\n\n";
        md += tsni::render_witness_markdown(*result.witness, alphabets,
                                            phi.name, safety.name);
    }
    if (cfg.common.wants("md"))
        report::write_file(out_path(cfg.common, "tsni_report.md"), md);

    std::cout << (result.identifiable
                      ? "identifiable: no witness in " +
                            std::to_string(result.space_size) + " trajectories"
                      : "non-identifiable: witness found (indices " +
                            std::to_string(result.witness->index_tau) + ", " +
                            std::to_string(result.witness->index_tau_prime) +
                            ")")
              << "\n";
    std::cout << "artifacts written to " << cfg.common.out_dir << "\n";
    return kExitOk;
}

// ---- scope ---------------------------------------------------------------

struct ScopeConfig {
    CommonConfig common;
    std::string card_path;
    std::string catalog_path;
    bool from_audit = false;
    std::vector<std::string> claims;
    bool warn_only = false;
};

int run_scope(const ScopeConfig& cfg) {
    scope::Catalog catalog = cfg.catalog_path.empty()
                                 ? scope::default_catalog()
                                 : scope::load_catalog(cfg.catalog_path);

    scope::ScopeCard card;
    if (cfg.from_audit) {
        if (cfg.common.input.empty())
            throw ConfigError("--from-audit requires --input");
        Corpus corpus = load_corpus(cfg.common);
        std::vector<MetricVector> vectors = evaluate_corpus(corpus);
        (void)vectors;  // evidence keys below are exactly what was computed
        std::vector<scope::Dimension> claims;
        for (const std::string& name : cfg.claims) {
            auto dim = scope::dimension_from_string(name);
            if (!dim) throw ValidationError("unknown dimension identifier: " + name);
            claims.push_back(*dim);
        }
        card = scope::card_from_audit(
            {"per_turn", "sustain_delta", "temporal_score", "s_max", "t_dom",
             "t_norm", "ew_delta", "case_trace"},
            claims, catalog);
    } else {
        if (cfg.card_path.empty())
            throw ConfigError("scope needs --card <file> or --from-audit");
        card = scope::load_card(cfg.card_path);
    }

    scope::ValidationReport result = scope::validate_card(card, catalog);
    std::string rendered = scope::render_card(card, result);
    std::cout << rendered;

    nlohmann::json validated = nlohmann::json::parse(scope::card_to_json(card));
    nlohmann::json unsupported = nlohmann::json::array();
    for (const scope::ClaimFinding& f : result.findings) {
        if (f.supported) continue;
        unsupported.push_back(
            {{"dimension", scope::to_string(f.dimension)},
             {"missing_determinants", f.missing}});
    }
    validated["unsupported_claims"] = unsupported;

    if (cfg.common.wants("md"))
        report::write_file(out_path(cfg.common, "card.md"), rendered);
    if (cfg.common.wants("records"))
        report::write_file(out_path(cfg.common, "card_validated.json"),
                           validated.dump(2) + "\n");

    if (!result.all_supported() && !cfg.warn_only) {
        std::cerr << "error: card claims dimensions whose determining "
                     "evidence is not preserved\n";
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corpus-audit toolkit for annotated counseling dialogues"};
    app.require_subcommand(1);

    AnalyzeConfig analyze_cfg;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "per-conversation metrics, group statistics, and curves");
    add_common(analyze, analyze_cfg.common, true);
    analyze->add_option_function<std::string>(
        "--censoring",
        [&](const std::string& v) {
            analyze_cfg.censoring = v == "events-only"
                                        ? CensoringMode::events_only
                                        : CensoringMode::include_censored;
        },
        "timing-metric censoring mode shown first: include | events-only")
        ->check(CLI::IsMember({"include", "events-only"}));
    analyze->add_flag("--welch", analyze_cfg.welch,
                      "add a Welch t-test sensitivity table");

    DetectConfig detect_cfg;
    CLI::App* detect = app.add_subcommand(
        "detect", "thresholded flagging, sweeps, and bootstrap intervals");
    add_common(detect, detect_cfg.common, true);
    detect->add_option("--theta", detect_cfg.theta,
                       "full-conversation temporal threshold")
        ->capture_default_str();
    double theta_pt_value = 0.0;
    CLI::Option* theta_pt_opt =
        detect->add_option("--theta-pt", theta_pt_value,
                           "per-turn threshold (default: F1-selected on the "
                           "data-driven grid)");
    detect->add_option("--theta-ew", detect_cfg.theta_ew,
                       "midpoint early-warning threshold")
        ->capture_default_str();
    detect->add_option("--sweep", detect_cfg.sweep_spec,
                       "sweep grid start:stop:step or 'data'")
        ->capture_default_str();
    detect->add_option("--resamples", detect_cfg.resamples,
                       "bootstrap resample count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    detect->add_option("--seed", detect_cfg.seed, "bootstrap seed")
        ->capture_default_str();

    CaseConfig case_cfg;
    CLI::App* case_cmd =
        app.add_subcommand("case", "diagnostic trace for one conversation");
    add_common(case_cmd, case_cfg.common, true);
    case_cmd->add_option("id", case_cfg.id, "conversation id")->required();

    TsniConfig tsni_cfg;
    CLI::App* tsni_cmd = app.add_subcommand(
        "tsni", "non-identifiability witness search over trajectory spaces");
    add_common(tsni_cmd, tsni_cfg.common, false);
    tsni_cmd->add_option("--phi", tsni_cfg.phi_spec,
                         "compression selector: identity | constant[:v] | "
                         "final-risk | final-action | mean-risk | "
                         "count-action:<symbol>")
        ->capture_default_str();
    tsni_cmd->add_option("--safety", tsni_cfg.safety_spec,
                         "safety selector: latency:<k> | max-run:<m> | "
                         "recovery:<k> | constant:<v>")
        ->capture_default_str();
    tsni_cmd->add_option("--horizon", tsni_cfg.horizon, "trajectory horizon")
        ->capture_default_str();
    tsni_cmd->add_option("--max-horizon", tsni_cfg.max_horizon,
                         "maximum allowed horizon")
        ->capture_default_str();
    tsni_cmd->add_option("--cap", tsni_cfg.cap,
                         "maximum trajectory space cardinality")
        ->capture_default_str();
    tsni_cmd->add_option("--user", tsni_cfg.user_symbols,
                         "user-state alphabet, comma-separated");
    tsni_cmd->add_option("--action", tsni_cfg.action_symbols,
                         "action alphabet, comma-separated");
    tsni_cmd->add_option("--risk", tsni_cfg.risk_symbols,
                         "risk alphabet, comma-separated");

    ScopeConfig scope_cfg;
    CLI::App* scope_cmd = app.add_subcommand(
        "scope", "validate and render reporting cards against evidence");
    add_common(scope_cmd, scope_cfg.common, false);
    scope_cmd->add_option("--card", scope_cfg.card_path, "card JSON file");
    scope_cmd->add_option("--catalog", scope_cfg.catalog_path,
                          "determinant catalog JSON (default: built-in)");
    scope_cmd->add_flag("--from-audit", scope_cfg.from_audit,
                        "build the card from the audit pipeline's evidence "
                        "(requires --input)");
    scope_cmd->add_option("--claim", scope_cfg.claims,
                          "claimed dimension (repeatable, with --from-audit)");
    scope_cmd->add_flag("--warn-only", scope_cfg.warn_only,
                        "exit 0 even when claims are unsupported");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*analyze) return run_analyze(analyze_cfg);
        if (*detect) {
            if (theta_pt_opt->count()) detect_cfg.theta_pt = theta_pt_value;
            return run_detect(detect_cfg);
        }
        if (*case_cmd) return run_case(case_cfg);
        if (*tsni_cmd) return run_tsni(tsni_cfg);
        if (*scope_cmd) return run_scope(scope_cfg);
    } catch (const IngestError& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return kExitIngest;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    }
    return kExitConfig;
}
