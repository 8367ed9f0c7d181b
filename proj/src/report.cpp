#include "miaudit/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "miaudit/common.hpp"
#include "miaudit/csv.hpp"

namespace miaudit::report {

using nlohmann::json;

std::string fmt3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fmt_p(double p) { return p < 0.001 ? "<0.001" : fmt3(p); }

namespace {

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string opt6(const std::optional<double>& v) {
    return v ? fmt6(*v) : "";
}

}  // namespace

GroupSamples group_samples(const Corpus& corpus,
                           std::span<const MetricVector> vectors, MetricId id,
                           CensoringMode mode) {
    std::vector<MetricVector> high, low;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (corpus.included[i].quality == Quality::high)
            high.push_back(vectors[i]);
        else
            low.push_back(vectors[i]);
    }
    return {metric_sample(high, id, mode), metric_sample(low, id, mode)};
}

std::vector<GroupComparison> build_comparisons(
    const Corpus& corpus, std::span<const MetricVector> vectors,
    CensoringMode mode, TTestKind kind) {
    std::vector<GroupComparison> rows;
    for (const MetricSpec& spec : metric_table()) {
        GroupSamples samples = group_samples(corpus, vectors, spec.id, mode);
        try {
            rows.push_back(
                compare_groups(samples.high, samples.low, spec.key, kind));
        } catch (const ValidationError&) {
            // degenerate or too-small sample: row omitted
        }
    }
    return rows;
}

OrientedScores oriented_scores(const Corpus& corpus,
                               std::span<const MetricVector> vectors,
                               MetricId id) {
    const MetricSpec& spec = metric_spec(id);
    OrientedScores out;
    std::vector<double> values =
        metric_sample(vectors, id, CensoringMode::include_censored);
    // metric_sample skips undefined per-turn scores, so rebuild alignment
    std::size_t vi = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        bool defined = id != MetricId::per_turn || vectors[i].per_turn.has_value();
        if (!defined) continue;
        out.scores.push_back(spec.risk_sign * values[vi++]);
        out.labels.push_back(corpus.included[i].quality == Quality::low ? 1 : 0);
    }
    return out;
}

std::string metrics_csv(const Corpus& corpus,
                        std::span<const MetricVector> vectors, char delim) {
    std::string out = schema_line("metrics") + "\n";
    out += csv::format_row(
        {"conversation_id", "quality", "n_labeled", "per_turn",
         "midpoint_per_turn", "sustain_delta", "temporal_score", "t_dom",
         "censored", "t_norm", "s_max", "ew_delta", "c1", "c2", "s1", "s2"},
        delim);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const MetricVector& m = vectors[i];
        out += csv::format_row(
            {m.conversation_id, to_string(corpus.included[i].quality),
             std::to_string(m.n_labeled), opt6(m.per_turn),
             opt6(m.midpoint_per_turn), fmt6(m.sustain_delta),
             fmt6(m.temporal_score), std::to_string(m.t_dom),
             m.censored ? "1" : "0", fmt6(m.t_norm), std::to_string(m.s_max),
             fmt6(m.ew_delta), fmt6(m.halves.c1), fmt6(m.halves.c2),
             fmt6(m.halves.s1), fmt6(m.halves.s2)},
            delim);
    }
    return out;
}

std::string metrics_jsonl(const Corpus& corpus,
                          std::span<const MetricVector> vectors) {
    std::string out =
        json{{"schema", "miaudit/metrics"}, {"version", kSchemaVersion}}.dump() +
        "\n";
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const MetricVector& m = vectors[i];
        json j{{"conversation_id", m.conversation_id},
               {"quality", to_string(corpus.included[i].quality)},
               {"n_labeled", m.n_labeled},
               {"sustain_delta", m.sustain_delta},
               {"temporal_score", m.temporal_score},
               {"t_dom", m.t_dom},
               {"censored", m.censored},
               {"t_norm", m.t_norm},
               {"s_max", m.s_max},
               {"ew_delta", m.ew_delta},
               {"half_ratios",
                {{"c1", m.halves.c1},
                 {"c2", m.halves.c2},
                 {"s1", m.halves.s1},
                 {"s2", m.halves.s2}}}};
        j["per_turn"] = m.per_turn ? json(*m.per_turn) : json(nullptr);
        j["midpoint_per_turn"] =
            m.midpoint_per_turn ? json(*m.midpoint_per_turn) : json(nullptr);
        out += j.dump() + "\n";
    }
    return out;
}

namespace {

const char* display_name(const std::string& key) {
    if (auto id = metric_id_from_key(key)) return metric_spec(*id).display;
    return key.c_str();
}

const char* type_label(const std::string& key) {
    if (auto id = metric_id_from_key(key)) return metric_spec(*id).type_label;
    return "";
}

}  // namespace

std::string comparisons_csv(std::span<const GroupComparison> rows,
                            CensoringMode mode, char delim) {
    std::string out = schema_line("comparisons") + "\n";
    out += csv::format_row({"metric", "type", "censoring", "mean_high",
                            "mean_low", "diff", "t_stat", "t_p", "cohens_d",
                            "mw_u", "mw_p", "n_high", "n_low"},
                           delim);
    for (const GroupComparison& row : rows) {
        out += csv::format_row(
            {row.metric_name, type_label(row.metric_name), to_string(mode),
             fmt6(row.mean_high), fmt6(row.mean_low), fmt6(row.diff),
             fmt6(row.t_stat), fmt6(row.t_p_value), fmt6(row.cohens_d),
             fmt6(row.mw_u), fmt6(row.mw_p_value), std::to_string(row.n_high),
             std::to_string(row.n_low)},
            delim);
    }
    return out;
}

std::string detection_csv(std::span<const DetectionOutcome> outcomes,
                          char delim) {
    std::string out = schema_line("detection") + "\n";
    out += csv::format_row(
        {"method", "threshold", "detected", "n_low", "detection_rate",
         "false_alarms", "n_high", "false_alarm_rate", "precision", "recall",
         "f1", "flagged"},
        delim);
    for (const DetectionOutcome& o : outcomes) {
        std::string flagged;
        for (std::size_t i = 0; i < o.flagged.size(); ++i) {
            if (i) flagged += ";";
            flagged += o.flagged[i];
        }
        out += csv::format_row(
            {to_string(o.method),
             std::isnan(o.threshold) ? "" : fmt6(o.threshold),
             std::to_string(o.detected), std::to_string(o.n_low),
             fmt6(o.detection_rate), std::to_string(o.false_alarms),
             std::to_string(o.n_high), fmt6(o.false_alarm_rate),
             fmt6(o.precision), fmt6(o.recall), fmt6(o.f1), flagged},
            delim);
    }
    return out;
}

std::string sweep_csv(const SweepResult& sweep, char delim) {
    std::string out = schema_line("sweep") + "\n";
    out += csv::format_row({"threshold", "f1", "detected", "false_alarms"},
                           delim);
    for (const SweepPoint& p : sweep.grid)
        out += csv::format_row({fmt6(p.threshold), fmt6(p.f1),
                                std::to_string(p.detected),
                                std::to_string(p.false_alarms)},
                               delim);
    return out;
}

std::string curve_csv(const CurveResult& curve, char delim) {
    std::string out = schema_line("curve") + "\n";
    bool roc = curve.kind == CurveKind::roc;
    out += csv::format_row(
        {roc ? "false_positive_rate" : "recall", roc ? "true_positive_rate" : "precision"},
        delim);
    for (const CurvePoint& p : curve.points)
        out += csv::format_row({fmt6(p.x), fmt6(p.y)}, delim);
    return out;
}

std::string bootstrap_csv(std::span<const BootstrapCI> cis, char delim) {
    std::string out = schema_line("bootstrap") + "\n";
    out += csv::format_row({"statistic", "point", "ci_lo", "ci_hi", "resamples",
                            "seed"},
                           delim);
    for (const BootstrapCI& ci : cis)
        out += csv::format_row({ci.statistic_name, fmt6(ci.point), fmt6(ci.lo),
                                fmt6(ci.hi), std::to_string(ci.resamples),
                                std::to_string(ci.seed)},
                               delim);
    return out;
}

std::string comparison_table_markdown(std::span<const GroupComparison> rows) {
    std::string out =
        "| Metric | Type | High | Low | Diff | p | Cohen's d |\n"
        "|---|---|---|---|---|---|---|\n";
    for (const GroupComparison& row : rows) {
        std::string diff = (row.diff >= 0 ? "+" : "") + fmt3(row.diff);
        out += "| " + std::string(display_name(row.metric_name)) + " | " +
               type_label(row.metric_name) + " | " + fmt3(row.mean_high) +
               " | " + fmt3(row.mean_low) + " | " + diff + " | " +
               fmt_p(row.t_p_value) + " | " + fmt3(row.cohens_d) + " |\n";
    }
    return out;
}

std::string mann_whitney_table_markdown(std::span<const GroupComparison> rows) {
    std::string out =
        "| Metric | U statistic | p (t-test) | p (Mann-Whitney) |\n"
        "|---|---|---|---|\n";
    for (const GroupComparison& row : rows)
        out += "| " + std::string(display_name(row.metric_name)) + " | " +
               fmt3(row.mw_u) + " | " + fmt_p(row.t_p_value) + " | " +
               fmt_p(row.mw_p_value) + " |\n";
    return out;
}

std::string detection_table_markdown(
    std::span<const DetectionOutcome> outcomes) {
    auto pct = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.0f%%", v * 100.0);
        return std::string(buf);
    };
    std::string out =
        "| Method | Detected | Detection rate | False alarms | False alarm "
        "rate |\n|---|---|---|---|---|\n";
    for (const DetectionOutcome& o : outcomes) {
        std::string name;
        switch (o.method) {
            case DetectionMethod::per_turn:
            case DetectionMethod::early_warning_per_turn:
                name = "Per-turn behavior baseline";
                break;
            case DetectionMethod::temporal:
            case DetectionMethod::early_warning_temporal:
                name = "Temporal signal";
                break;
            case DetectionMethod::combined:
                name = "Combined (either)";
                break;
        }
        out += "| " + name + " | " + std::to_string(o.detected) + "/" +
               std::to_string(o.n_low) + " | " + pct(o.detection_rate) + " | " +
               std::to_string(o.false_alarms) + "/" + std::to_string(o.n_high) +
               " | " + pct(o.false_alarm_rate) + " |\n";
    }
    return out;
}

std::string case_markdown(const CaseTrace& trace, const MetricVector& metrics) {
    std::string out = "<!-- " + schema_line("case") + " -->\n";
    out += "# Case trace: conversation " + trace.conversation_id + "\n\n";
    out += "Labeled client turns (" +
           std::to_string(trace.talk_type_sequence.size()) + "): ";
    for (std::size_t i = 0; i < trace.talk_type_sequence.size(); ++i) {
        if (i) out += " ";
        out += to_string(trace.talk_type_sequence[i]);
    }
    out += "\n\n## Half split\n\n";
    out += "| Quantity | First half | Second half |\n|---|---|---|\n";
    out += "| Change-talk ratio | " + fmt3(metrics.halves.c1) + " | " +
           fmt3(metrics.halves.c2) + " |\n";
    out += "| Sustain-talk ratio | " + fmt3(metrics.halves.s1) + " | " +
           fmt3(metrics.halves.s2) + " |\n";
    out += "| Change-talk count | " + std::to_string(trace.change_count_first) +
           " | " + std::to_string(trace.change_count_second) + " |\n";
    out += "\n## Scores\n\n";
    out += "- per-turn score: " +
           (metrics.per_turn ? fmt3(*metrics.per_turn) : "undefined") + "\n";
    out += "- sustain-talk delta: " + fmt3(metrics.sustain_delta) + "\n";
    out += "- temporal score: " + fmt3(metrics.temporal_score) + "\n";
    out += "- early-warning score: " + fmt3(metrics.ew_delta) + "\n";
    out += "- first sustain dominance: " + std::to_string(metrics.t_dom) +
           (metrics.censored ? " (censored)" : "") + "\n";
    out += "- max sustain streak: " + std::to_string(metrics.s_max) + "\n";
    out += "\n## Diagnostics\n\n";
    out += "- longest neutral run: " +
           std::to_string(trace.longest_neutral_run) + "\n";
    out += "- backslide index (c1 - c2): " + fmt3(trace.backslide_index) + "\n";
    out += "- sustain runs (start, length):";
    if (trace.sustain_runs.empty()) {
        out += " none";
    } else {
        for (const SustainRun& run : trace.sustain_runs)
            out += " (" + std::to_string(run.start) + ", " +
                   std::to_string(run.length) + ")";
    }
    out += "\n";
    return out;
}

std::string case_json(const CaseTrace& trace, const MetricVector& metrics) {
    json runs = json::array();
    for (const SustainRun& run : trace.sustain_runs)
        runs.push_back({{"start", run.start}, {"length", run.length}});
    json seq = json::array();
    for (TalkType t : trace.talk_type_sequence) seq.push_back(to_string(t));
    json j{{"schema", "miaudit/case"},
           {"version", kSchemaVersion},
           {"conversation_id", trace.conversation_id},
           {"talk_type_sequence", seq},
           {"sustain_runs", runs},
           {"longest_neutral_run", trace.longest_neutral_run},
           {"change_counts_by_half",
            {trace.change_count_first, trace.change_count_second}},
           {"sustain_ratios_by_half",
            {trace.sustain_ratio_first, trace.sustain_ratio_second}},
           {"backslide_index", trace.backslide_index},
           {"sustain_delta", metrics.sustain_delta},
           {"temporal_score", metrics.temporal_score},
           {"ew_delta", metrics.ew_delta},
           {"t_dom", metrics.t_dom},
           {"censored", metrics.censored},
           {"s_max", metrics.s_max}};
    j["per_turn"] = metrics.per_turn ? json(*metrics.per_turn) : json(nullptr);
    return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path);
    out << content;
    if (!out) throw ConfigError("failed writing output file: " + path);
}

}  // namespace miaudit::report
