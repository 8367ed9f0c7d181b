#include "miaudit/scope.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "miaudit/common.hpp"

namespace miaudit::scope {

using nlohmann::json;

const char* to_string(Dimension d) {
    switch (d) {
        case Dimension::longitudinal_consistency: return "longitudinal_consistency";
        case Dimension::harm_accumulation: return "harm_accumulation";
        case Dimension::intervention_timing: return "intervention_timing";
        case Dimension::recovery_capability: return "recovery_capability";
        case Dimension::referral_correctness: return "referral_correctness";
    }
    return "harm_accumulation";
}

const char* to_string(Horizon h) {
    switch (h) {
        case Horizon::one_turn: return "one_turn";
        case Horizon::one_dialogue: return "one_dialogue";
        case Horizon::multi_session: return "multi_session";
        case Horizon::longitudinal: return "longitudinal";
    }
    return "one_dialogue";
}

const char* to_string(Unit u) {
    switch (u) {
        case Unit::response: return "response";
        case Unit::dialogue: return "dialogue";
        case Unit::user: return "user";
        case Unit::episode: return "episode";
        case Unit::system_version: return "system_version";
        case Unit::population: return "population";
    }
    return "dialogue";
}

const char* to_string(OutcomeLinkage o) {
    switch (o) {
        case OutcomeLinkage::linked: return "linked";
        case OutcomeLinkage::endpoint_only: return "endpoint_only";
        case OutcomeLinkage::none: return "none";
    }
    return "none";
}

std::optional<Dimension> dimension_from_string(const std::string& s) {
    for (Dimension d :
         {Dimension::longitudinal_consistency, Dimension::harm_accumulation,
          Dimension::intervention_timing, Dimension::recovery_capability,
          Dimension::referral_correctness})
        if (s == to_string(d)) return d;
    return std::nullopt;
}

namespace {

template <typename Enum>
Enum enum_from(const std::string& value, const char* field,
               std::initializer_list<Enum> all) {
    for (Enum e : all)
        if (value == to_string(e)) return e;
    throw ValidationError(std::string("unknown value '") + value +
                          "' for card field '" + field + "'");
}

// Shipped default catalog; data/scope_catalog.json carries the same content
// and a test keeps the two in sync.
constexpr const char* kDefaultCatalogJson = R"JSON({
  "schema": "miaudit/scope-catalog",
  "version": 1,
  "determinants": {
    "stance_shifts": "Stance shifts across the interaction",
    "contradictions": "Contradictions between system statements over time",
    "boundary_drift": "Boundary drift across turns or sessions",
    "policy_inconsistency": "Policy inconsistency as context evolves",
    "repeated_reinforcement": "Repeated reinforcement of maladaptive responses",
    "dependency_signals": "Dependency or over-reliance signals",
    "cumulative_risk_markers": "Cumulative risk markers in user language",
    "worsening_user_state": "Worsening user-state indicators across the interaction",
    "escalation_latency": "Escalation latency from first risk cue to appropriate intervention",
    "risk_onset_timing": "Timing of risk onset in user language",
    "acknowledgment": "Acknowledgment of an unsafe or miscalibrated response",
    "correction": "Correction after an unsafe or miscalibrated response",
    "redirection": "Redirection following a failed or unsafe exchange",
    "stabilization": "Stabilization of the interaction after repair",
    "subsequent_user_state_change": "User-state change following repair",
    "referral_timing": "Referral timing relative to severity",
    "referral_specificity": "Referral specificity and actionability",
    "severity_alignment": "Alignment of referral with severity",
    "continuity": "Continuity of care around referral",
    "unsafe_disengagement": "Unsafe disengagement after referral",
    "final_symptom_score": "Endpoint symptom score",
    "average_response_rating": "Average per-response quality rating",
    "satisfaction_score": "Endpoint satisfaction score",
    "engagement_summary": "Aggregate engagement summary",
    "adverse_event_count": "Count of recorded adverse events"
  },
  "requirements": {
    "longitudinal_consistency": ["stance_shifts", "contradictions", "boundary_drift"],
    "harm_accumulation": ["cumulative_risk_markers", "worsening_user_state"],
    "intervention_timing": ["escalation_latency"],
    "recovery_capability": ["acknowledgment", "correction", "redirection"],
    "referral_correctness": ["referral_timing", "referral_specificity", "severity_alignment"]
  },
  "audit_mapping": {
    "per_turn": [],
    "sustain_delta": ["cumulative_risk_markers"],
    "temporal_score": ["worsening_user_state"],
    "s_max": ["cumulative_risk_markers"],
    "t_dom": ["risk_onset_timing"],
    "t_norm": ["risk_onset_timing"],
    "ew_delta": ["risk_onset_timing"],
    "case_trace": ["worsening_user_state"]
  }
})JSON";

json parse_json_or_throw(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ValidationError(std::string("malformed JSON in ") + what);
    return j;
}

}  // namespace

Catalog parse_catalog(const std::string& json_text) {
    json j = parse_json_or_throw(json_text, "catalog");
    Catalog catalog;
    catalog.version = j.value("version", 0);
    for (auto& [id, desc] : j.at("determinants").items())
        catalog.determinants[id] = desc.get<std::string>();
    for (auto& [dim_name, ids] : j.at("requirements").items()) {
        auto dim = dimension_from_string(dim_name);
        if (!dim)
            throw ValidationError("unknown dimension in catalog: " + dim_name);
        std::set<std::string>& required = catalog.requirements[*dim];
        for (const auto& id : ids) required.insert(id.get<std::string>());
        if (required.empty())
            throw ValidationError("dimension " + dim_name +
                                  " has no required determinants");
    }
    for (auto& [key, ids] : j.at("audit_mapping").items()) {
        std::set<std::string>& mapped = catalog.audit_mapping[key];
        for (const auto& id : ids) mapped.insert(id.get<std::string>());
    }
    for (const auto& [dim, ids] : catalog.requirements)
        for (const auto& id : ids)
            if (!catalog.has_determinant(id))
                throw ValidationError("requirement uses unknown determinant: " + id);
    for (const auto& [key, ids] : catalog.audit_mapping)
        for (const auto& id : ids)
            if (!catalog.has_determinant(id))
                throw ValidationError("audit mapping uses unknown determinant: " +
                                      id);
    return catalog;
}

const Catalog& default_catalog() {
    static const Catalog catalog = parse_catalog(kDefaultCatalogJson);
    return catalog;
}

Catalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open catalog file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_catalog(buf.str());
}

ScopeCard parse_card(const std::string& json_text) {
    json j = parse_json_or_throw(json_text, "scope card");
    if (j.contains("unsupported_claims"))
        throw ValidationError(
            "card field 'unsupported_claims' is derived and must not be "
            "author-supplied");
    for (const char* field :
         {"safety_claim", "evaluation_horizon", "unit_of_analysis",
          "temporal_determinants", "preserved_evidence", "outcome_linkage",
          "privacy_constraints"})
        if (!j.contains(field))
            throw ValidationError(std::string("card missing required field '") +
                                  field + "'");

    ScopeCard card;
    const json& claim = j.at("safety_claim");
    for (const auto& name : claim.at("dimensions")) {
        auto dim = dimension_from_string(name.get<std::string>());
        if (!dim)
            throw ValidationError("unknown dimension identifier: " +
                                  name.get<std::string>());
        card.claimed_dimensions.push_back(*dim);
    }
    card.claim_text = claim.value("text", "");
    card.horizon = enum_from<Horizon>(
        j.at("evaluation_horizon").get<std::string>(), "evaluation_horizon",
        {Horizon::one_turn, Horizon::one_dialogue, Horizon::multi_session,
         Horizon::longitudinal});
    card.unit = enum_from<Unit>(
        j.at("unit_of_analysis").get<std::string>(), "unit_of_analysis",
        {Unit::response, Unit::dialogue, Unit::user, Unit::episode,
         Unit::system_version, Unit::population});
    for (const auto& id : j.at("temporal_determinants"))
        card.temporal_determinants.insert(id.get<std::string>());
    for (const auto& id : j.at("preserved_evidence"))
        card.preserved_evidence.insert(id.get<std::string>());
    card.outcome_linkage = enum_from<OutcomeLinkage>(
        j.at("outcome_linkage").get<std::string>(), "outcome_linkage",
        {OutcomeLinkage::linked, OutcomeLinkage::endpoint_only,
         OutcomeLinkage::none});
    const json& privacy = j.at("privacy_constraints");
    card.privacy_text = privacy.value("text", "");
    card.privacy_retention = privacy.value("retention", false);
    card.privacy_aggregation = privacy.value("aggregation", false);
    return card;
}

ScopeCard load_card(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open card file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_card(buf.str());
}

std::string card_to_json(const ScopeCard& card) {
    json dims = json::array();
    for (Dimension d : card.claimed_dimensions) dims.push_back(to_string(d));
    json j{{"schema", "miaudit/scope-card"},
           {"version", kSchemaVersion},
           {"safety_claim", {{"dimensions", dims}, {"text", card.claim_text}}},
           {"evaluation_horizon", to_string(card.horizon)},
           {"unit_of_analysis", to_string(card.unit)},
           {"temporal_determinants", card.temporal_determinants},
           {"preserved_evidence", card.preserved_evidence},
           {"outcome_linkage", to_string(card.outcome_linkage)},
           {"privacy_constraints",
            {{"text", card.privacy_text},
             {"retention", card.privacy_retention},
             {"aggregation", card.privacy_aggregation}}}};
    return j.dump(2);
}

bool ValidationReport::all_supported() const {
    for (const ClaimFinding& f : findings)
        if (!f.supported) return false;
    return true;
}

std::vector<Dimension> ValidationReport::unsupported() const {
    std::vector<Dimension> out;
    for (const ClaimFinding& f : findings)
        if (!f.supported) out.push_back(f.dimension);
    return out;
}

ValidationReport validate_card(const ScopeCard& card, const Catalog& catalog) {
    for (const auto& id : card.temporal_determinants)
        if (!catalog.has_determinant(id))
            throw ValidationError("unknown determinant identifier: " + id);
    for (const auto& id : card.preserved_evidence)
        if (!catalog.has_determinant(id))
            throw ValidationError("unknown determinant identifier: " + id);

    ValidationReport report;
    for (Dimension dim : card.claimed_dimensions) {
        auto it = catalog.requirements.find(dim);
        if (it == catalog.requirements.end())
            throw ValidationError(std::string("catalog lacks requirements for "
                                              "dimension ") +
                                  to_string(dim));
        ClaimFinding finding;
        finding.dimension = dim;
        for (const std::string& required : it->second)
            if (!card.preserved_evidence.count(required))
                finding.missing.push_back(required);
        finding.supported = finding.missing.empty();
        report.findings.push_back(std::move(finding));
    }
    return report;
}

namespace {

std::string join(const std::set<std::string>& items) {
    if (items.empty()) return "(none)";
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ", ";
        out += item;
    }
    return out;
}

}  // namespace

std::string render_card(const ScopeCard& card, const ValidationReport& report) {
    if (report.findings.size() != card.claimed_dimensions.size())
        throw ValidationError("render_card requires the card's validation report");

    std::string claims;
    for (std::size_t i = 0; i < card.claimed_dimensions.size(); ++i) {
        if (i) claims += ", ";
        claims += to_string(card.claimed_dimensions[i]);
    }
    if (claims.empty()) claims = "(none)";
    if (!card.claim_text.empty()) claims += " — " + card.claim_text;

    std::string unsupported;
    for (const ClaimFinding& f : report.findings) {
        if (f.supported) continue;
        if (!unsupported.empty()) unsupported += "; ";
        unsupported += std::string(to_string(f.dimension)) + " (missing: ";
        for (std::size_t i = 0; i < f.missing.size(); ++i) {
            if (i) unsupported += ", ";
            unsupported += f.missing[i];
        }
        unsupported += ")";
    }
    if (unsupported.empty()) unsupported = "(none)";

    std::string out = "<!-- " + schema_line("scope-card") + " -->\n";
    out += "# SCOPE card\n\n";
    out += "| Field | Disclosure |\n|---|---|\n";
    out += "| Safety claim | " + claims + " |\n";
    out += "| Evaluation horizon | " + std::string(to_string(card.horizon)) + " |\n";
    out += "| Unit of analysis | " + std::string(to_string(card.unit)) + " |\n";
    out += "| Temporal determinants | " + join(card.temporal_determinants) + " |\n";
    out += "| Preserved evidence | " + join(card.preserved_evidence) + " |\n";
    out += "| Unsupported claims | " + unsupported + " |\n";
    out += "| Outcome linkage | " + std::string(to_string(card.outcome_linkage)) + " |\n";
    std::string privacy = card.privacy_text.empty() ? "(unspecified)" : card.privacy_text;
    privacy += std::string(" [retention: ") + (card.privacy_retention ? "yes" : "no") +
               ", aggregation: " + (card.privacy_aggregation ? "yes" : "no") + "]";
    out += "| Privacy constraints | " + privacy + " |\n";

    out += "\n## Claim findings\n\n";
    if (report.findings.empty()) {
        out += "- no dimensions claimed; vacuously valid\n";
    } else {
        for (const ClaimFinding& f : report.findings) {
            out += std::string("- ") + to_string(f.dimension) + ": ";
            if (f.supported) {
                out += "supported\n";
            } else {
                out += "unsupported — missing ";
                for (std::size_t i = 0; i < f.missing.size(); ++i) {
                    if (i) out += ", ";
                    out += f.missing[i];
                }
                out += "\n";
            }
        }
    }
    return out;
}

ScopeCard card_from_audit(const std::vector<std::string>& computed_outputs,
                          const std::vector<Dimension>& declared_claims,
                          const Catalog& catalog) {
    ScopeCard card;
    card.claimed_dimensions = declared_claims;
    card.claim_text = "claims validated against evidence preserved by the "
                      "dialogue audit pipeline";
    card.horizon = Horizon::one_dialogue;
    card.unit = Unit::dialogue;
    for (const std::string& key : computed_outputs) {
        auto it = catalog.audit_mapping.find(key);
        if (it == catalog.audit_mapping.end())
            throw ValidationError("no audit mapping for pipeline output: " + key);
        card.preserved_evidence.insert(it->second.begin(), it->second.end());
    }
    for (Dimension dim : declared_claims) {
        auto it = catalog.requirements.find(dim);
        if (it != catalog.requirements.end())
            card.temporal_determinants.insert(it->second.begin(), it->second.end());
    }
    card.outcome_linkage = OutcomeLinkage::none;
    card.privacy_text =
        "expert-annotated public transcripts; aggregate statistics only";
    card.privacy_aggregation = true;
    return card;
}

}  // namespace miaudit::scope
