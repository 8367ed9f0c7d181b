#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace miaudit::scope {

enum class Dimension {
    longitudinal_consistency,
    harm_accumulation,
    intervention_timing,
    recovery_capability,
    referral_correctness,
};

enum class Horizon { one_turn, one_dialogue, multi_session, longitudinal };
enum class Unit { response, dialogue, user, episode, system_version, population };
enum class OutcomeLinkage { linked, endpoint_only, none };

const char* to_string(Dimension d);
const char* to_string(Horizon h);
const char* to_string(Unit u);
const char* to_string(OutcomeLinkage o);
std::optional<Dimension> dimension_from_string(const std::string& s);

/// Determinant vocabulary, per-dimension requirements, and the mapping
/// from pipeline outputs to determinants. The vocabulary is closed:
/// validation rejects identifiers outside it.
struct Catalog {
    int version = 0;
    std::map<std::string, std::string> determinants;  // id -> description
    std::map<Dimension, std::set<std::string>> requirements;
    std::map<std::string, std::set<std::string>> audit_mapping;

    bool has_determinant(const std::string& id) const {
        return determinants.count(id) > 0;
    }
};

/// The shipped default catalog (identical to data/scope_catalog.json).
const Catalog& default_catalog();
Catalog parse_catalog(const std::string& json_text);
Catalog load_catalog(const std::string& path);

/// The eight-field disclosure card. unsupported_claims is always derived
/// by validation and is rejected when author-supplied.
struct ScopeCard {
    std::vector<Dimension> claimed_dimensions;
    std::string claim_text;
    Horizon horizon = Horizon::one_dialogue;
    Unit unit = Unit::dialogue;
    std::set<std::string> temporal_determinants;
    std::set<std::string> preserved_evidence;
    OutcomeLinkage outcome_linkage = OutcomeLinkage::none;
    std::string privacy_text;
    bool privacy_retention = false;
    bool privacy_aggregation = false;
};

ScopeCard parse_card(const std::string& json_text);
ScopeCard load_card(const std::string& path);
std::string card_to_json(const ScopeCard& card);

struct ClaimFinding {
    Dimension dimension;
    bool supported = false;
    std::vector<std::string> missing;  // required determinants not preserved
};

struct ValidationReport {
    std::vector<ClaimFinding> findings;  // one per claimed dimension, in order

    bool all_supported() const;
    std::vector<Dimension> unsupported() const;
};

/// A claim is supported iff every required determinant of its dimension is
/// in preserved_evidence. Throws ValidationError on determinant identifiers
/// outside the catalog vocabulary.
ValidationReport validate_card(const ScopeCard& card, const Catalog& catalog);

/// Byte-deterministic markdown: the eight-field disclosure table with the
/// derived unsupported-claims row, then per-claim findings.
std::string render_card(const ScopeCard& card, const ValidationReport& report);

/// Builds a card from what the audit pipeline actually computed:
/// preserved_evidence is the image of the output keys under the catalog's
/// audit mapping; temporal_determinants are the claimed dimensions'
/// requirements.
ScopeCard card_from_audit(const std::vector<std::string>& computed_outputs,
                          const std::vector<Dimension>& declared_claims,
                          const Catalog& catalog);

}  // namespace miaudit::scope
