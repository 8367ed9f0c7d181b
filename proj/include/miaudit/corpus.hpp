#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace miaudit {

enum class Speaker { therapist, client };
enum class Quality { high, low };
enum class Behavior { reflection, question, therapist_input, other };
enum class TalkType { change, neutral, sustain };

const char* to_string(Speaker s);
const char* to_string(Quality q);
const char* to_string(Behavior b);
const char* to_string(TalkType t);

/// One annotated utterance. Behavior labels belong to therapist turns,
/// talk-type labels to client turns; the opposite column is ignored on
/// ingestion so the invariants hold by construction.
struct Utterance {
    std::string conversation_id;
    long order_index = 0;
    Speaker speaker = Speaker::therapist;
    std::optional<Behavior> behavior;   // therapist turns only
    std::optional<TalkType> talk_type;  // labeled client turns only
    std::string text;
};

struct TherapistTurn {
    long order_index = 0;
    std::optional<Behavior> behavior;
};

struct ClientTurn {
    long order_index = 0;
    TalkType talk_type = TalkType::neutral;
};

/// A conversation with utterances sorted ascending by order_index and two
/// derived views: therapist turns and labeled client turns, both in order.
struct Conversation {
    std::string id;
    Quality quality = Quality::high;
    std::vector<Utterance> utterances;
    std::vector<TherapistTurn> therapist_turns;
    std::vector<ClientTurn> labeled_client;
    std::size_t ingest_order = 0;  // first appearance in the source file

    long n_labeled() const { return static_cast<long>(labeled_client.size()); }
    std::vector<TalkType> labeled_client_turns() const;
};

struct ExcludedConversation {
    Conversation conversation;
    std::string reason;
};

/// Conversations partitioned by the exclusion rule: conversations with
/// fewer than kMinLabeledClientTurns labeled client turns are excluded.
struct Corpus {
    std::vector<Conversation> included;
    std::vector<ExcludedConversation> excluded;
    long warning_count = 0;  // unrecognized behavior/talk-type values

    long total() const {
        return static_cast<long>(included.size() + excluded.size());
    }
    long high_included() const;
    long low_included() const;
    long excluded_count() const { return static_cast<long>(excluded.size()); }

    const Conversation* find_included(std::string_view id) const;
    const ExcludedConversation* find_excluded(std::string_view id) const;

    /// Turn counts (all utterances) per conversation, included and excluded.
    std::vector<long> turn_counts() const;
};

inline constexpr long kMinLabeledClientTurns = 4;

/// Resolves source columns by header name. Defaults match the public
/// AnnoMI release.
struct ColumnMapping {
    std::string conversation_id = "transcript_id";
    std::string quality = "mi_quality";
    std::string order = "utterance_id";
    std::string speaker = "interlocutor";
    std::string behavior = "main_therapist_behaviour";
    std::string talk_type = "client_talk_type";
    std::string text = "utterance_text";  // optional; empty text if absent

    /// Applies "field=column" overrides, e.g. {"quality=rating"}.
    void apply_overrides(const std::vector<std::string>& overrides);
};

/// Ingests delimiter-separated text with a header row and partitions the
/// conversations by the exclusion rule. Unrecognized behavior/talk-type
/// values are kept unlabeled and counted in warning_count; explicit absent
/// markers ("", "n/a", "na", "none") are unlabeled without a warning.
/// Throws IngestError on malformed header, missing mapped columns,
/// duplicate (conversation, order_index) pairs, unknown speaker or quality
/// values, or empty input.
Corpus ingest(std::string_view source, const ColumnMapping& mapping = {},
              char delim = ',');

Corpus ingest_file(const std::string& path, const ColumnMapping& mapping = {},
                   char delim = ',');

/// Canonical tabular emission with the default column names. Re-ingesting
/// the result reproduces the corpus (partitions, ordering, and labels).
std::string export_tabular(const Corpus& corpus, char delim = ',');

/// Line-delimited structured records: a schema/version header record
/// followed by one conversation record per line.
std::string dump_records(const Corpus& corpus);

/// Splits labeled client turns at the midpoint: first = turns 1..floor(n/2),
/// second = the rest. Throws ValidationError when n < 2.
std::pair<std::vector<TalkType>, std::vector<TalkType>>
split_client_halves(const Conversation& conv);

/// Therapist turns occurring before the second client half begins, i.e.
/// with order_index strictly below that of labeled client turn
/// floor(n/2)+1. Returns all therapist turns when every one precedes that
/// point, and an empty sequence when there are none.
std::vector<TherapistTurn> first_half_therapist_turns(const Conversation& conv);

}  // namespace miaudit
