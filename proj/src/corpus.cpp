#include "miaudit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "miaudit/common.hpp"
#include "miaudit/csv.hpp"

namespace miaudit {

const char* to_string(Speaker s) {
    return s == Speaker::therapist ? "therapist" : "client";
}
const char* to_string(Quality q) { return q == Quality::high ? "high" : "low"; }
const char* to_string(Behavior b) {
    switch (b) {
        case Behavior::reflection: return "reflection";
        case Behavior::question: return "question";
        case Behavior::therapist_input: return "therapist_input";
        case Behavior::other: return "other";
    }
    return "other";
}
const char* to_string(TalkType t) {
    switch (t) {
        case TalkType::change: return "change";
        case TalkType::neutral: return "neutral";
        case TalkType::sustain: return "sustain";
    }
    return "neutral";
}

std::vector<TalkType> Conversation::labeled_client_turns() const {
    std::vector<TalkType> out;
    out.reserve(labeled_client.size());
    for (const auto& turn : labeled_client) out.push_back(turn.talk_type);
    return out;
}

long Corpus::high_included() const {
    return static_cast<long>(std::count_if(
        included.begin(), included.end(),
        [](const Conversation& c) { return c.quality == Quality::high; }));
}

long Corpus::low_included() const {
    return static_cast<long>(included.size()) - high_included();
}

const Conversation* Corpus::find_included(std::string_view id) const {
    for (const auto& conv : included)
        if (conv.id == id) return &conv;
    return nullptr;
}

const ExcludedConversation* Corpus::find_excluded(std::string_view id) const {
    for (const auto& rec : excluded)
        if (rec.conversation.id == id) return &rec;
    return nullptr;
}

std::vector<long> Corpus::turn_counts() const {
    std::vector<long> counts;
    counts.reserve(included.size() + excluded.size());
    for (const auto& conv : included)
        counts.push_back(static_cast<long>(conv.utterances.size()));
    for (const auto& rec : excluded)
        counts.push_back(static_cast<long>(rec.conversation.utterances.size()));
    return counts;
}

void ColumnMapping::apply_overrides(const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("column override must be field=column: " + item);
        std::string field = item.substr(0, eq);
        std::string column = item.substr(eq + 1);
        if (field == "conversation_id") conversation_id = column;
        else if (field == "quality") quality = column;
        else if (field == "order") order = column;
        else if (field == "speaker") speaker = column;
        else if (field == "behavior") behavior = column;
        else if (field == "talk_type") talk_type = column;
        else if (field == "text") text = column;
        else throw ConfigError("unknown mapping field: " + field);
    }
}

namespace {

std::string normalize(std::string_view raw) {
    std::size_t begin = 0, end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin])))
        ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1])))
        --end;
    std::string out(raw.substr(begin, end - begin));
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_absent_marker(const std::string& v) {
    return v.empty() || v == "n/a" || v == "na" || v == "none";
}

std::optional<Behavior> parse_behavior(const std::string& v) {
    if (v == "reflection") return Behavior::reflection;
    if (v == "question") return Behavior::question;
    if (v == "therapist_input") return Behavior::therapist_input;
    if (v == "other") return Behavior::other;
    return std::nullopt;
}

std::optional<TalkType> parse_talk_type(const std::string& v) {
    if (v == "change") return TalkType::change;
    if (v == "neutral") return TalkType::neutral;
    if (v == "sustain") return TalkType::sustain;
    return std::nullopt;
}

struct PendingConversation {
    Conversation conv;
    std::set<long> seen_orders;
};

}  // namespace

Corpus ingest(std::string_view source, const ColumnMapping& mapping, char delim) {
    auto rows = csv::parse(source, delim);
    if (rows.empty()) throw IngestError("empty source: no header row");
    if (rows.size() == 1) throw IngestError("empty source: no data rows");

    const csv::Row& header = rows.front();
    auto column_of = [&](const std::string& name,
                         bool required) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        if (required)
            throw IngestError("missing mapped column '" + name + "' in header");
        return std::nullopt;
    };

    std::size_t col_id = *column_of(mapping.conversation_id, true);
    std::size_t col_quality = *column_of(mapping.quality, true);
    std::size_t col_order = *column_of(mapping.order, true);
    std::size_t col_speaker = *column_of(mapping.speaker, true);
    std::size_t col_behavior = *column_of(mapping.behavior, true);
    std::size_t col_talk = *column_of(mapping.talk_type, true);
    std::optional<std::size_t> col_text = column_of(mapping.text, false);

    std::map<std::string, PendingConversation> by_id;
    std::vector<std::string> order_of_appearance;
    long warnings = 0;

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const csv::Row& row = rows[r];
        auto cell = [&](std::size_t c) -> std::string {
            return c < row.size() ? row[c] : std::string();
        };

        Utterance utt;
        utt.conversation_id = cell(col_id);
        if (utt.conversation_id.empty())
            throw IngestError("row " + std::to_string(r + 1) +
                              ": empty conversation id");

        std::string order_raw = cell(col_order);
        try {
            std::size_t pos = 0;
            utt.order_index = std::stol(order_raw, &pos);
            if (pos != order_raw.size()) throw std::invalid_argument(order_raw);
        } catch (const std::exception&) {
            throw IngestError("row " + std::to_string(r + 1) +
                              ": non-integer order value '" + order_raw + "'");
        }
        if (utt.order_index < 0)
            throw IngestError("row " + std::to_string(r + 1) +
                              ": negative order value " + order_raw);

        std::string speaker = normalize(cell(col_speaker));
        if (speaker == "therapist") utt.speaker = Speaker::therapist;
        else if (speaker == "client") utt.speaker = Speaker::client;
        else
            throw IngestError("row " + std::to_string(r + 1) +
                              ": unknown speaker '" + speaker + "'");

        std::string quality_raw = normalize(cell(col_quality));
        Quality quality;
        if (quality_raw == "high") quality = Quality::high;
        else if (quality_raw == "low") quality = Quality::low;
        else
            throw IngestError("conversation " + utt.conversation_id +
                              ": unknown quality label '" + quality_raw + "'");

        if (utt.speaker == Speaker::therapist) {
            std::string raw = normalize(cell(col_behavior));
            utt.behavior = parse_behavior(raw);
            if (!utt.behavior && !is_absent_marker(raw)) ++warnings;
        } else {
            std::string raw = normalize(cell(col_talk));
            utt.talk_type = parse_talk_type(raw);
            if (!utt.talk_type && !is_absent_marker(raw)) ++warnings;
        }
        if (col_text) utt.text = cell(*col_text);

        auto [it, inserted] = by_id.try_emplace(utt.conversation_id);
        PendingConversation& pending = it->second;
        if (inserted) {
            pending.conv.id = utt.conversation_id;
            pending.conv.quality = quality;
            pending.conv.ingest_order = order_of_appearance.size();
            order_of_appearance.push_back(utt.conversation_id);
        } else if (pending.conv.quality != quality) {
            throw IngestError("conversation " + utt.conversation_id +
                              ": inconsistent quality labels");
        }
        if (!pending.seen_orders.insert(utt.order_index).second)
            throw IngestError("conversation " + utt.conversation_id +
                              ": duplicate order_index " +
                              std::to_string(utt.order_index));
        pending.conv.utterances.push_back(std::move(utt));
    }

    Corpus corpus;
    corpus.warning_count = warnings;
    for (const std::string& id : order_of_appearance) {
        Conversation conv = std::move(by_id.at(id).conv);
        std::sort(conv.utterances.begin(), conv.utterances.end(),
                  [](const Utterance& a, const Utterance& b) {
                      return a.order_index < b.order_index;
                  });
        for (const Utterance& utt : conv.utterances) {
            if (utt.speaker == Speaker::therapist) {
                conv.therapist_turns.push_back({utt.order_index, utt.behavior});
            } else if (utt.talk_type) {
                conv.labeled_client.push_back({utt.order_index, *utt.talk_type});
            }
        }
        if (conv.n_labeled() < kMinLabeledClientTurns) {
            corpus.excluded.push_back(
                {std::move(conv), "fewer than 4 labeled client turns"});
        } else {
            corpus.included.push_back(std::move(conv));
        }
    }
    return corpus;
}

Corpus ingest_file(const std::string& path, const ColumnMapping& mapping,
                   char delim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open input file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return ingest(buffer.str(), mapping, delim);
}

namespace {

void append_conversation_rows(std::string& out, const Conversation& conv,
                              char delim) {
    for (const Utterance& utt : conv.utterances) {
        csv::Row row;
        row.push_back(conv.id);
        row.push_back(to_string(conv.quality));
        row.push_back(std::to_string(utt.order_index));
        row.push_back(to_string(utt.speaker));
        row.push_back(utt.behavior ? to_string(*utt.behavior) : "n/a");
        row.push_back(utt.talk_type ? to_string(*utt.talk_type) : "n/a");
        row.push_back(utt.text);
        out += csv::format_row(row, delim);
    }
}

std::vector<const Conversation*> conversations_in_ingest_order(
    const Corpus& corpus) {
    std::vector<const Conversation*> all;
    all.reserve(corpus.included.size() + corpus.excluded.size());
    for (const auto& conv : corpus.included) all.push_back(&conv);
    for (const auto& rec : corpus.excluded) all.push_back(&rec.conversation);
    std::sort(all.begin(), all.end(),
              [](const Conversation* a, const Conversation* b) {
                  return a->ingest_order < b->ingest_order;
              });
    return all;
}

}  // namespace

std::string export_tabular(const Corpus& corpus, char delim) {
    ColumnMapping def;
    std::string out = schema_line("corpus") + "\n";
    out += csv::format_row({def.conversation_id, def.quality, def.order,
                            def.speaker, def.behavior, def.talk_type, def.text},
                           delim);
    for (const Conversation* conv : conversations_in_ingest_order(corpus))
        append_conversation_rows(out, *conv, delim);
    return out;
}

std::string dump_records(const Corpus& corpus) {
    using nlohmann::json;
    std::string out =
        json{{"schema", "miaudit/corpus"}, {"version", kSchemaVersion}}.dump() +
        "\n";
    auto conv_record = [](const Conversation& conv, bool included,
                          const std::string& reason) {
        json utts = json::array();
        for (const Utterance& utt : conv.utterances) {
            json j{{"order", utt.order_index},
                   {"speaker", to_string(utt.speaker)},
                   {"text", utt.text}};
            j["behavior"] =
                utt.behavior ? json(to_string(*utt.behavior)) : json(nullptr);
            j["talk_type"] =
                utt.talk_type ? json(to_string(*utt.talk_type)) : json(nullptr);
            utts.push_back(std::move(j));
        }
        json j{{"id", conv.id},
               {"quality", to_string(conv.quality)},
               {"included", included},
               {"utterances", std::move(utts)}};
        if (!included) j["exclusion_reason"] = reason;
        return j;
    };
    for (const Conversation* conv : conversations_in_ingest_order(corpus)) {
        const ExcludedConversation* rec = corpus.find_excluded(conv->id);
        out += conv_record(*conv, rec == nullptr, rec ? rec->reason : "").dump();
        out += "\n";
    }
    return out;
}

std::pair<std::vector<TalkType>, std::vector<TalkType>> split_client_halves(
    const Conversation& conv) {
    std::vector<TalkType> turns = conv.labeled_client_turns();
    long n = static_cast<long>(turns.size());
    if (n < 2)
        throw ValidationError("conversation " + conv.id +
                              ": degenerate split (fewer than 2 labeled client "
                              "turns)");
    long mid = n / 2;
    std::vector<TalkType> first(turns.begin(), turns.begin() + mid);
    std::vector<TalkType> second(turns.begin() + mid, turns.end());
    return {std::move(first), std::move(second)};
}

std::vector<TherapistTurn> first_half_therapist_turns(const Conversation& conv) {
    long n = conv.n_labeled();
    if (n < 1 || conv.therapist_turns.empty()) return {};
    long mid = n / 2;  // second half starts at labeled client turn mid+1
    std::vector<TherapistTurn> out;
    if (mid >= n) return out;
    long boundary = conv.labeled_client[static_cast<std::size_t>(mid)].order_index;
    for (const TherapistTurn& turn : conv.therapist_turns)
        if (turn.order_index < boundary) out.push_back(turn);
    return out;
}

}  // namespace miaudit
