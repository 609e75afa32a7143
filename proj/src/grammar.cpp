#include "guirise/grammar.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "guirise/errors.hpp"
#include "guirise/util.hpp"

namespace guirise {

const char* to_string(ActionParseError e) {
    switch (e) {
        case ActionParseError::None: return "None";
        case ActionParseError::MalformedRecord: return "MalformedRecord";
        case ActionParseError::MissingKey: return "MissingKey";
        case ActionParseError::ExtraKey: return "ExtraKey";
        case ActionParseError::UnknownActionType: return "UnknownActionType";
        case ActionParseError::BadCoordinate: return "BadCoordinate";
    }
    return "None";
}

namespace {

std::string open_tag(std::string_view name) { return "<" + std::string(name) + ">"; }
std::string close_tag(std::string_view name) { return "</" + std::string(name) + ">"; }

bool whitespace_only(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

} // namespace

bool check_tags(std::string_view text) {
    size_t pos = 0;
    for (size_t i = 0; i < kTagNames.size(); ++i) {
        const std::string open = open_tag(kTagNames[i]);
        const std::string close = close_tag(kTagNames[i]);
        size_t o = text.find(open, pos);
        if (o == std::string_view::npos) return false;
        if (!whitespace_only(text.substr(pos, o - pos))) return false;
        size_t c = text.find(close, o + open.size());
        if (c == std::string_view::npos) return false;
        // No nested reopen of the same tag inside the block.
        if (text.substr(o + open.size(), c - o - open.size()).find(open) != std::string_view::npos)
            return false;
        pos = c + close.size();
    }
    if (!whitespace_only(text.substr(pos))) return false;
    // Reject duplicates and out-of-order extras: each tag literal must occur
    // exactly once anywhere in the text.
    for (const auto& name : kTagNames) {
        for (const std::string& t : {open_tag(name), close_tag(name)}) {
            size_t first = text.find(t);
            if (first == std::string_view::npos) return false;
            if (text.find(t, first + t.size()) != std::string_view::npos) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Action record parsing. Hand-rolled recursive-descent parser over a strict
// JSON subset: one object of string/null/two-number-array values. Duplicate
// keys are a malformed record, which an off-the-shelf JSON object type would
// silently collapse.
// ---------------------------------------------------------------------------

namespace {

struct RecordValue {
    enum class Kind { String, Null, Pair } kind = Kind::Null;
    std::string str;
    double a = 0.0, b = 0.0;
};

struct RecordEntry {
    std::string key;
    RecordValue value;
};

class RecordParser {
public:
    explicit RecordParser(std::string_view text) : s_(text) {}

    // Returns false on any syntax violation (malformed record).
    bool parse(std::vector<RecordEntry>& out) {
        skip_ws();
        if (!consume('{')) return false;
        skip_ws();
        if (peek() == '}') {
            ++i_;
        } else {
            for (;;) {
                RecordEntry e;
                if (!parse_string(e.key)) return false;
                skip_ws();
                if (!consume(':')) return false;
                if (!parse_value(e.value)) return false;
                out.push_back(std::move(e));
                skip_ws();
                if (consume(',')) {
                    skip_ws();
                    continue;
                }
                if (consume('}')) break;
                return false;
            }
        }
        skip_ws();
        return i_ == s_.size();
    }

private:
    char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
    bool consume(char c) {
        if (peek() != c) return false;
        ++i_;
        return true;
    }
    void skip_ws() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r' || s_[i_] == '\n')) ++i_;
    }

    bool parse_string(std::string& out) {
        skip_ws();
        if (!consume('"')) return false;
        out.clear();
        while (i_ < s_.size()) {
            char c = s_[i_++];
            if (c == '"') return true;
            if (c == '\\') {
                if (i_ >= s_.size()) return false;
                char e = s_[i_++];
                switch (e) {
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    case '/': out.push_back('/'); break;
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'r': out.push_back('\r'); break;
                    default: return false;
                }
            } else {
                out.push_back(c);
            }
        }
        return false;
    }

    bool parse_number(double& out) {
        skip_ws();
        size_t b = i_;
        if (peek() == '-') ++i_;
        size_t digits = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++i_, ++digits;
        if (digits == 0) return false;
        if (peek() == '.') {
            ++i_;
            size_t frac = 0;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++i_, ++frac;
            if (frac == 0) return false;
        }
        if (peek() == 'e' || peek() == 'E') {
            ++i_;
            if (peek() == '+' || peek() == '-') ++i_;
            size_t ex = 0;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++i_, ++ex;
            if (ex == 0) return false;
        }
        out = std::strtod(std::string(s_.substr(b, i_ - b)).c_str(), nullptr);
        return true;
    }

    bool parse_value(RecordValue& out) {
        skip_ws();
        char c = peek();
        if (c == '"') {
            out.kind = RecordValue::Kind::String;
            return parse_string(out.str);
        }
        if (c == 'n') {
            if (s_.substr(i_, 4) == "null") {
                i_ += 4;
                out.kind = RecordValue::Kind::Null;
                return true;
            }
            return false;
        }
        if (c == '[') {
            ++i_;
            out.kind = RecordValue::Kind::Pair;
            if (!parse_number(out.a)) return false;
            skip_ws();
            if (!consume(',')) return false;
            if (!parse_number(out.b)) return false;
            skip_ws();
            return consume(']');
        }
        return false;
    }

    std::string_view s_;
    size_t i_ = 0;
};

ActionParseResult fail(ActionParseError e, std::string detail) {
    ActionParseResult r;
    r.error = e;
    r.detail = std::move(detail);
    return r;
}

} // namespace

ActionParseResult parse_action(std::string_view action_text, const ActionVocab& vocab) {
    std::vector<RecordEntry> entries;
    if (!RecordParser(action_text).parse(entries))
        return fail(ActionParseError::MalformedRecord, "not a well-formed key-value record");

    const RecordValue* action_v = nullptr;
    const RecordValue* value_v = nullptr;
    const RecordValue* position_v = nullptr;
    for (const auto& e : entries) {
        const RecordValue** slot = nullptr;
        if (e.key == "action") slot = &action_v;
        else if (e.key == "value") slot = &value_v;
        else if (e.key == "position") slot = &position_v;
        if (!slot)
            return fail(ActionParseError::ExtraKey, "unexpected key '" + e.key + "'");
        if (*slot)
            return fail(ActionParseError::MalformedRecord, "duplicate key '" + e.key + "'");
        *slot = &e.value;
    }
    if (!action_v) return fail(ActionParseError::MissingKey, "missing key 'action'");
    if (!value_v) return fail(ActionParseError::MissingKey, "missing key 'value'");
    if (!position_v) return fail(ActionParseError::MissingKey, "missing key 'position'");

    if (action_v->kind != RecordValue::Kind::String)
        return fail(ActionParseError::MalformedRecord, "'action' must be a string");
    if (value_v->kind != RecordValue::Kind::String)
        return fail(ActionParseError::MalformedRecord, "'value' must be a string");
    if (!vocab.contains(action_v->str))
        return fail(ActionParseError::UnknownActionType, "unknown action type '" + action_v->str + "'");

    GuiAction action;
    action.action_type = action_v->str;
    action.value = value_v->str;
    const bool spatial = vocab.spatial(action.action_type);
    switch (position_v->kind) {
        case RecordValue::Kind::Null:
            if (spatial)
                return fail(ActionParseError::BadCoordinate,
                            "'" + action.action_type + "' requires a coordinate pair");
            break;
        case RecordValue::Kind::Pair: {
            if (!spatial)
                return fail(ActionParseError::BadCoordinate,
                            "'" + action.action_type + "' must not carry a position");
            double x = position_v->a, y = position_v->b;
            if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
                return fail(ActionParseError::BadCoordinate, "coordinates must lie in [0,1]");
            action.position = Vec2{x, y};
            break;
        }
        case RecordValue::Kind::String:
            return fail(ActionParseError::BadCoordinate, "'position' must be null or [x, y]");
    }

    ActionParseResult r;
    r.action = std::move(action);
    return r;
}

std::optional<std::string> find_tag_block(std::string_view text, std::string_view name) {
    const std::string open = open_tag(name);
    const std::string close = close_tag(name);
    size_t o = text.find(open);
    if (o == std::string_view::npos) return std::nullopt;
    size_t c = text.find(close, o + open.size());
    if (c == std::string_view::npos) return std::nullopt;
    return std::string(trim(text.substr(o + open.size(), c - o - open.size())));
}

AgentTurn parse_turn(std::string_view raw_text, const ActionVocab& vocab) {
    AgentTurn turn;
    turn.raw_text = std::string(raw_text);
    turn.tags_ok = check_tags(raw_text);
    turn.progress_estimation = find_tag_block(raw_text, kTagNames[0]).value_or("");
    turn.decision_reasoning = find_tag_block(raw_text, kTagNames[1]).value_or("");
    turn.action_text = find_tag_block(raw_text, kTagNames[2]).value_or("");
    turn.history_summary = find_tag_block(raw_text, kTagNames[3]).value_or("");
    if (!turn.action_text.empty()) {
        auto parsed = parse_action(turn.action_text, vocab);
        if (parsed.ok()) turn.parsed_action = std::move(parsed.action);
    }
    return turn;
}

std::string serialize_action(const GuiAction& action) {
    std::string out = "{\"action\": \"" + action.action_type + "\", \"value\": \"" + action.value +
                      "\", \"position\": ";
    if (action.position)
        out += "[" + format_coord(action.position->x) + ", " + format_coord(action.position->y) + "]";
    else
        out += "null";
    out += "}";
    return out;
}

std::string serialize_turn(const std::string& progress, const std::string& decision,
                           const GuiAction& action, const std::string& summary,
                           const ActionVocab& vocab) {
    auto violations = validate_action(action, vocab);
    if (!violations.empty()) throw InvalidAction(violations.front());
    std::string out;
    out += open_tag(kTagNames[0]) + progress + close_tag(kTagNames[0]) + "\n";
    out += open_tag(kTagNames[1]) + decision + close_tag(kTagNames[1]) + "\n";
    out += open_tag(kTagNames[2]) + serialize_action(action) + close_tag(kTagNames[2]) + "\n";
    out += open_tag(kTagNames[3]) + summary + close_tag(kTagNames[3]);
    return out;
}

} // namespace guirise
