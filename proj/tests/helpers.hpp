#pragma once

// Shared fixtures: small toy models, fuzz generators, and the independent
// rule-by-rule oracles the implementation is checked against. Oracle code
// here must stay independent of the library's parsing and reward paths.

#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "guirise/policy.hpp"
#include "guirise/rng.hpp"
#include "guirise/sim.hpp"
#include "guirise/types.hpp"

namespace testutil {

using namespace guirise;

inline ToyModel small_model(int hash_dim = 4096, int coord_bins = 20, int max_len = 96) {
    SimConfig sim;
    return ToyModel({hash_dim, coord_bins, max_len}, sim_action_vocab(), sim_lexicon(sim));
}

// ---------------------------------------------------------------------------
// Independent action-record oracle: a one-pass lexer plus a literal rule
// sequence (record shape, key check, type check, coordinate check).
// ---------------------------------------------------------------------------

struct OracleValue {
    enum Kind { Str, Null, Arr, Bad } kind = Bad;
    std::string str;
    std::vector<double> nums;
};

class RecordOracle {
public:
    // True iff the text is an acceptable action record for the vocabulary.
    static bool accepts(const std::string& text, const ActionVocab& vocab) {
        RecordOracle o(text);
        std::vector<std::pair<std::string, OracleValue>> entries;
        if (!o.lex_record(entries)) return false;
        int action_n = 0, value_n = 0, position_n = 0;
        for (auto& [k, v] : entries) {
            if (k == "action") ++action_n;
            else if (k == "value") ++value_n;
            else if (k == "position") ++position_n;
            else return false; // extra key
        }
        if (action_n != 1 || value_n != 1 || position_n != 1) return false;
        const OracleValue *av = nullptr, *vv = nullptr, *pv = nullptr;
        for (auto& [k, v] : entries) {
            if (k == "action") av = &v;
            if (k == "value") vv = &v;
            if (k == "position") pv = &v;
        }
        if (av->kind != OracleValue::Str || vv->kind != OracleValue::Str) return false;
        if (!vocab.contains(av->str)) return false;
        bool spatial = vocab.spatial(av->str);
        if (pv->kind == OracleValue::Null) return !spatial;
        if (pv->kind != OracleValue::Arr || pv->nums.size() != 2) return false;
        if (!spatial) return false;
        for (double c : pv->nums)
            if (!(c >= 0.0 && c <= 1.0)) return false;
        return true;
    }

private:
    explicit RecordOracle(const std::string& s) : s_(s) {}

    void ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        ws();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    bool lex_string(std::string& out) {
        ws();
        if (i_ >= s_.size() || s_[i_] != '"') return false;
        ++i_;
        out.clear();
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\') {
                if (i_ + 1 >= s_.size()) return false;
                char e = s_[i_ + 1];
                if (e == 'n') out += '\n';
                else if (e == 't') out += '\t';
                else if (e == 'r') out += '\r';
                else if (e == '"' || e == '\\' || e == '/') out += e;
                else return false;
                i_ += 2;
            } else {
                out += s_[i_++];
            }
        }
        if (i_ >= s_.size()) return false;
        ++i_;
        return true;
    }

    bool lex_number(double& out) {
        ws();
        size_t b = i_;
        if (i_ < s_.size() && s_[i_] == '-') ++i_;
        size_t d0 = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (i_ == d0) return false;
        if (i_ < s_.size() && s_[i_] == '.') {
            ++i_;
            size_t d1 = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            if (i_ == d1) return false;
        }
        if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
            ++i_;
            if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) ++i_;
            size_t d2 = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            if (i_ == d2) return false;
        }
        out = std::stod(s_.substr(b, i_ - b));
        return true;
    }

    bool lex_value(OracleValue& out) {
        ws();
        if (i_ < s_.size() && s_[i_] == '"') {
            out.kind = OracleValue::Str;
            return lex_string(out.str);
        }
        if (s_.compare(i_, 4, "null") == 0) {
            i_ += 4;
            out.kind = OracleValue::Null;
            return true;
        }
        if (eat('[')) {
            out.kind = OracleValue::Arr;
            double x;
            if (!lex_number(x)) return false;
            out.nums.push_back(x);
            while (eat(',')) {
                if (!lex_number(x)) return false;
                out.nums.push_back(x);
            }
            return eat(']');
        }
        return false;
    }

    bool lex_record(std::vector<std::pair<std::string, OracleValue>>& entries) {
        if (!eat('{')) return false;
        ws();
        if (eat('}')) {
            ws();
            return i_ == s_.size();
        }
        for (;;) {
            std::string key;
            if (!lex_string(key)) return false;
            if (!eat(':')) return false;
            OracleValue v;
            if (!lex_value(v)) return false;
            entries.emplace_back(std::move(key), std::move(v));
            if (eat(',')) continue;
            if (eat('}')) break;
            return false;
        }
        ws();
        return i_ == s_.size();
    }

    const std::string& s_;
    size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Independent truth table for the action sub-rewards: literal transcription
// of the three binary criteria and their weighted sum.
// ---------------------------------------------------------------------------

struct RewardOracle {
    double r_af, r_type, r_pos;

    static RewardOracle of(const std::string& action_text, const ActionVocab& vocab,
                           const GuiAction& gt, const std::optional<BBox>& gt_bbox) {
        RewardOracle o{0, 0, 0};
        if (!RecordOracle::accepts(action_text, vocab)) return o;
        o.r_af = 1;
        // Extract type and position with a crude rescan (the record is known
        // valid here).
        std::string type = extract_string_value(action_text, "action");
        o.r_type = type == gt.action_type ? 1 : 0;
        if (gt_bbox) {
            auto pos = extract_position(action_text);
            o.r_pos = pos && pos->x >= gt_bbox->x1 && pos->x <= gt_bbox->x2 &&
                              pos->y >= gt_bbox->y1 && pos->y <= gt_bbox->y2
                          ? 1
                          : 0;
        } else {
            o.r_pos = o.r_type;
        }
        return o;
    }

    double weighted(double lambda_type, double lambda_pos) const {
        return r_af + lambda_type * r_type + lambda_pos * r_pos;
    }

    static std::string extract_string_value(const std::string& text, const std::string& key) {
        size_t k = text.find("\"" + key + "\"");
        size_t colon = text.find(':', k);
        size_t q1 = text.find('"', colon + 1);
        size_t q2 = text.find('"', q1 + 1);
        return text.substr(q1 + 1, q2 - q1 - 1);
    }

    static std::optional<Vec2> extract_position(const std::string& text) {
        size_t k = text.find("\"position\"");
        size_t colon = text.find(':', k);
        size_t b = text.find_first_not_of(" \t\r\n", colon + 1);
        if (text.compare(b, 4, "null") == 0) return std::nullopt;
        size_t close = text.find(']', b);
        std::string inner = text.substr(b + 1, close - b - 1);
        size_t comma = inner.find(',');
        return Vec2{std::stod(inner.substr(0, comma)), std::stod(inner.substr(comma + 1))};
    }
};

// ---------------------------------------------------------------------------
// Fuzz generator for action-record strings: valid skeletons with random
// mutations (extra/missing/duplicate keys, junk types, bad coordinates,
// broken syntax).
// ---------------------------------------------------------------------------

inline std::string fuzz_action_record(Rng& rng, const ActionVocab& vocab) {
    static const std::vector<std::string> junk_types = {"FLY", "JUMP", "click", ""};
    static const std::vector<std::string> values = {"alpha", "Search Bar", "", "x y z"};

    std::string type;
    if (rng.bernoulli(0.8)) {
        type = vocab.types()[rng.next_below(vocab.types().size())].name;
    } else {
        type = junk_types[rng.next_below(junk_types.size())];
    }
    std::string value = values[rng.next_below(values.size())];
    std::string position;
    switch (rng.next_below(6)) {
        case 0: position = "null"; break;
        case 1: position = "[0.3, 0.66]"; break;
        case 2: position = "[" + std::to_string(rng.uniform01()) + ", " +
                           std::to_string(rng.uniform01()) + "]";
            break;
        case 3: position = "[1.5, 0.5]"; break;
        case 4: position = "[0.5]"; break;
        default: position = "[0.1, 0.2, 0.3]"; break;
    }

    std::vector<std::string> pairs = {"\"action\": \"" + type + "\"",
                                      "\"value\": \"" + value + "\"",
                                      "\"position\": " + position};
    // Mutations.
    switch (rng.next_below(10)) {
        case 0: pairs.push_back("\"note\": \"extra\""); break;
        case 1: pairs.erase(pairs.begin() + rng.next_below(pairs.size())); break;
        case 2: pairs.push_back(pairs[rng.next_below(pairs.size())]); break;
        case 3: pairs[0] = "\"action\": " + type; break; // unquoted type
        case 4: pairs[1] = "\"value\": 42"; break;
        default: break;
    }
    rng.shuffle(pairs);

    std::string body;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (i) body += rng.bernoulli(0.5) ? "," : " , ";
        body += pairs[i];
    }
    std::string text = "{" + body + "}";
    // Occasional syntax damage.
    switch (rng.next_below(12)) {
        case 0: text.pop_back(); break;
        case 1: text = " " + text + " "; break;
        case 2: text = "[" + text + "]"; break;
        case 3: text += "x"; break;
        default: break;
    }
    return text;
}

// Central finite differences of f over the coordinates in idx.
template <typename F>
inline double max_rel_error_fd(F&& f, std::vector<double>& theta, const std::vector<double>& grad,
                               const std::vector<size_t>& idx, double h = 1e-5) {
    double worst = 0.0;
    for (size_t k : idx) {
        double saved = theta[k];
        theta[k] = saved + h;
        double up = f();
        theta[k] = saved - h;
        double down = f();
        theta[k] = saved;
        double fd = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(fd), std::abs(grad[k]), 1e-6});
        worst = std::max(worst, std::abs(grad[k] - fd) / denom);
    }
    return worst;
}

} // namespace testutil
