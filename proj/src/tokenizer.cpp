#include "guirise/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

#include "guirise/grammar.hpp"
#include "guirise/util.hpp"

namespace guirise {

namespace {

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool digit(char c) { return c >= '0' && c <= '9'; }

} // namespace

Vocab Vocab::build(const ActionVocab& actions, const std::vector<std::string>& lexicon,
                   int coord_bins) {
    Vocab v;
    v.coord_bins_ = coord_bins;
    auto add = [&v](const std::string& t) {
        if (v.ids_.emplace(t, static_cast<int>(v.tokens_.size())).second) v.tokens_.push_back(t);
    };
    add("<unk>");
    add("<bos>");
    add("<eos>");
    for (const auto& name : kTagNames) {
        add("<" + std::string(name) + ">");
        add("</" + std::string(name) + ">");
    }
    for (char c : std::string("{}[],:\".;'!?-_/<>()=")) add(std::string(1, c));
    for (char c = '0'; c <= '9'; ++c) add(std::string(1, c));
    for (const char* k : {"action", "value", "position", "null"}) add(k);
    for (const auto& t : actions.types()) add(t.name);
    // Deterministic lexicon order regardless of caller ordering.
    std::set<std::string> sorted(lexicon.begin(), lexicon.end());
    for (const auto& w : sorted) add(w);
    v.first_coord_ = static_cast<int>(v.tokens_.size());
    for (int i = 0; i < coord_bins; ++i)
        add(format_coord((i + 0.5) / coord_bins));
    return v;
}

int Vocab::id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? -1 : it->second;
}

int Vocab::coord_token(double x) const {
    double clamped = std::min(1.0, std::max(0.0, x));
    int bin = std::min(coord_bins_ - 1, static_cast<int>(clamped * coord_bins_));
    return first_coord_ + bin;
}

double Vocab::coord_value(int id) const {
    return (id - first_coord_ + 0.5) / coord_bins_;
}

std::vector<int> tokenize(const Vocab& vocab, const std::string& text) {
    std::vector<int> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++i;
            continue;
        }
        if (c == '<') {
            bool matched = false;
            for (const auto& name : kTagNames) {
                for (const std::string& tag :
                     {"<" + std::string(name) + ">", "</" + std::string(name) + ">"}) {
                    if (text.compare(i, tag.size(), tag) == 0) {
                        out.push_back(vocab.id(tag));
                        i += tag.size();
                        matched = true;
                        break;
                    }
                }
                if (matched) break;
            }
            if (matched) continue;
        }
        if (digit(c)) {
            size_t b = i;
            while (i < n && digit(text[i])) ++i;
            bool fractional = false;
            if (i + 1 < n && text[i] == '.' && digit(text[i + 1])) {
                fractional = true;
                ++i;
                while (i < n && digit(text[i])) ++i;
            }
            std::string tok = text.substr(b, i - b);
            if (fractional) {
                double x = std::strtod(tok.c_str(), nullptr);
                if (x >= 0.0 && x <= 1.0) {
                    out.push_back(vocab.coord_token(x));
                    continue;
                }
            }
            int id = vocab.id(tok);
            if (id >= 0) {
                out.push_back(id);
            } else {
                // Multi-digit numbers outside the vocabulary: one token per digit.
                for (char d : tok) {
                    if (d == '.') break;
                    out.push_back(vocab.id(std::string(1, d)));
                }
            }
            continue;
        }
        if (word_char(c)) {
            size_t b = i;
            while (i < n && word_char(text[i])) ++i;
            int id = vocab.id(text.substr(b, i - b));
            out.push_back(id >= 0 ? id : Vocab::kUnk);
            continue;
        }
        int id = vocab.id(std::string(1, c));
        out.push_back(id >= 0 ? id : Vocab::kUnk);
        ++i;
    }
    return out;
}

std::string detokenize(const Vocab& vocab, const std::vector<int>& ids) {
    std::string out;
    bool quote_open = false;
    bool suppress_next_space = false;
    for (int id : ids) {
        if (id == Vocab::kBos || id == Vocab::kEos) continue;
        const std::string t = id == Vocab::kUnk ? "unk" : vocab.text(id);
        bool no_space_before = false;
        if (out.empty() || suppress_next_space) {
            no_space_before = true;
        } else if (t.size() == 1) {
            switch (t[0]) {
                case '}': case ']': case ',': case ':': case '.':
                case ';': case '!': case '?': case ')':
                    no_space_before = true;
                    break;
                case '"':
                    if (quote_open) no_space_before = true; // closing quote
                    break;
                default: break;
            }
        }
        if (!no_space_before) out += ' ';
        out += t;
        suppress_next_space = false;
        if (t.size() == 1) {
            if (t[0] == '"') {
                quote_open = !quote_open;
                if (quote_open) suppress_next_space = true;
            } else if (t[0] == '{' || t[0] == '[' || t[0] == '(') {
                suppress_next_space = true;
            }
        }
    }
    return out;
}

} // namespace guirise
