#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "guirise/types.hpp"

namespace guirise {

// Closed word-level vocabulary with punctuation splitting and coordinate-bin
// tokens. Tag literals are single tokens. Unknown words map to UNK.
class Vocab {
public:
    static constexpr int kUnk = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;

    // Frozen from the action vocabulary, the word lexicon (element labels,
    // instruction and summary text words) and the coordinate grid.
    static Vocab build(const ActionVocab& actions, const std::vector<std::string>& lexicon,
                       int coord_bins);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& text(int id) const { return tokens_[id]; }
    // -1 when the token is not in the vocabulary.
    int id(const std::string& token) const;
    int coord_bins() const { return coord_bins_; }

    bool is_coord(int id) const { return id >= first_coord_ && id < first_coord_ + coord_bins_; }
    // Token id of the bin containing x (clamped to [0,1]).
    int coord_token(double x) const;
    // Center of the bin for a coord token.
    double coord_value(int id) const;

    std::vector<std::string> tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
    int coord_bins_ = 0;
    int first_coord_ = 0;
};

// text -> token ids. Tag literals match first; numbers with a decimal point
// in [0,1] become coordinate-bin tokens; words and single punctuation
// characters otherwise. Unknown words become UNK.
std::vector<int> tokenize(const Vocab& vocab, const std::string& text);

// token ids -> text. Inverse of tokenize up to whitespace and UNK; quoting
// and punctuation re-attach so that serialized action records survive the
// round trip byte-for-byte.
std::string detokenize(const Vocab& vocab, const std::vector<int>& ids);

} // namespace guirise
