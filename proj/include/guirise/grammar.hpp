#pragma once

#include <array>
#include <string>
#include <string_view>

#include "guirise/types.hpp"

namespace guirise {

// Fixed output layout: four tagged blocks, in this order.
inline constexpr std::array<std::string_view, 4> kTagNames = {
    "Progress Estimation", "Decision Reasoning", "Action", "Memory Summary"};

// The labeler prompts use this name for the block that the training format
// calls Memory Summary.
inline constexpr std::string_view kLabelerSummaryTag = "History Summary";

// True iff the text is exactly the four tag pairs in the fixed order, each
// opened before closed, with no duplicate or missing tags. Whitespace outside
// the blocks is insignificant; any other text outside a block fails the check.
bool check_tags(std::string_view text);

enum class ActionParseError {
    None,
    MalformedRecord,
    MissingKey,
    ExtraKey,
    UnknownActionType,
    BadCoordinate,
};

const char* to_string(ActionParseError e);

struct ActionParseResult {
    std::optional<GuiAction> action; // set iff error == None
    ActionParseError error = ActionParseError::None;
    std::string detail; // names the first violated rule

    bool ok() const { return error == ActionParseError::None; }
};

// Parses the key-value action record. The record must be a dictionary with
// exactly the keys "action", "value" and "position" (any order, no
// duplicates); action must name a configured type, value must be a string,
// and position must be null or a pair of coordinates in [0,1]. Spatial types
// require a position, non-spatial types reject one. On failure the result
// names the first violated rule.
ActionParseResult parse_action(std::string_view action_text, const ActionVocab& vocab);

// Inner text of the first <name>...</name> pair, or nullopt when the pair is
// absent or unclosed. Content is trimmed of surrounding whitespace.
std::optional<std::string> find_tag_block(std::string_view text, std::string_view name);

// Splits a raw model output into the four fields. When the tag check passes
// the fields are the inner texts of the blocks (trimmed) and the action block
// is parsed; when it fails, extraction degrades to a best-effort per-tag scan
// and tags_ok stays false.
AgentTurn parse_turn(std::string_view raw_text, const ActionVocab& vocab);

// Canonical action record, coordinates at up to 4 decimal places.
std::string serialize_action(const GuiAction& action);

// Emits the canonical four-tag layout. Throws InvalidAction when the action
// violates the vocabulary invariants. Block payloads are emitted verbatim and
// must not themselves contain tag literals.
std::string serialize_turn(const std::string& progress, const std::string& decision,
                           const GuiAction& action, const std::string& summary,
                           const ActionVocab& vocab);

} // namespace guirise
