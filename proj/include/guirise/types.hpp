#pragma once

#include <optional>
#include <string>
#include <vector>

namespace guirise {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

// Axis-aligned box in normalized screen units.
struct BBox {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
    bool operator==(const BBox&) const = default;

    // Boundary inclusive on all four edges.
    bool contains(const Vec2& p) const {
        return p.x >= x1 && p.x <= x2 && p.y >= y1 && p.y <= y2;
    }
    Vec2 center() const { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }
};

enum class ElementKind { Button, Field, Link, Toggle };

const char* to_string(ElementKind k);
std::optional<ElementKind> element_kind_from_string(const std::string& s);

struct UiElement {
    std::string element_id;
    BBox bbox;
    std::string label;
    ElementKind kind = ElementKind::Button;
    bool operator==(const UiElement&) const = default;
};

struct Observation {
    int width = 0;
    int height = 0;
    std::vector<UiElement> elements;
    std::optional<std::string> screen_ref;
    bool operator==(const Observation&) const = default;
};

struct GuiAction {
    std::string action_type;
    std::string value;
    std::optional<Vec2> position;
    bool operator==(const GuiAction&) const = default;
};

struct Step {
    int index = 0;
    Observation observation;
    GuiAction gt_action;
    std::optional<BBox> gt_bbox;
    bool operator==(const Step&) const = default;
};

struct Episode {
    std::string episode_id;
    std::string instruction;
    std::vector<Step> steps;
    bool operator==(const Episode&) const = default;
};

struct AgentTurn {
    std::string raw_text;
    std::string progress_estimation;
    std::string decision_reasoning;
    std::string action_text;
    std::optional<GuiAction> parsed_action;
    std::string history_summary;
    bool tags_ok = false;
};

struct RewardBreakdown {
    double r_f = 0.0;
    double r_af = 0.0;
    double r_type = 0.0;
    double r_pos = 0.0;
    double r_a = 0.0;
    double r_h = 0.0;
    double total = 0.0;
};

enum class DecodeMode { Greedy, Stochastic };

struct RewardConfig {
    double lambda_a = 1.0;
    double lambda_h = 0.5;
    double lambda_type = 1.0;
    double lambda_pos = 1.0;
    int k_rollouts = 4;
    double advantage_epsilon = 1e-8;
    // Decoding used by the history-reward rollouts; greedy collapses the k
    // samples into one evaluation.
    DecodeMode history_rollout_mode = DecodeMode::Greedy;

    std::vector<std::string> validate() const;
};

struct GrpoConfig {
    int group_size = 8;
    double clip_epsilon = 0.2;
    double kl_beta = 0.04;
    double learning_rate = 0.05;
    int iterations = 1000;
    int episodes_per_iter = 2;
    int theta_old_refresh = 1;

    std::vector<std::string> validate() const;
};

// One entry of the finite action-type set V^a.
struct ActionTypeSpec {
    std::string name;
    bool needs_position = false;
};

// Configured action-type vocabulary. Presets mirror the benchmark action
// spaces; the simulator uses a small three-type space by default.
class ActionVocab {
public:
    ActionVocab() = default;
    explicit ActionVocab(std::vector<ActionTypeSpec> types) : types_(std::move(types)) {}

    static ActionVocab guiact();      // 11 types
    static ActionVocab mind2web();    // CLICK, TYPE, SELECT
    static ActionVocab miniwob();     // CLICK, TYPE
    static ActionVocab aitw();        // 12 types
    static ActionVocab sim_default(); // CLICK, INPUT, ENTER
    static std::optional<ActionVocab> preset(const std::string& name);

    bool contains(const std::string& type) const;
    // True when the type carries screen coordinates. Unknown types are not spatial.
    bool spatial(const std::string& type) const;
    const std::vector<ActionTypeSpec>& types() const { return types_; }
    size_t size() const { return types_.size(); }

private:
    std::vector<ActionTypeSpec> types_;
};

// Checks every type invariant for every step; violations are returned, not
// thrown. Empty result means the episode is well-formed.
std::vector<std::string> validate_episode(const Episode& episode, const ActionVocab& vocab);
std::vector<std::string> validate_episode(const Episode& episode);

// Checks a single action against the vocabulary and the position rules.
std::vector<std::string> validate_action(const GuiAction& action, const ActionVocab& vocab);

} // namespace guirise
