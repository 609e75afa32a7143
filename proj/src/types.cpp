#include "guirise/types.hpp"

#include <cmath>
#include <unordered_set>

namespace guirise {

const char* to_string(ElementKind k) {
    switch (k) {
        case ElementKind::Button: return "button";
        case ElementKind::Field: return "field";
        case ElementKind::Link: return "link";
        case ElementKind::Toggle: return "toggle";
    }
    return "button";
}

std::optional<ElementKind> element_kind_from_string(const std::string& s) {
    if (s == "button") return ElementKind::Button;
    if (s == "field") return ElementKind::Field;
    if (s == "link") return ElementKind::Link;
    if (s == "toggle") return ElementKind::Toggle;
    return std::nullopt;
}

std::vector<std::string> RewardConfig::validate() const {
    std::vector<std::string> out;
    for (double w : {lambda_a, lambda_h, lambda_type, lambda_pos}) {
        if (!std::isfinite(w) || w < 0.0) {
            out.push_back("reward weights must be finite and non-negative");
            break;
        }
    }
    if (k_rollouts < 1) out.push_back("k_rollouts must be >= 1");
    if (!(advantage_epsilon > 0.0)) out.push_back("advantage_epsilon must be positive");
    return out;
}

std::vector<std::string> GrpoConfig::validate() const {
    std::vector<std::string> out;
    if (group_size < 2) out.push_back("group_size must be >= 2");
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) out.push_back("clip_epsilon must be in (0,1)");
    if (!(kl_beta >= 0.0)) out.push_back("kl_beta must be non-negative");
    if (!(learning_rate > 0.0)) out.push_back("learning_rate must be positive");
    if (iterations < 0) out.push_back("iterations must be non-negative");
    if (episodes_per_iter < 1) out.push_back("episodes_per_iter must be >= 1");
    if (theta_old_refresh < 1) out.push_back("theta_old_refresh must be >= 1");
    return out;
}

ActionVocab ActionVocab::guiact() {
    return ActionVocab({{"CLICK", true},
                        {"HOVER", true},
                        {"TAP", true},
                        {"INPUT", true},
                        {"SCROLL", false},
                        {"SWIPE", false},
                        {"SELECT_TEXT", true},
                        {"COPY", false},
                        {"ENTER", false},
                        {"SELECT", true},
                        {"ANSWER", false}});
}

ActionVocab ActionVocab::mind2web() {
    return ActionVocab({{"CLICK", true}, {"TYPE", true}, {"SELECT", true}});
}

ActionVocab ActionVocab::miniwob() {
    return ActionVocab({{"CLICK", true}, {"TYPE", true}});
}

ActionVocab ActionVocab::aitw() {
    return ActionVocab({{"CLICK", true},
                        {"TYPE", true},
                        {"SELECT", true},
                        {"SCROLL_UP", false},
                        {"SCROLL_DOWN", false},
                        {"SCROLL_LEFT", false},
                        {"SCROLL_RIGHT", false},
                        {"PRESS_BACK", false},
                        {"PRESS_HOME", false},
                        {"PRESS_ENTER", false},
                        {"STATUS_TASK_COMPLETE", false},
                        {"STATUS_TASK_IMPOSSIBLE", false}});
}

ActionVocab ActionVocab::sim_default() {
    return ActionVocab({{"CLICK", true}, {"INPUT", true}, {"ENTER", false}});
}

std::optional<ActionVocab> ActionVocab::preset(const std::string& name) {
    if (name == "guiact") return guiact();
    if (name == "mind2web") return mind2web();
    if (name == "miniwob") return miniwob();
    if (name == "aitw") return aitw();
    if (name == "sim") return sim_default();
    return std::nullopt;
}

bool ActionVocab::contains(const std::string& type) const {
    for (const auto& t : types_)
        if (t.name == type) return true;
    return false;
}

bool ActionVocab::spatial(const std::string& type) const {
    for (const auto& t : types_)
        if (t.name == type) return t.needs_position;
    return false;
}

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void check_bbox(const BBox& b, const std::string& where, std::vector<std::string>& out) {
    if (!(b.x1 <= b.x2 && b.y1 <= b.y2))
        out.push_back(where + ": bbox must satisfy x1 <= x2 and y1 <= y2");
    if (!(in_unit(b.x1) && in_unit(b.y1) && in_unit(b.x2) && in_unit(b.y2)))
        out.push_back(where + ": bbox coordinates must lie in [0,1]");
}

} // namespace

std::vector<std::string> validate_action(const GuiAction& action, const ActionVocab& vocab) {
    std::vector<std::string> out;
    if (!vocab.contains(action.action_type)) {
        out.push_back("action_type '" + action.action_type + "' not in configured vocabulary");
        return out;
    }
    if (vocab.spatial(action.action_type)) {
        if (!action.position) {
            out.push_back("action '" + action.action_type + "' requires a position");
        } else if (!(in_unit(action.position->x) && in_unit(action.position->y))) {
            out.push_back("action position must lie in [0,1]");
        }
    } else if (action.position) {
        out.push_back("action '" + action.action_type + "' must not carry a position");
    }
    return out;
}

std::vector<std::string> validate_episode(const Episode& episode, const ActionVocab& vocab) {
    std::vector<std::string> out;
    if (episode.steps.empty()) {
        out.push_back("episode '" + episode.episode_id + "': steps non-empty");
        return out;
    }
    for (size_t i = 0; i < episode.steps.size(); ++i) {
        const Step& step = episode.steps[i];
        const std::string where = "episode '" + episode.episode_id + "' step " + std::to_string(i);
        if (step.index != static_cast<int>(i))
            out.push_back(where + ": indices must be contiguous from 0");

        const Observation& obs = step.observation;
        if (obs.width <= 0 || obs.height <= 0)
            out.push_back(where + ": observation dimensions must be positive");
        std::unordered_set<std::string> ids;
        for (const auto& el : obs.elements) {
            if (!ids.insert(el.element_id).second)
                out.push_back(where + ": duplicate element_id '" + el.element_id + "'");
            check_bbox(el.bbox, where + " element '" + el.element_id + "'", out);
        }

        for (auto& v : validate_action(step.gt_action, vocab)) out.push_back(where + ": " + v);
        if (step.gt_bbox) check_bbox(*step.gt_bbox, where + " gt_bbox", out);
        if (step.gt_action.position) {
            if (!step.gt_bbox)
                out.push_back(where + ": spatial gt_action requires gt_bbox");
            else if (!step.gt_bbox->contains(*step.gt_action.position))
                out.push_back(where + ": gt position lies outside gt_bbox");
        }
    }
    return out;
}

std::vector<std::string> validate_episode(const Episode& episode) {
    return validate_episode(episode, ActionVocab::guiact());
}

} // namespace guirise
