#include <algorithm>

#include "guirise/grammar.hpp"
#include "guirise/policy.hpp"
#include "guirise/rng.hpp"
#include "guirise/sim.hpp"
#include "guirise/util.hpp"

namespace guirise {

namespace {

class ScriptedOracle : public EvalPolicy {
public:
    AgentTurn predict(const Episode& episode, int t, const std::string& history) override {
        const Step& step = episode.steps[t];
        TurnTexts texts = sim_turn_texts(episode, t, history);
        std::string raw = serialize_turn(texts.progress, texts.decision, step.gt_action,
                                         texts.summary, sim_action_vocab());
        return parse_turn(raw, sim_action_vocab());
    }
};

class ScriptedCorrupt : public EvalPolicy {
public:
    ScriptedCorrupt(double p, uint64_t seed) : p_(p), seed_(seed) {}

    AgentTurn predict(const Episode& episode, int t, const std::string& history) override {
        Rng rng(mix_seed(seed_, fnv1a(episode.episode_id), static_cast<uint64_t>(t)));
        const Step& step = episode.steps[t];
        TurnTexts texts = sim_turn_texts(episode, t, history);
        GuiAction action = step.gt_action;
        if (rng.bernoulli(p_)) {
            // Wrong type and an off-screen corner; fails every step metric.
            action.action_type = step.gt_action.action_type == "CLICK" ? "INPUT" : "CLICK";
            action.value = "unk";
            action.position = Vec2{0.0, 0.0};
        }
        std::string raw =
            serialize_turn(texts.progress, texts.decision, action, texts.summary, sim_action_vocab());
        return parse_turn(raw, sim_action_vocab());
    }

private:
    double p_;
    uint64_t seed_;
};

class HistoryBlind : public EvalPolicy {
public:
    explicit HistoryBlind(uint64_t seed) : seed_(seed) {}

    AgentTurn predict(const Episode& episode, int t, const std::string&) override {
        Rng rng(mix_seed(seed_, fnv1a(episode.episode_id), static_cast<uint64_t>(t)));
        const Step& step = episode.steps[t];
        std::vector<const UiElement*> buttons;
        for (const auto& el : step.observation.elements)
            if (el.kind == ElementKind::Button) buttons.push_back(&el);
        GuiAction action{"ENTER", "", std::nullopt};
        if (!buttons.empty()) {
            const UiElement* pick = buttons[rng.next_below(buttons.size())];
            action = {"CLICK", pick->label, pick->bbox.center()};
        }
        std::string raw = serialize_turn("step " + std::to_string(t + 1), "execute now", action,
                                         "did " + describe_action(action), sim_action_vocab());
        return parse_turn(raw, sim_action_vocab());
    }

private:
    uint64_t seed_;
};

class ToyEval : public EvalPolicy {
public:
    ToyEval(const ToyModel& model, const Params& params) : model_(model), params_(params) {}

    AgentTurn predict(const Episode& episode, int t, const std::string& history) override {
        PolicyContext ctx{episode.instruction, episode.steps[t].observation, history};
        auto turns = model_.sample(params_, ctx, 1, DecodeMode::Greedy, 0);
        return turns.front().turn;
    }

private:
    const ToyModel& model_;
    const Params& params_;
};

} // namespace

std::unique_ptr<EvalPolicy> make_scripted_oracle() { return std::make_unique<ScriptedOracle>(); }

std::unique_ptr<EvalPolicy> make_scripted_corrupt(double p, uint64_t seed) {
    return std::make_unique<ScriptedCorrupt>(p, seed);
}

std::unique_ptr<EvalPolicy> make_history_blind(uint64_t seed) {
    return std::make_unique<HistoryBlind>(seed);
}

std::unique_ptr<EvalPolicy> make_toy_eval(const ToyModel& model, const Params& params) {
    return std::make_unique<ToyEval>(model, params);
}

} // namespace guirise
