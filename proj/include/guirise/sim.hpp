#pragma once

#include <string>
#include <vector>

#include "guirise/types.hpp"

namespace guirise {

enum class TaskFamily { ClickSequence, FillAndSubmit, SearchThenSelect, MemoryProbe };

const char* to_string(TaskFamily f);
std::optional<TaskFamily> task_family_from_string(const std::string& s);

struct SimConfig {
    int rows = 4;
    int cols = 4;
    TaskFamily task_family = TaskFamily::ClickSequence;
    int episode_length_min = 3;
    int episode_length_max = 3;
    int value_vocab_size = 16;
    uint64_t rng_seed = 0;
    int n_distractors = 3;

    std::vector<std::string> validate() const;
};

// Deterministic function of (config, seed): n episodes of the configured
// family, every one passing validate_episode. Memory-probe episodes place
// the disambiguating banner on the step-0 screen only.
std::vector<Episode> generate_dataset(const SimConfig& config, int n_episodes);

// Action-type vocabulary the simulator emits (CLICK, INPUT, ENTER).
ActionVocab sim_action_vocab();

// Every word the simulator and mock labeler can emit: labels, colors,
// instruction and reasoning-template words. This is what the policy
// vocabulary is frozen from; it is independent of the task family so one
// vocabulary covers mixed datasets.
std::vector<std::string> sim_lexicon(const SimConfig& config);

// Memory-probe candidate colors, in slot order.
const std::vector<std::string>& memory_probe_colors();

// Short text rendering of an action ("click alpha", "press enter").
std::string describe_action(const GuiAction& action);

// Formulaic reasoning texts for a ground-truth step, built only from lexicon
// words. Summaries chain: step t extends the previous step's summary, and the
// step-0 summary records the memory banner when one is on screen.
struct TurnTexts {
    std::string progress;
    std::string decision;
    std::string summary;
};
TurnTexts sim_turn_texts(const Episode& episode, int t, const std::string& prev_summary);

// Deterministic transition engine over an episode's hidden program.
class SimState {
public:
    static SimState from_episode(const Episode& episode);

    const Observation& observation() const;
    bool done() const { return cursor_ >= static_cast<int>(episode_.steps.size()); }
    int noop_count() const { return noop_count_; }
    int cursor() const { return cursor_; }

    // Advances the hidden program when the action matches the current goal
    // step (type match, and position inside the target box for spatial
    // types); otherwise only the no-op counter moves. Throws EpisodeFinished
    // on a done state.
    void transition(const GuiAction& action);

    // The unique action transition() accepts, positioned at the target box
    // center. Throws EpisodeFinished on a done state.
    GuiAction oracle_action() const;

private:
    explicit SimState(Episode episode) : episode_(std::move(episode)) {}
    Episode episode_;
    int cursor_ = 0;
    int noop_count_ = 0;
    Observation final_observation_;
};

} // namespace guirise
