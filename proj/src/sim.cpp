#include "guirise/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "guirise/errors.hpp"
#include "guirise/rng.hpp"

namespace guirise {

namespace {

const std::vector<std::string>& nato_labels() {
    static const std::vector<std::string> words = {
        "alpha",  "bravo",    "charlie", "delta", "echo",  "foxtrot", "golf",
        "hotel",  "india",    "juliet",  "kilo",  "lima",  "mike",    "november",
        "oscar",  "papa",     "quebec",  "romeo", "sierra", "tango",  "uniform",
        "victor", "whiskey",  "xray",    "yankee", "zulu"};
    return words;
}

constexpr int kColorBase = 26;
constexpr int kSearchIndex = 30;
constexpr int kScreenW = 1280;
constexpr int kScreenH = 800;

std::string pool_label(int idx) {
    const auto& nato = nato_labels();
    if (idx < static_cast<int>(nato.size())) return nato[idx];
    return "w" + std::to_string(idx);
}

// Global label registry index; drives the fixed label -> slot map.
int registry_index(const std::string& label) {
    const auto& nato = nato_labels();
    for (size_t i = 0; i < nato.size(); ++i)
        if (nato[i] == label) return static_cast<int>(i);
    const auto& colors = memory_probe_colors();
    for (size_t i = 0; i < colors.size(); ++i)
        if (colors[i] == label) return kColorBase + static_cast<int>(i);
    if (label == "search") return kSearchIndex;
    if (label.size() > 1 && label[0] == 'w') return std::atoi(label.c_str() + 1);
    return 0;
}

struct Grid {
    int rows, cols;
    int nslots() const { return rows * cols; }
    int slot_of(const std::string& label) const { return registry_index(label) % nslots(); }
    BBox box(int slot) const {
        int r = slot / cols, c = slot % cols;
        double cw = 1.0 / cols, ch = 1.0 / rows;
        double cx = (c + 0.5) * cw, cy = (r + 0.5) * ch;
        return {cx - 0.3 * cw, cy - 0.3 * ch, cx + 0.3 * cw, cy + 0.3 * ch};
    }
    Vec2 center(int slot) const { return box(slot).center(); }
};

struct ScreenItem {
    std::string label;
    ElementKind kind;
    int slot = -1; // -1: derive from the label registry
};

// Items earlier in the list win slot collisions.
Observation compose_screen(const Grid& grid, const std::vector<ScreenItem>& items) {
    Observation obs;
    obs.width = kScreenW;
    obs.height = kScreenH;
    std::unordered_set<int> taken;
    for (const auto& item : items) {
        int slot = item.slot >= 0 ? item.slot : grid.slot_of(item.label);
        if (!taken.insert(slot).second) continue;
        char id[8];
        std::snprintf(id, sizeof(id), "e%02d", slot);
        obs.elements.push_back({id, grid.box(slot), item.label, item.kind});
    }
    return obs;
}

std::vector<std::string> sample_labels(const Grid& grid, Rng& rng, int pool_size, int count,
                                       const std::vector<std::string>& exclude,
                                       const std::vector<int>& exclude_slots = {}) {
    std::vector<std::string> pool;
    for (int i = 0; i < pool_size; ++i) {
        std::string w = pool_label(i);
        if (std::find(exclude.begin(), exclude.end(), w) != exclude.end()) continue;
        if (std::find(exclude_slots.begin(), exclude_slots.end(), grid.slot_of(w)) !=
            exclude_slots.end())
            continue;
        pool.push_back(w);
    }
    rng.shuffle(pool);
    pool.resize(std::min<size_t>(pool.size(), count));
    return pool;
}

std::string join_with(const std::vector<std::string>& words, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i) out += sep;
        out += words[i];
    }
    return out;
}

Step make_click_step(const Grid& grid, int index, Observation obs, const std::string& label) {
    Step s;
    s.index = index;
    s.observation = std::move(obs);
    int slot = grid.slot_of(label);
    s.gt_action = {"CLICK", label, grid.center(slot)};
    s.gt_bbox = grid.box(slot);
    return s;
}

Episode gen_click_sequence(const SimConfig& cfg, const Grid& grid, Rng& rng, int length) {
    Episode ep;
    auto targets = sample_labels(grid, rng, cfg.value_vocab_size, length, {});
    auto distractors = sample_labels(grid, rng, cfg.value_vocab_size, cfg.n_distractors, targets);
    ep.instruction = "click " + join_with(targets, " then ");
    for (int t = 0; t < length; ++t) {
        std::vector<ScreenItem> items;
        items.push_back({targets[t], ElementKind::Button});
        for (int u = t + 1; u < length; ++u) items.push_back({targets[u], ElementKind::Link});
        for (const auto& d : distractors) items.push_back({d, ElementKind::Link});
        ep.steps.push_back(make_click_step(grid, t, compose_screen(grid, items), targets[t]));
    }
    return ep;
}

Episode gen_fill_and_submit(const SimConfig& cfg, const Grid& grid, Rng& rng, int length) {
    Episode ep;
    int n_fields = length - 1;
    auto fields = sample_labels(grid, rng, cfg.value_vocab_size, n_fields, {});
    auto distractors = sample_labels(grid, rng, cfg.value_vocab_size, cfg.n_distractors, fields);
    ep.instruction = "fill " + join_with(fields, " and ") + " in the form then press enter";
    for (int t = 0; t < n_fields; ++t) {
        std::vector<ScreenItem> items;
        items.push_back({fields[t], ElementKind::Field});
        for (int u = t + 1; u < n_fields; ++u) items.push_back({fields[u], ElementKind::Link});
        for (const auto& d : distractors) items.push_back({d, ElementKind::Link});
        Step s;
        s.index = t;
        s.observation = compose_screen(grid, items);
        int slot = grid.slot_of(fields[t]);
        s.gt_action = {"INPUT", fields[t], grid.center(slot)};
        s.gt_bbox = grid.box(slot);
        ep.steps.push_back(std::move(s));
    }
    Step last;
    last.index = n_fields;
    std::vector<ScreenItem> items;
    for (const auto& d : distractors) items.push_back({d, ElementKind::Link});
    last.observation = compose_screen(grid, items);
    last.gt_action = {"ENTER", "", std::nullopt};
    ep.steps.push_back(std::move(last));
    return ep;
}

Episode gen_search_then_select(const SimConfig& cfg, const Grid& grid, Rng& rng, int length) {
    Episode ep;
    int n_items = std::max(1, length - 1);
    auto targets = sample_labels(grid, rng, cfg.value_vocab_size, n_items, {"search"});
    auto distractors =
        sample_labels(grid, rng, cfg.value_vocab_size, cfg.n_distractors, [&] {
            auto ex = targets;
            ex.push_back("search");
            return ex;
        }());
    ep.instruction = "search for " + targets[0] + " then select " + join_with(targets, " then ");

    // Step 0: type the query into the search field.
    std::vector<ScreenItem> items;
    items.push_back({"search", ElementKind::Field});
    for (const auto& d : distractors) items.push_back({d, ElementKind::Link});
    Step s0;
    s0.index = 0;
    s0.observation = compose_screen(grid, items);
    int slot = grid.slot_of("search");
    s0.gt_action = {"INPUT", targets[0], grid.center(slot)};
    s0.gt_bbox = grid.box(slot);
    ep.steps.push_back(std::move(s0));

    // Result screens: click through the found items.
    for (int t = 0; t < n_items; ++t) {
        std::vector<ScreenItem> ritems;
        ritems.push_back({targets[t], ElementKind::Button});
        for (int u = t + 1; u < n_items; ++u) ritems.push_back({targets[u], ElementKind::Link});
        for (const auto& d : distractors) ritems.push_back({d, ElementKind::Link});
        ep.steps.push_back(make_click_step(grid, t + 1, compose_screen(grid, ritems), targets[t]));
    }
    return ep;
}

Episode gen_memory_probe(const SimConfig& cfg, const Grid& grid, Rng& rng, int length) {
    Episode ep;
    const auto& colors = memory_probe_colors();
    std::string code = colors[rng.next_below(colors.size())];
    int n_clicks = length - 1;
    // The banner occupies the last grid slot, so keep targets and distractors
    // off it.
    const int banner_slot = grid.nslots() - 1;
    auto targets = sample_labels(grid, rng, cfg.value_vocab_size, n_clicks, {}, {banner_slot});
    auto distractors =
        sample_labels(grid, rng, cfg.value_vocab_size, cfg.n_distractors, targets, {banner_slot});
    ep.instruction = "note the code color then click " + join_with(targets, " then ") +
                     " then click the code color button";

    for (int t = 0; t < n_clicks; ++t) {
        std::vector<ScreenItem> items;
        items.push_back({targets[t], ElementKind::Button});
        // The code is shown once, on the step-0 screen only.
        if (t == 0) items.push_back({code, ElementKind::Toggle, banner_slot});
        for (int u = t + 1; u < n_clicks; ++u) items.push_back({targets[u], ElementKind::Link});
        for (const auto& d : distractors) items.push_back({d, ElementKind::Link});
        ep.steps.push_back(make_click_step(grid, t, compose_screen(grid, items), targets[t]));
    }

    // Final screen: all candidate colors, indistinguishable without history.
    std::vector<ScreenItem> items;
    for (const auto& c : colors) items.push_back({c, ElementKind::Button});
    ep.steps.push_back(
        make_click_step(grid, n_clicks, compose_screen(grid, items), code));
    return ep;
}

} // namespace

const char* to_string(TaskFamily f) {
    switch (f) {
        case TaskFamily::ClickSequence: return "click-sequence";
        case TaskFamily::FillAndSubmit: return "fill-and-submit";
        case TaskFamily::SearchThenSelect: return "search-then-select";
        case TaskFamily::MemoryProbe: return "memory-probe";
    }
    return "click-sequence";
}

std::optional<TaskFamily> task_family_from_string(const std::string& s) {
    if (s == "click-sequence") return TaskFamily::ClickSequence;
    if (s == "fill-and-submit") return TaskFamily::FillAndSubmit;
    if (s == "search-then-select") return TaskFamily::SearchThenSelect;
    if (s == "memory-probe") return TaskFamily::MemoryProbe;
    return std::nullopt;
}

const std::vector<std::string>& memory_probe_colors() {
    static const std::vector<std::string> colors = {"blue", "red", "green", "yellow"};
    return colors;
}

ActionVocab sim_action_vocab() { return ActionVocab::sim_default(); }

std::vector<std::string> SimConfig::validate() const {
    std::vector<std::string> out;
    if (rows < 1 || cols < 1) out.push_back("grid must have at least one slot");
    if (episode_length_min < 1 || episode_length_max < episode_length_min)
        out.push_back("episode length range must satisfy 1 <= min <= max");
    if (rows * cols < episode_length_max)
        out.push_back("rows*cols must be >= episode_length_max");
    if (value_vocab_size < 2) out.push_back("value_vocab_size must be >= 2");
    if (value_vocab_size < episode_length_max)
        out.push_back("value_vocab_size must be >= episode_length_max");
    if (task_family == TaskFamily::MemoryProbe || task_family == TaskFamily::FillAndSubmit ||
        task_family == TaskFamily::SearchThenSelect) {
        if (episode_length_min < 2) out.push_back("this task family needs episode length >= 2");
    }
    if (n_distractors < 0) out.push_back("n_distractors must be >= 0");
    return out;
}

std::vector<Episode> generate_dataset(const SimConfig& config, int n_episodes) {
    auto violations = config.validate();
    if (!violations.empty()) throw ConfigError(violations.front());
    Grid grid{config.rows, config.cols};
    std::vector<Episode> out;
    out.reserve(n_episodes);
    for (int i = 0; i < n_episodes; ++i) {
        Rng rng(mix_seed(config.rng_seed, 0x51u, static_cast<uint64_t>(i)));
        int length = static_cast<int>(
            rng.uniform_int(config.episode_length_min, config.episode_length_max));
        Episode ep;
        switch (config.task_family) {
            case TaskFamily::ClickSequence: ep = gen_click_sequence(config, grid, rng, length); break;
            case TaskFamily::FillAndSubmit: ep = gen_fill_and_submit(config, grid, rng, length); break;
            case TaskFamily::SearchThenSelect:
                ep = gen_search_then_select(config, grid, rng, length);
                break;
            case TaskFamily::MemoryProbe: ep = gen_memory_probe(config, grid, rng, length); break;
        }
        char id[64];
        std::snprintf(id, sizeof(id), "%s-%06d", to_string(config.task_family), i);
        ep.episode_id = id;
        out.push_back(std::move(ep));
    }
    return out;
}

std::vector<std::string> sim_lexicon(const SimConfig& config) {
    std::vector<std::string> out;
    int pool = std::max(config.value_vocab_size, 16);
    for (int i = 0; i < pool; ++i) out.push_back(pool_label(i));
    for (const auto& c : memory_probe_colors()) out.push_back(c);
    for (const char* w :
         {"search", "click", "then", "fill", "and", "in", "the", "form", "press", "enter",
          "for", "select", "note", "code", "color", "button", "matching", "step", "of", "task",
          "is", "under", "way", "done", "execute", "on", "now", "did", "so", "far", "nothing",
          "yet", "input", "went", "to", "item", "it"})
        out.push_back(w);
    return out;
}

std::string describe_action(const GuiAction& a) {
    if (a.action_type == "CLICK") return "click " + a.value;
    if (a.action_type == "INPUT") return "input " + a.value;
    if (a.action_type == "ENTER") return "press enter";
    std::string out;
    for (char c : a.action_type) out += (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c;
    if (!a.value.empty()) out += " " + a.value;
    return out;
}

TurnTexts sim_turn_texts(const Episode& episode, int t, const std::string& prev_summary) {
    const Step& step = episode.steps[t];
    TurnTexts out;
    out.progress = "step " + std::to_string(t + 1) + " of " + std::to_string(episode.steps.size());
    out.decision = "execute " + describe_action(step.gt_action) + " now";
    std::string note;
    if (t == 0) {
        for (const auto& el : step.observation.elements)
            if (el.kind == ElementKind::Toggle) note = " ; code " + el.label;
    }
    if (prev_summary.empty())
        out.summary = "did " + describe_action(step.gt_action) + note;
    else
        out.summary = prev_summary + " then " + describe_action(step.gt_action) + note;
    return out;
}

SimState SimState::from_episode(const Episode& episode) {
    SimState s(episode);
    // Terminal screen: the last observation with its acted-on element removed.
    s.final_observation_ = episode.steps.back().observation;
    if (episode.steps.back().gt_bbox) {
        auto& els = s.final_observation_.elements;
        std::erase_if(els, [&](const UiElement& el) {
            return el.bbox == *episode.steps.back().gt_bbox &&
                   el.label == episode.steps.back().gt_action.value;
        });
    }
    return s;
}

const Observation& SimState::observation() const {
    if (done()) return final_observation_;
    return episode_.steps[cursor_].observation;
}

void SimState::transition(const GuiAction& action) {
    if (done()) throw EpisodeFinished();
    const Step& goal = episode_.steps[cursor_];
    bool match = action.action_type == goal.gt_action.action_type;
    if (match && goal.gt_bbox) {
        match = action.position && goal.gt_bbox->contains(*action.position);
    }
    if (match)
        ++cursor_;
    else
        ++noop_count_;
}

GuiAction SimState::oracle_action() const {
    if (done()) throw EpisodeFinished();
    return episode_.steps[cursor_].gt_action;
}

} // namespace guirise
