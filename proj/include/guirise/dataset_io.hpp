#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "guirise/types.hpp"

namespace guirise {

// One pseudo-label per trajectory step, as produced by the labeler.
struct PseudoLabel {
    std::string episode_id;
    int t = 0;
    std::string progress;
    std::string decision;
    std::string summary;
    GuiAction gt_action;
};

// Line-delimited episode datasets: a "#schema=1" header line, then one
// episode per line, UTF-8. Field names match the domain types.
std::string episode_to_json(const Episode& episode);
Episode episode_from_json(const std::string& line);

void save_episodes(const std::filesystem::path& path, const std::vector<Episode>& episodes);
std::vector<Episode> load_episodes(const std::filesystem::path& path);

std::string label_to_json(const PseudoLabel& label);
PseudoLabel label_from_json(const std::string& line);

void save_labels(const std::filesystem::path& path, const std::vector<PseudoLabel>& labels);
std::vector<PseudoLabel> load_labels(const std::filesystem::path& path);

} // namespace guirise
