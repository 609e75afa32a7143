#pragma once

#include <string>
#include <vector>

#include "guirise/types.hpp"

namespace guirise {

struct StepMetrics {
    double ele_acc = 0.0; // predicted point inside the target box (type match for non-spatial)
    double op_f1 = 0.0;   // bag-of-tokens F1 over "type value", case-folded
    double step_sr = 0.0; // ele_acc == 1 and op_f1 == 1
};

StepMetrics step_metrics(const std::optional<GuiAction>& pred, const GuiAction& gt,
                         const std::optional<BBox>& gt_bbox);

// Per-step success under the mobile-benchmark protocol, simplified to type
// match plus point-in-box (no rendered screens exist here): spatial actions
// need the point inside the box, non-spatial actions need the type only.
// Value text is never scored.
double action_accuracy(const std::optional<GuiAction>& pred, const GuiAction& gt,
                       const std::optional<BBox>& gt_bbox);

struct ReportRow {
    std::string split;
    std::string episode_id;
    int step = 0;
    StepMetrics metrics;
    double action_acc = 0.0;
};

struct SplitSummary {
    std::string split;
    size_t steps = 0;
    double ele_acc = 0.0;
    double op_f1 = 0.0;
    double step_sr = 0.0;
    double action_acc = 0.0;
};

struct Report {
    std::vector<SplitSummary> splits;
    SplitSummary overall; // unweighted mean over splits
};

// Unweighted mean over steps within each split; overall averages the split
// means. Throws EmptyReport on no rows.
Report aggregate(const std::vector<ReportRow>& rows);

// Lowercased alphanumeric runs of "type value"; the unit of Op.F1.
std::vector<std::string> op_tokens(const GuiAction& action);

} // namespace guirise
