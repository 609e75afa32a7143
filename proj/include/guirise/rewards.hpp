#pragma once

#include "guirise/policy.hpp"
#include "guirise/types.hpp"

namespace guirise {

// 1 iff the turn passed the four-tag check.
double format_reward(const AgentTurn& turn);

struct ActionComponents {
    double r_af = 0.0;   // record parsed with exactly the three keys
    double r_type = 0.0; // predicted type equals ground-truth type
    double r_pos = 0.0;  // predicted point inside the target box (inclusive)
};

// The three binary action sub-rewards. A failed parse gates all components
// to zero. For non-spatial ground truth, the position component is earned by
// matching the type (no box exists to hit). Reasoning and summary blocks
// never influence these.
ActionComponents action_component_rewards(const AgentTurn& turn, const GuiAction& gt,
                                          const std::optional<BBox>& gt_bbox);

// r_a = r_af + lambda_type * r_type + lambda_pos * r_pos.
double action_reward(const ActionComponents& c, const RewardConfig& cfg);

// Mean action reward of k gradient-free rollouts at the next step,
// conditioned on the candidate summary. Zero when the current action reward
// is zero, and zero at the final step (no next step exists). Greedy rollouts
// collapse the k samples into one evaluation.
double history_summary_reward(const std::string& summary, double r_a,
                              const std::string& instruction, const Step* next_step,
                              Policy& policy, const RewardConfig& cfg, uint64_t seed);

// r = r_f + lambda_a * r_a + lambda_h * r_h.
double total_reward(double r_f, double r_a, double r_h, const RewardConfig& cfg);

// Convenience: full breakdown for one sampled turn against one step.
RewardBreakdown score_turn(const AgentTurn& turn, const Step& step, const std::string& instruction,
                           const Step* next_step, Policy& policy, const RewardConfig& cfg,
                           uint64_t seed);

} // namespace guirise
