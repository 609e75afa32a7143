#include "guirise/rewards.hpp"

#include "guirise/errors.hpp"
#include "guirise/grammar.hpp"
#include "guirise/rng.hpp"
#include "guirise/sim.hpp"

namespace guirise {

double format_reward(const AgentTurn& turn) { return turn.tags_ok ? 1.0 : 0.0; }

ActionComponents action_component_rewards(const AgentTurn& turn, const GuiAction& gt,
                                          const std::optional<BBox>& gt_bbox) {
    ActionComponents c;
    if (!turn.parsed_action) return c; // parse failure gates everything
    const GuiAction& pred = *turn.parsed_action;
    c.r_af = 1.0;
    c.r_type = pred.action_type == gt.action_type ? 1.0 : 0.0;
    if (gt_bbox) {
        c.r_pos = pred.position && gt_bbox->contains(*pred.position) ? 1.0 : 0.0;
    } else {
        // Non-spatial ground truth: position credit follows the type match.
        c.r_pos = c.r_type;
    }
    return c;
}

double action_reward(const ActionComponents& c, const RewardConfig& cfg) {
    return c.r_af + cfg.lambda_type * c.r_type + cfg.lambda_pos * c.r_pos;
}

double history_summary_reward(const std::string& summary, double r_a,
                              const std::string& instruction, const Step* next_step,
                              Policy& policy, const RewardConfig& cfg, uint64_t seed) {
    if (r_a == 0.0) return 0.0;
    if (!next_step) return 0.0;
    if (!policy.can_sample()) throw PolicyUnavailable("history reward needs a sampling policy");

    PolicyContext ctx{instruction, next_step->observation, summary};
    // A deterministic decode makes the k rollouts identical; evaluate once.
    int n = cfg.history_rollout_mode == DecodeMode::Greedy ? 1 : cfg.k_rollouts;
    auto rollouts = policy.sample(ctx, n, cfg.history_rollout_mode, seed);
    double sum = 0.0;
    for (const auto& r : rollouts) {
        auto c = action_component_rewards(r.turn, next_step->gt_action, next_step->gt_bbox);
        sum += action_reward(c, cfg);
    }
    return sum / static_cast<double>(rollouts.size());
}

double total_reward(double r_f, double r_a, double r_h, const RewardConfig& cfg) {
    return r_f + cfg.lambda_a * r_a + cfg.lambda_h * r_h;
}

RewardBreakdown score_turn(const AgentTurn& turn, const Step& step, const std::string& instruction,
                           const Step* next_step, Policy& policy, const RewardConfig& cfg,
                           uint64_t seed) {
    RewardBreakdown b;
    b.r_f = format_reward(turn);
    auto c = action_component_rewards(turn, step.gt_action, step.gt_bbox);
    b.r_af = c.r_af;
    b.r_type = c.r_type;
    b.r_pos = c.r_pos;
    b.r_a = action_reward(c, cfg);
    b.r_h = history_summary_reward(turn.history_summary, b.r_a, instruction, next_step, policy,
                                   cfg, seed);
    b.total = total_reward(b.r_f, b.r_a, b.r_h, cfg);
    return b;
}

} // namespace guirise
