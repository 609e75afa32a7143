#pragma once

#include <vector>

#include "guirise/policy.hpp"
#include "guirise/rewards.hpp"
#include "guirise/types.hpp"

namespace guirise {

// G sampled turns for one context, with rewards and group-normalized
// advantages.
struct RolloutGroup {
    PolicyContext context;
    std::string episode_id;
    int step_index = 0;
    std::vector<SampledTurn> members;
    std::vector<RewardBreakdown> rewards;
    std::vector<double> advantages;
};

struct TrainerState {
    Params theta;
    Params theta_old; // sampling snapshot
    Params theta_ref; // frozen post-SFT reference
    int iteration = 0;
};

// (r_i - mean) / population std; all zero when the std falls below epsilon.
std::vector<double> compute_advantages(const std::vector<double>& rewards, double epsilon);

struct GroupObjective {
    double objective = 0.0;
    double mean_kl = 0.0;
};

// Token-level clipped surrogate with per-token KL penalty against the
// reference params. Member values average over their tokens, the group value
// over members. Gradients flow through unclipped ratio paths only; the KL
// term always contributes. Stored member token_logprobs are the theta_old
// side of the ratio.
GroupObjective grpo_objective(const RolloutGroup& group, const ToyModel& model,
                              const Params& theta, const Params& theta_ref, double clip_epsilon,
                              double kl_beta, Params* grad);

struct IterationStats {
    int iteration = 0;
    double mean_reward = 0.0;
    double mean_r_f = 0.0;
    double mean_r_a = 0.0;
    double mean_r_h = 0.0;
    double objective = 0.0;
    double mean_kl = 0.0;
};

struct IterationResult {
    std::vector<RolloutGroup> groups;
    IterationStats stats;
};

// One GRPO step over a batch of episodes: sample G turns per ground-truth
// step from theta_old (histories chained from theta_old's own greedy
// summaries), score with the full reward stack, normalize advantages, ascend
// the objective once, then refresh theta_old on its cadence. Deterministic
// for a fixed (state, batch, seed) regardless of worker count.
IterationResult train_iteration(TrainerState& state, const ToyModel& model,
                                const std::vector<const Episode*>& batch,
                                const RewardConfig& rcfg, const GrpoConfig& gcfg,
                                uint64_t root_seed, int workers);

} // namespace guirise
