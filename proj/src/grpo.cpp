#include "guirise/grpo.hpp"

#include <cmath>

#include "guirise/errors.hpp"
#include "guirise/rng.hpp"
#include "guirise/util.hpp"

namespace guirise {

std::vector<double> compute_advantages(const std::vector<double>& rewards, double epsilon) {
    const size_t g = rewards.size();
    if (g < 2) throw DimensionMismatch("advantage normalization needs a group of at least 2");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(g);
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(g);
    double std_dev = std::sqrt(var);
    std::vector<double> out(g, 0.0);
    if (std_dev < epsilon) return out;
    for (size_t i = 0; i < g; ++i) out[i] = (rewards[i] - mean) / std_dev;
    return out;
}

GroupObjective grpo_objective(const RolloutGroup& group, const ToyModel& model,
                              const Params& theta, const Params& theta_ref, double clip_epsilon,
                              double kl_beta, Params* grad) {
    const size_t g = group.members.size();
    if (g == 0) throw DimensionMismatch("empty rollout group");
    if (group.advantages.size() != g) throw DimensionMismatch("advantages do not match members");

    GroupObjective out;
    double kl_count = 0.0;
    for (size_t i = 0; i < g; ++i) {
        const SampledTurn& member = group.members[i];
        const size_t n_tokens = member.token_ids.size();
        if (n_tokens == 0 || member.token_logprobs.size() != n_tokens)
            throw DimensionMismatch("member lacks token logprobs under theta_old");

        std::vector<double> kls;
        std::vector<double> lp_new = model.eval_sequence(theta, group.context, member.token_ids,
                                                         &theta_ref, nullptr, nullptr, nullptr,
                                                         &kls);
        const double adv = group.advantages[i];
        const double member_weight = 1.0 / (static_cast<double>(g) * static_cast<double>(n_tokens));
        std::vector<double> pg_coeffs(n_tokens, 0.0), kl_coeffs(n_tokens, 0.0);
        double member_value = 0.0;
        for (size_t j = 0; j < n_tokens; ++j) {
            double ratio = std::exp(lp_new[j] - member.token_logprobs[j]);
            double clipped = std::min(std::max(ratio, 1.0 - clip_epsilon), 1.0 + clip_epsilon);
            double unclipped_term = ratio * adv;
            double clipped_term = clipped * adv;
            member_value += std::min(unclipped_term, clipped_term) - kl_beta * kls[j];
            // d(ratio*adv)/dtheta = adv * ratio * dlogprob; zero when the
            // clipped branch is strictly smaller.
            if (unclipped_term <= clipped_term) pg_coeffs[j] = adv * ratio * member_weight;
            kl_coeffs[j] = -kl_beta * member_weight;
            out.mean_kl += kls[j];
            kl_count += 1.0;
        }
        out.objective += member_value / static_cast<double>(n_tokens) / static_cast<double>(g);
        if (grad)
            model.eval_sequence(theta, group.context, member.token_ids, &theta_ref,
                                pg_coeffs.data(), kl_coeffs.data(), grad, nullptr);
    }
    if (kl_count > 0.0) out.mean_kl /= kl_count;
    return out;
}

namespace {

struct EpisodeWork {
    std::vector<RolloutGroup> groups;
    Params grad;
    GroupObjective objective_sum; // summed over the episode's groups
};

} // namespace

IterationResult train_iteration(TrainerState& state, const ToyModel& model,
                                const std::vector<const Episode*>& batch,
                                const RewardConfig& rcfg, const GrpoConfig& gcfg,
                                uint64_t root_seed, int workers) {
    const uint64_t iter = static_cast<uint64_t>(state.iteration);
    std::vector<EpisodeWork> work(batch.size());

    parallel_for(batch.size(), workers, [&](size_t e) {
        const Episode& ep = *batch[e];
        EpisodeWork& w = work[e];
        w.grad = model.zero_params();
        ToyPolicy sampler(model, state.theta_old);
        std::string history;
        for (size_t t = 0; t < ep.steps.size(); ++t) {
            RolloutGroup group;
            group.episode_id = ep.episode_id;
            group.step_index = static_cast<int>(t);
            group.context = {ep.instruction, ep.steps[t].observation, history};
            group.members = model.sample(state.theta_old, group.context, gcfg.group_size,
                                         DecodeMode::Stochastic,
                                         mix_seed(root_seed, iter, e, t, 0xA1u));

            const Step* next = t + 1 < ep.steps.size() ? &ep.steps[t + 1] : nullptr;
            std::vector<double> totals;
            for (size_t i = 0; i < group.members.size(); ++i) {
                RewardBreakdown b =
                    score_turn(group.members[i].turn, ep.steps[t], ep.instruction, next, sampler,
                               rcfg, mix_seed(root_seed, iter, e, t, i, 0xB2u));
                if (b.r_a == 0.0 && b.r_h != 0.0)
                    throw std::logic_error("history reward gate violated");
                totals.push_back(b.total);
                group.rewards.push_back(b);
            }
            group.advantages = compute_advantages(totals, rcfg.advantage_epsilon);

            GroupObjective obj = grpo_objective(group, model, state.theta, state.theta_ref,
                                                gcfg.clip_epsilon, gcfg.kl_beta, &w.grad);
            w.objective_sum.objective += obj.objective;
            w.objective_sum.mean_kl += obj.mean_kl;

            // Chain the next step's history from theta_old's greedy summary.
            history = model
                          .sample(state.theta_old, group.context, 1, DecodeMode::Greedy,
                                  mix_seed(root_seed, iter, e, t, 0xC3u))
                          .front()
                          .turn.history_summary;
            w.groups.push_back(std::move(group));
        }
    });

    // Index-ordered reduction keeps updates bit-identical across worker counts.
    IterationResult result;
    size_t n_groups = 0;
    for (auto& w : work) n_groups += w.groups.size();
    Params grad = model.zero_params();
    for (auto& w : work)
        for (size_t k = 0; k < grad.size(); ++k) grad[k] += w.grad[k];

    const double scale = gcfg.learning_rate / static_cast<double>(n_groups);
    for (size_t k = 0; k < grad.size(); ++k) state.theta[k] += scale * grad[k];

    IterationStats& s = result.stats;
    s.iteration = state.iteration;
    size_t n_members = 0;
    for (auto& w : work) {
        s.objective += w.objective_sum.objective;
        s.mean_kl += w.objective_sum.mean_kl;
        for (auto& g : w.groups) {
            for (auto& b : g.rewards) {
                s.mean_reward += b.total;
                s.mean_r_f += b.r_f;
                s.mean_r_a += b.r_a;
                s.mean_r_h += b.r_h;
                ++n_members;
            }
            result.groups.push_back(std::move(g));
        }
    }
    s.objective /= static_cast<double>(n_groups);
    s.mean_kl /= static_cast<double>(n_groups);
    s.mean_reward /= static_cast<double>(n_members);
    s.mean_r_f /= static_cast<double>(n_members);
    s.mean_r_a /= static_cast<double>(n_members);
    s.mean_r_h /= static_cast<double>(n_members);

    ++state.iteration;
    if (state.iteration % gcfg.theta_old_refresh == 0) state.theta_old = state.theta;
    return result;
}

} // namespace guirise
