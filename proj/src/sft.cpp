#include "guirise/sft.hpp"

#include <map>

#include "guirise/errors.hpp"
#include "guirise/grammar.hpp"
#include "guirise/util.hpp"

namespace guirise {

std::vector<int> build_target(const ToyModel& model, const PseudoLabel& label) {
    std::string text = serialize_turn(label.progress, label.decision, label.gt_action,
                                      label.summary, model.actions());
    std::vector<int> tokens = tokenize(model.vocab(), text);
    tokens.push_back(Vocab::kEos);
    return tokens;
}

std::vector<SftExample> build_sft_dataset(const ToyModel& model,
                                          const std::vector<Episode>& episodes,
                                          const std::vector<PseudoLabel>& labels) {
    std::map<std::string, const Episode*> by_id;
    for (const auto& ep : episodes) by_id[ep.episode_id] = &ep;

    std::vector<SftExample> out;
    std::map<std::string, int> next_t;      // enforced chaining cursor
    std::map<std::string, std::string> prev_summary;
    for (const auto& label : labels) {
        auto it = by_id.find(label.episode_id);
        if (it == by_id.end())
            throw std::invalid_argument("label references unknown episode " + label.episode_id);
        const Episode& ep = *it->second;
        int expected = next_t[label.episode_id];
        if (label.t != expected)
            throw std::invalid_argument("labels for episode " + label.episode_id +
                                        " are out of order: expected t=" +
                                        std::to_string(expected) + ", got t=" +
                                        std::to_string(label.t));
        if (label.t >= static_cast<int>(ep.steps.size()))
            throw std::invalid_argument("label t out of range for episode " + label.episode_id);

        SftExample ex;
        ex.episode_id = label.episode_id;
        ex.t = label.t;
        ex.context = {ep.instruction, ep.steps[label.t].observation,
                      prev_summary[label.episode_id]};
        ex.target = build_target(model, label);
        out.push_back(std::move(ex));

        prev_summary[label.episode_id] = label.summary;
        next_t[label.episode_id] = label.t + 1;
    }
    return out;
}

double ce_loss(const ToyModel& model, const Params& params, const PolicyContext& ctx,
               const std::vector<int>& target, Params* grad) {
    if (target.empty()) throw std::invalid_argument("ce_loss needs a non-empty target");
    std::vector<double> coeffs(target.size(), -1.0); // d(loss) = -d(sum logprob)
    auto lps = model.eval_sequence(params, ctx, target, nullptr, grad ? coeffs.data() : nullptr,
                                   nullptr, grad, nullptr);
    double loss = 0.0;
    for (double lp : lps) loss -= lp;
    return loss;
}

std::vector<std::string> SftConfig::validate() const {
    std::vector<std::string> out;
    if (!(learning_rate > 0.0)) out.push_back("learning_rate must be positive");
    if (iterations < 0) out.push_back("iterations must be non-negative");
    if (batch_size < 1) out.push_back("batch_size must be >= 1");
    return out;
}

std::vector<SftStats> sft_train(Params& params, const ToyModel& model,
                                const std::vector<SftExample>& examples, const SftConfig& cfg,
                                int workers) {
    if (examples.empty()) throw std::invalid_argument("sft_train needs at least one example");
    std::vector<SftStats> stats;
    stats.reserve(cfg.iterations);
    const size_t n = examples.size();
    const size_t batch = std::min<size_t>(cfg.batch_size, n);

    std::vector<Params> grads(batch);
    std::vector<double> losses(batch);
    for (int it = 0; it < cfg.iterations; ++it) {
        parallel_for(batch, workers, [&](size_t k) {
            const SftExample& ex = examples[(static_cast<size_t>(it) * batch + k) % n];
            grads[k] = model.zero_params();
            losses[k] = ce_loss(model, params, ex.context, ex.target, &grads[k]);
        });
        // Serialized, index-ordered update.
        double step = cfg.learning_rate / static_cast<double>(batch);
        double loss_sum = 0.0;
        for (size_t k = 0; k < batch; ++k) {
            loss_sum += losses[k];
            for (size_t i = 0; i < params.size(); ++i) params[i] -= step * grads[k][i];
        }
        stats.push_back({it, loss_sum / static_cast<double>(batch)});
    }
    return stats;
}

} // namespace guirise
