#pragma once

#include <vector>

#include "guirise/dataset_io.hpp"
#include "guirise/policy.hpp"

namespace guirise {

// Target token sequence for one pseudo-label: the canonical four-tag turn
// under the toy vocabulary, EOS-terminated. Unknown words map to UNK.
std::vector<int> build_target(const ToyModel& model, const PseudoLabel& label);

struct SftExample {
    std::string episode_id;
    int t = 0;
    PolicyContext context;
    std::vector<int> target;
};

// Joins labels with their episodes. Contexts condition on the previous
// step's pseudo summary; the builder enforces that labels arrive chained
// (t = 0..n-1, contiguous, per episode) and throws on out-of-order input.
std::vector<SftExample> build_sft_dataset(const ToyModel& model,
                                          const std::vector<Episode>& episodes,
                                          const std::vector<PseudoLabel>& labels);

// Token-level cross-entropy under teacher forcing: -sum_j log P(y_j | y_<j, ctx).
// Returns the loss and accumulates its gradient when grad is non-null.
double ce_loss(const ToyModel& model, const Params& params, const PolicyContext& ctx,
               const std::vector<int>& target, Params* grad);

struct SftConfig {
    double learning_rate = 0.4;
    int iterations = 400;
    int batch_size = 16;

    std::vector<std::string> validate() const;
};

struct SftStats {
    int iteration = 0;
    double loss = 0.0; // mean per-example loss over the batch
};

// Mini-batch gradient descent over the examples; batches cycle
// deterministically. Returns the per-iteration losses.
std::vector<SftStats> sft_train(Params& params, const ToyModel& model,
                                const std::vector<SftExample>& examples, const SftConfig& cfg,
                                int workers);

} // namespace guirise
