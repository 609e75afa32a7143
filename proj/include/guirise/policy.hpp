#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "guirise/tokenizer.hpp"
#include "guirise/types.hpp"

namespace guirise {

struct PolicyContext {
    std::string instruction;
    Observation observation;
    std::string history;
};

struct SampledTurn {
    AgentTurn turn;
    std::vector<int> token_ids;
    std::vector<double> token_logprobs; // one per token, under the sampling params
};

// Sampling contract shared by the toy, scripted and remote policies. All
// memory flows through the history text; implementations hold no hidden
// state across turns.
class Policy {
public:
    virtual ~Policy() = default;
    virtual bool can_sample() const { return true; }
    virtual std::vector<SampledTurn> sample(const PolicyContext& ctx, int n, DecodeMode mode,
                                            uint64_t seed) = 0;
};

struct ToyPolicyConfig {
    int hash_dim = 1 << 18;
    int coord_bins = 20;
    int max_len = 96;
};

using Params = std::vector<double>;

// Linear-softmax autoregressive policy over the closed vocabulary. Logits at
// each decoding position are sums of hashed (feature, token) weights; the
// features are a bag of role-tagged context tokens (instruction words,
// element kind:label pairs, history words) plus the previous one to four
// output tokens. Coordinates are emitted as bin tokens.
class ToyModel {
public:
    ToyModel(ToyPolicyConfig cfg, ActionVocab actions, std::vector<std::string> lexicon);

    const Vocab& vocab() const { return vocab_; }
    const ActionVocab& actions() const { return actions_; }
    const ToyPolicyConfig& config() const { return cfg_; }

    Params zero_params() const { return Params(cfg_.hash_dim, 0.0); }

    std::vector<SampledTurn> sample(const Params& params, const PolicyContext& ctx, int n,
                                    DecodeMode mode, uint64_t seed) const;

    // Per-token log-probabilities of an existing sequence; matches the
    // bookkeeping sample() records for the same params.
    std::vector<double> token_logprobs(const Params& params, const PolicyContext& ctx,
                                       const std::vector<int>& tokens) const;

    // Accumulates sum_j pg_coeffs[j] * grad(logprob(tokens[j])) and, when ref
    // and kl_coeffs are given, sum_j kl_coeffs[j] * grad(KL_j(params || ref))
    // into grad. Returns per-position logprobs; fills kls when ref is given.
    std::vector<double> eval_sequence(const Params& params, const PolicyContext& ctx,
                                      const std::vector<int>& tokens, const Params* ref,
                                      const double* pg_coeffs, const double* kl_coeffs,
                                      Params* grad, std::vector<double>* kls) const;

    // (per-token logprobs, gradient of their sum w.r.t. params).
    std::pair<std::vector<double>, Params> logprob_and_grad(const Params& params,
                                                            const PolicyContext& ctx,
                                                            const std::vector<int>& tokens) const;

    // Exact categorical KL(params || ref) at the position following prefix.
    double kl_token(const Params& params, const Params& ref, const PolicyContext& ctx,
                    const std::vector<int>& prefix) const;

    // Distribution over the vocabulary at the position following prefix.
    std::vector<double> next_token_probs(const Params& params, const PolicyContext& ctx,
                                         const std::vector<int>& prefix) const;

private:
    friend class ContextFeatures;
    Vocab vocab_;
    ToyPolicyConfig cfg_;
    ActionVocab actions_;
    std::vector<std::string> lexicon_;
};

// Model + params persisted together so a run can be reproduced exactly.
struct ToyPolicySnapshot {
    ToyPolicyConfig cfg;
    std::vector<ActionTypeSpec> action_types;
    std::vector<std::string> lexicon;
    Params params;

    ToyModel make_model() const;
    void save(const std::filesystem::path& path) const;
    static ToyPolicySnapshot load(const std::filesystem::path& path);
};

// Policy adapter over (model, params).
class ToyPolicy : public Policy {
public:
    ToyPolicy(const ToyModel& model, const Params& params) : model_(model), params_(params) {}
    std::vector<SampledTurn> sample(const PolicyContext& ctx, int n, DecodeMode mode,
                                    uint64_t seed) override {
        return model_.sample(params_, ctx, n, mode, seed);
    }

private:
    const ToyModel& model_;
    const Params& params_;
};

// Step-indexed predictor used by the evaluation harness. Scripted reference
// policies read the episode; learned policies only see (instruction,
// observation, history).
class EvalPolicy {
public:
    virtual ~EvalPolicy() = default;
    virtual AgentTurn predict(const Episode& episode, int t, const std::string& history) = 0;
};

// Wraps the simulator ground truth into a perfectly formatted turn.
std::unique_ptr<EvalPolicy> make_scripted_oracle();
// Oracle that fails each step independently with probability p.
std::unique_ptr<EvalPolicy> make_scripted_corrupt(double p, uint64_t seed);
// Guesses among the on-screen buttons without looking at the history.
std::unique_ptr<EvalPolicy> make_history_blind(uint64_t seed);
// Greedy toy-policy predictor.
std::unique_ptr<EvalPolicy> make_toy_eval(const ToyModel& model, const Params& params);

// HTTP client for the POST /v1/rollout protocol. Turns come back parsed;
// token_logprobs may be absent, which marks the result evaluation-only.
class RemotePolicy : public Policy {
public:
    explicit RemotePolicy(std::string base_url, int timeout_ms = 5000);
    std::vector<SampledTurn> sample(const PolicyContext& ctx, int n, DecodeMode mode,
                                    uint64_t seed) override;

private:
    std::string base_url_;
    int timeout_ms_;
};

std::unique_ptr<EvalPolicy> make_remote_eval(const std::string& base_url);

} // namespace guirise
