#include "guirise/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>

#include "guirise/errors.hpp"
#include "guirise/grammar.hpp"
#include "guirise/rng.hpp"
#include "guirise/util.hpp"

namespace guirise {

namespace {

// Feature roles; part of the hashed feature code so the same word acts
// differently as instruction text, element label or history text.
enum FeatureRole : uint64_t {
    kBias = 1,
    kPrev1 = 2,
    kPrev12 = 3,
    kPrev3 = 4,
    kPrev4 = 5,
    kCtxInstruction = 6,
    kCtxElement = 7,
    kCtxHistory = 8,
};

uint64_t feature_code(uint64_t role, uint64_t a = 0, uint64_t b = 0) {
    return mix_seed(role, a, b);
}

size_t weight_index(uint64_t feature, int token, int hash_dim) {
    return static_cast<size_t>(mix_seed(feature, static_cast<uint64_t>(token)) %
                               static_cast<uint64_t>(hash_dim));
}

} // namespace

// Context-derived features and their summed logits; shared by every decoding
// position of every turn sampled under the same context.
class ContextFeatures {
public:
    ContextFeatures(const ToyModel& model, const Params& params, const PolicyContext& ctx)
        : model_(model) {
        codes_.push_back(feature_code(kBias));
        std::set<int> uniq;
        for (int id : tokenize(model.vocab_, ctx.instruction)) uniq.insert(id);
        for (int id : uniq) codes_.push_back(feature_code(kCtxInstruction, id));
        for (const UiElement& el : ctx.observation.elements)
            codes_.push_back(
                feature_code(kCtxElement, static_cast<uint64_t>(el.kind), fnv1a(el.label)));
        uniq.clear();
        for (int id : tokenize(model.vocab_, ctx.history)) uniq.insert(id);
        for (int id : uniq) codes_.push_back(feature_code(kCtxHistory, id));

        const int V = model.vocab_.size();
        base_logits_.assign(V, 0.0);
        for (uint64_t f : codes_) {
            for (int v = 0; v < V; ++v)
                base_logits_[v] += params[weight_index(f, v, model.cfg_.hash_dim)];
        }
    }

    // logits at a position given the previous (up to four) emitted tokens.
    void position_logits(const Params& params, const std::vector<int>& prev4,
                         std::vector<double>& out) const {
        const int V = model_.vocab_.size();
        out = base_logits_;
        uint64_t feats[4] = {
            feature_code(kPrev1, static_cast<uint64_t>(prev4[0])),
            feature_code(kPrev12, static_cast<uint64_t>(prev4[0]), static_cast<uint64_t>(prev4[1])),
            feature_code(kPrev3, static_cast<uint64_t>(prev4[2])),
            feature_code(kPrev4, static_cast<uint64_t>(prev4[3])),
        };
        for (uint64_t f : feats)
            for (int v = 0; v < V; ++v) out[v] += params[weight_index(f, v, model_.cfg_.hash_dim)];
    }

    static std::vector<int> prev_window(const std::vector<int>& tokens, size_t j) {
        auto at = [&](int back) {
            int idx = static_cast<int>(j) - back;
            return idx >= 0 ? tokens[idx] : Vocab::kBos;
        };
        return {at(1), at(2), at(3), at(4)};
    }

    // Scatters per-token logit sensitivities into the hashed weights for one
    // position.
    void scatter_position(const std::vector<double>& d_logits, const std::vector<int>& prev4,
                          Params& grad) const {
        const int V = model_.vocab_.size();
        uint64_t feats[4] = {
            feature_code(kPrev1, static_cast<uint64_t>(prev4[0])),
            feature_code(kPrev12, static_cast<uint64_t>(prev4[0]), static_cast<uint64_t>(prev4[1])),
            feature_code(kPrev3, static_cast<uint64_t>(prev4[2])),
            feature_code(kPrev4, static_cast<uint64_t>(prev4[3])),
        };
        for (uint64_t f : feats)
            for (int v = 0; v < V; ++v)
                grad[weight_index(f, v, model_.cfg_.hash_dim)] += d_logits[v];
    }

    // Scatters the turn-aggregated sensitivities into the context features.
    void scatter_context(const std::vector<double>& d_logits_sum, Params& grad) const {
        const int V = model_.vocab_.size();
        for (uint64_t f : codes_)
            for (int v = 0; v < V; ++v)
                grad[weight_index(f, v, model_.cfg_.hash_dim)] += d_logits_sum[v];
    }

private:
    const ToyModel& model_;
    std::vector<uint64_t> codes_;
    std::vector<double> base_logits_;
};

ToyModel::ToyModel(ToyPolicyConfig cfg, ActionVocab actions, std::vector<std::string> lexicon)
    : vocab_(Vocab::build(actions, lexicon, cfg.coord_bins)),
      cfg_(cfg),
      actions_(std::move(actions)),
      lexicon_(std::move(lexicon)) {}

namespace {

void softmax_from_logits(const std::vector<double>& logits, std::vector<double>& probs,
                         double& log_z) {
    double mx = *std::max_element(logits.begin(), logits.end());
    probs.resize(logits.size());
    double z = 0.0;
    for (size_t v = 0; v < logits.size(); ++v) {
        probs[v] = std::exp(logits[v] - mx);
        z += probs[v];
    }
    for (double& p : probs) p /= z;
    log_z = mx + std::log(z);
}

int pick_token(const std::vector<double>& probs, DecodeMode mode, Rng& rng) {
    if (mode == DecodeMode::Greedy) {
        int best = 0;
        for (size_t v = 1; v < probs.size(); ++v)
            if (probs[v] > probs[best]) best = static_cast<int>(v);
        return best;
    }
    double r = rng.uniform01();
    double acc = 0.0;
    for (size_t v = 0; v < probs.size(); ++v) {
        acc += probs[v];
        if (r < acc) return static_cast<int>(v);
    }
    return static_cast<int>(probs.size()) - 1;
}

} // namespace

std::vector<SampledTurn> ToyModel::sample(const Params& params, const PolicyContext& ctx, int n,
                                          DecodeMode mode, uint64_t seed) const {
    if (params.size() != static_cast<size_t>(cfg_.hash_dim))
        throw DimensionMismatch("params size does not match hash_dim");
    ContextFeatures feats(*this, params, ctx);
    std::vector<SampledTurn> out;
    out.reserve(n);
    std::vector<double> logits, probs;
    for (int i = 0; i < n; ++i) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(i)));
        SampledTurn st;
        for (int j = 0; j < cfg_.max_len; ++j) {
            auto prev4 = ContextFeatures::prev_window(st.token_ids, j);
            feats.position_logits(params, prev4, logits);
            double log_z;
            softmax_from_logits(logits, probs, log_z);
            int y = pick_token(probs, mode, rng);
            st.token_ids.push_back(y);
            st.token_logprobs.push_back(logits[y] - log_z);
            if (y == Vocab::kEos) break;
        }
        st.turn = parse_turn(detokenize(vocab_, st.token_ids), actions_);
        out.push_back(std::move(st));
    }
    return out;
}

std::vector<double> ToyModel::eval_sequence(const Params& params, const PolicyContext& ctx,
                                            const std::vector<int>& tokens, const Params* ref,
                                            const double* pg_coeffs, const double* kl_coeffs,
                                            Params* grad, std::vector<double>* kls) const {
    if (params.size() != static_cast<size_t>(cfg_.hash_dim))
        throw DimensionMismatch("params size does not match hash_dim");
    for (int t : tokens)
        if (t < 0 || t >= vocab_.size())
            throw UnknownToken("token id " + std::to_string(t) + " outside vocabulary");

    const int V = vocab_.size();
    ContextFeatures feats(*this, params, ctx);
    std::optional<ContextFeatures> ref_feats;
    if (ref) ref_feats.emplace(*this, *ref, ctx);

    std::vector<double> logprobs(tokens.size());
    if (kls) kls->assign(tokens.size(), 0.0);
    std::vector<double> logits, probs, ref_logits, ref_probs, d_logits, d_sum;
    if (grad) d_sum.assign(V, 0.0);

    for (size_t j = 0; j < tokens.size(); ++j) {
        auto prev4 = ContextFeatures::prev_window(tokens, j);
        feats.position_logits(params, prev4, logits);
        double log_z;
        softmax_from_logits(logits, probs, log_z);
        logprobs[j] = logits[tokens[j]] - log_z;

        double kl = 0.0;
        double ref_log_z = 0.0;
        if (ref) {
            ref_feats->position_logits(*ref, prev4, ref_logits);
            softmax_from_logits(ref_logits, ref_probs, ref_log_z);
            for (int v = 0; v < V; ++v) {
                double lp = logits[v] - log_z;
                double lq = ref_logits[v] - ref_log_z;
                kl += probs[v] * (lp - lq);
            }
            if (kls) (*kls)[j] = kl;
        }

        if (grad) {
            d_logits.assign(V, 0.0);
            if (pg_coeffs && pg_coeffs[j] != 0.0) {
                double c = pg_coeffs[j];
                for (int v = 0; v < V; ++v) d_logits[v] -= c * probs[v];
                d_logits[tokens[j]] += c;
            }
            if (ref && kl_coeffs && kl_coeffs[j] != 0.0) {
                double c = kl_coeffs[j];
                for (int v = 0; v < V; ++v) {
                    double lp = logits[v] - log_z;
                    double lq = ref_logits[v] - ref_log_z;
                    d_logits[v] += c * probs[v] * ((lp - lq) - kl);
                }
            }
            feats.scatter_position(d_logits, prev4, *grad);
            for (int v = 0; v < V; ++v) d_sum[v] += d_logits[v];
        }
    }
    if (grad) feats.scatter_context(d_sum, *grad);
    return logprobs;
}

std::vector<double> ToyModel::token_logprobs(const Params& params, const PolicyContext& ctx,
                                             const std::vector<int>& tokens) const {
    return eval_sequence(params, ctx, tokens, nullptr, nullptr, nullptr, nullptr, nullptr);
}

std::pair<std::vector<double>, Params> ToyModel::logprob_and_grad(
    const Params& params, const PolicyContext& ctx, const std::vector<int>& tokens) const {
    Params grad = zero_params();
    std::vector<double> ones(tokens.size(), 1.0);
    auto lps = eval_sequence(params, ctx, tokens, nullptr, ones.data(), nullptr, &grad, nullptr);
    return {std::move(lps), std::move(grad)};
}

std::vector<double> ToyModel::next_token_probs(const Params& params, const PolicyContext& ctx,
                                               const std::vector<int>& prefix) const {
    ContextFeatures feats(*this, params, ctx);
    std::vector<double> logits, probs;
    auto prev4 = ContextFeatures::prev_window(prefix, prefix.size());
    feats.position_logits(params, prev4, logits);
    double log_z;
    softmax_from_logits(logits, probs, log_z);
    return probs;
}

double ToyModel::kl_token(const Params& params, const Params& ref, const PolicyContext& ctx,
                          const std::vector<int>& prefix) const {
    auto p = next_token_probs(params, ctx, prefix);
    auto q = next_token_probs(ref, ctx, prefix);
    double kl = 0.0;
    for (size_t v = 0; v < p.size(); ++v)
        if (p[v] > 0.0) kl += p[v] * (std::log(p[v]) - std::log(q[v]));
    return kl;
}

ToyModel ToyPolicySnapshot::make_model() const {
    return ToyModel(cfg, ActionVocab(action_types), lexicon);
}

void ToyPolicySnapshot::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json j;
    j["hash_dim"] = cfg.hash_dim;
    j["coord_bins"] = cfg.coord_bins;
    j["max_len"] = cfg.max_len;
    j["action_types"] = nlohmann::ordered_json::array();
    for (const auto& t : action_types)
        j["action_types"].push_back({{"name", t.name}, {"needs_position", t.needs_position}});
    j["lexicon"] = lexicon;
    // Sparse storage: most weights stay exactly zero.
    auto& w = j["params"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < params.size(); ++i)
        if (params[i] != 0.0) w.push_back({i, params[i]});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump() << "\n";
}

ToyPolicySnapshot ToyPolicySnapshot::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
    ToyPolicySnapshot s;
    s.cfg.hash_dim = j.at("hash_dim").get<int>();
    s.cfg.coord_bins = j.at("coord_bins").get<int>();
    s.cfg.max_len = j.at("max_len").get<int>();
    for (const auto& t : j.at("action_types"))
        s.action_types.push_back(
            {t.at("name").get<std::string>(), t.at("needs_position").get<bool>()});
    s.lexicon = j.at("lexicon").get<std::vector<std::string>>();
    s.params.assign(s.cfg.hash_dim, 0.0);
    for (const auto& e : j.at("params"))
        s.params[e[0].get<size_t>()] = e[1].get<double>();
    return s;
}

} // namespace guirise
