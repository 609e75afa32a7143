#include <httplib.h>
#include <json.hpp>

#include "guirise/errors.hpp"
#include "guirise/grammar.hpp"
#include "guirise/policy.hpp"
#include "guirise/sim.hpp"

namespace guirise {

namespace {

nlohmann::ordered_json rollout_request(const PolicyContext& ctx, int n, DecodeMode mode) {
    nlohmann::ordered_json j;
    j["instruction"] = ctx.instruction;
    j["history"] = ctx.history;
    j["elements"] = nlohmann::ordered_json::array();
    for (const auto& el : ctx.observation.elements) {
        nlohmann::ordered_json je;
        je["element_id"] = el.element_id;
        je["bbox"] = {el.bbox.x1, el.bbox.y1, el.bbox.x2, el.bbox.y2};
        je["label"] = el.label;
        je["kind"] = to_string(el.kind);
        j["elements"].push_back(std::move(je));
    }
    j["n"] = n;
    j["mode"] = mode == DecodeMode::Greedy ? "greedy" : "stochastic";
    return j;
}

} // namespace

RemotePolicy::RemotePolicy(std::string base_url, int timeout_ms)
    : base_url_(std::move(base_url)), timeout_ms_(timeout_ms) {}

std::vector<SampledTurn> RemotePolicy::sample(const PolicyContext& ctx, int n, DecodeMode mode,
                                              uint64_t) {
    httplib::Client cli(base_url_);
    cli.set_connection_timeout(0, timeout_ms_ * 1000);
    cli.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

    auto body = rollout_request(ctx, n, mode).dump();
    auto res = cli.Post("/v1/rollout", body, "application/json");
    if (!res) throw RemoteUnreachable("POST " + base_url_ + "/v1/rollout failed");
    if (res->status != 200)
        throw RemoteUnreachable("rollout endpoint returned status " + std::to_string(res->status));

    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("turns") || !j["turns"].is_array())
        throw MalformedResponse("rollout response is not {\"turns\": [...]}");

    std::vector<SampledTurn> out;
    for (const auto& jt : j["turns"]) {
        if (!jt.contains("text") || !jt["text"].is_string())
            throw MalformedResponse("rollout turn lacks a text field");
        SampledTurn st;
        st.turn = parse_turn(jt["text"].get<std::string>(), sim_action_vocab());
        if (jt.contains("token_logprobs") && jt["token_logprobs"].is_array()) {
            st.token_logprobs = jt["token_logprobs"].get<std::vector<double>>();
            // Remote tokenizations are opaque; keep the length invariant with
            // sentinel ids. Such turns are evaluation-only.
            st.token_ids.assign(st.token_logprobs.size(), -1);
        }
        out.push_back(std::move(st));
    }
    return out;
}

namespace {

class RemoteEval : public EvalPolicy {
public:
    explicit RemoteEval(const std::string& base_url) : policy_(base_url) {}

    AgentTurn predict(const Episode& episode, int t, const std::string& history) override {
        PolicyContext ctx{episode.instruction, episode.steps[t].observation, history};
        auto turns = policy_.sample(ctx, 1, DecodeMode::Greedy, 0);
        if (turns.empty()) throw MalformedResponse("rollout response contained no turns");
        return turns.front().turn;
    }

private:
    RemotePolicy policy_;
};

} // namespace

std::unique_ptr<EvalPolicy> make_remote_eval(const std::string& base_url) {
    return std::make_unique<RemoteEval>(base_url);
}

} // namespace guirise
