#include <doctest.h>

#include <cmath>

#include "guirise/grammar.hpp"
#include "guirise/labeler.hpp"
#include "guirise/rng.hpp"
#include "guirise/sft.hpp"
#include "guirise/sim.hpp"
#include "helpers.hpp"

using namespace guirise;

namespace {

std::vector<PseudoLabel> mock_labels(const std::vector<Episode>& episodes) {
    std::vector<PseudoLabel> labels;
    for (const auto& ep : episodes) {
        MockLabelClient client(ep);
        auto ls = label_trajectory(ep, client);
        labels.insert(labels.end(), ls.begin(), ls.end());
    }
    return labels;
}

} // namespace

TEST_CASE("build_target round-trips the action and summary") {
    auto model = testutil::small_model();
    SimConfig cfg;
    cfg.rng_seed = 211;
    auto episodes = generate_dataset(cfg, 3);
    for (const auto& label : mock_labels(episodes)) {
        auto y = build_target(model, label);
        CHECK(y.back() == Vocab::kEos);
        AgentTurn turn = parse_turn(detokenize(model.vocab(), y), model.actions());
        REQUIRE(turn.tags_ok);
        REQUIRE(turn.parsed_action.has_value());
        CHECK(turn.parsed_action->action_type == label.gt_action.action_type);
        CHECK(turn.parsed_action->value == label.gt_action.value);
        CHECK(turn.history_summary == label.summary);
    }
}

TEST_CASE("empty reasoning texts still produce all four tag pairs") {
    auto model = testutil::small_model();
    PseudoLabel label;
    label.gt_action = {"ENTER", "", std::nullopt};
    auto y = build_target(model, label);
    std::string text = detokenize(model.vocab(), y);
    for (const auto& name : kTagNames) {
        CHECK(text.find("<" + std::string(name) + ">") != std::string::npos);
        CHECK(text.find("</" + std::string(name) + ">") != std::string::npos);
    }
    CHECK(parse_turn(text, model.actions()).tags_ok);
}

TEST_CASE("out-of-vocabulary words map to UNK") {
    auto model = testutil::small_model();
    PseudoLabel label;
    label.summary = "quixotic flibbertigibbet";
    label.gt_action = {"ENTER", "", std::nullopt};
    auto y = build_target(model, label);
    int unks = 0;
    for (int id : y) unks += id == Vocab::kUnk;
    CHECK(unks == 2);
}

TEST_CASE("ce loss at zero params is length times log vocab size") {
    auto model = testutil::small_model();
    Params params = model.zero_params();
    SimConfig cfg;
    cfg.rng_seed = 223;
    Episode ep = generate_dataset(cfg, 1).front();
    PolicyContext ctx{ep.instruction, ep.steps[0].observation, ""};
    std::vector<int> y = {3, 9, 12, 4, 4, 7};
    double loss = ce_loss(model, params, ctx, y, nullptr);
    CHECK(loss == doctest::Approx(y.size() * std::log(model.vocab().size())).epsilon(1e-12));
    CHECK_THROWS_AS(ce_loss(model, params, ctx, {}, nullptr), std::invalid_argument);
}

TEST_CASE("ce loss is non-negative and its gradient matches finite differences") {
    auto model = testutil::small_model(2048, 8, 24);
    Rng rng(227);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        SimConfig cfg;
        cfg.rng_seed = 300 + trial;
        Episode ep = generate_dataset(cfg, 1).front();
        PolicyContext ctx{ep.instruction, ep.steps[0].observation,
                          trial % 2 ? "did click alpha" : ""};
        Params params = model.zero_params();
        for (auto& w : params) w = (rng.uniform01() - 0.5) * 0.8;
        std::vector<int> y;
        int len = 2 + static_cast<int>(rng.next_below(10));
        for (int j = 0; j < len; ++j)
            y.push_back(static_cast<int>(rng.next_below(model.vocab().size())));

        Params grad = model.zero_params();
        double loss = ce_loss(model, params, ctx, y, &grad);
        CHECK(loss >= 0.0);
        std::vector<size_t> idx;
        for (int k = 0; k < 25; ++k) idx.push_back(rng.next_below(params.size()));
        auto f = [&] { return ce_loss(model, params, ctx, y, nullptr); };
        worst = std::max(worst, testutil::max_rel_error_fd(f, params, grad, idx));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("training strictly reduces the loss on a fixed label set") {
    auto model = testutil::small_model(1 << 15, 20, 96);
    SimConfig cfg;
    cfg.rng_seed = 229;
    auto episodes = generate_dataset(cfg, 17); // ~50 step labels
    auto labels = mock_labels(episodes);
    auto examples = build_sft_dataset(model, episodes, labels);

    Params params = model.zero_params();
    SftConfig scfg;
    scfg.iterations = 500;
    scfg.batch_size = static_cast<int>(examples.size());
    auto stats = sft_train(params, model, examples, scfg, 2);
    REQUIRE(stats.size() == 500);
    CHECK(stats.back().loss < stats.front().loss);
    CHECK(stats.back().loss < 0.5 * stats.front().loss);
}

TEST_CASE("the dataset builder rejects out-of-order labels") {
    auto model = testutil::small_model();
    SimConfig cfg;
    cfg.rng_seed = 233;
    auto episodes = generate_dataset(cfg, 2);
    auto labels = mock_labels(episodes);

    SUBCASE("swapped steps") {
        std::swap(labels[0], labels[1]);
        CHECK_THROWS_AS(build_sft_dataset(model, episodes, labels), std::invalid_argument);
    }
    SUBCASE("missing initial step") {
        labels.erase(labels.begin());
        CHECK_THROWS_AS(build_sft_dataset(model, episodes, labels), std::invalid_argument);
    }
    SUBCASE("unknown episode") {
        labels[0].episode_id = "nope";
        CHECK_THROWS_AS(build_sft_dataset(model, episodes, labels), std::invalid_argument);
    }
    SUBCASE("chained contexts carry the previous summary") {
        auto examples = build_sft_dataset(model, episodes, labels);
        CHECK(examples[0].context.history.empty());
        CHECK(examples[1].context.history == labels[0].summary);
        CHECK(examples[2].context.history == labels[1].summary);
    }
}
