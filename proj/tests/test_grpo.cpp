#include <doctest.h>

#include <cmath>

#include "guirise/errors.hpp"
#include "guirise/grpo.hpp"
#include "guirise/rng.hpp"
#include "guirise/sim.hpp"
#include "helpers.hpp"

using namespace guirise;

namespace {

PolicyContext small_context(uint64_t seed = 401) {
    SimConfig cfg;
    cfg.rng_seed = seed;
    Episode ep = generate_dataset(cfg, 1).front();
    return {ep.instruction, ep.steps[0].observation, ""};
}

RolloutGroup sample_group(const ToyModel& model, const Params& params, int g, uint64_t seed,
                          const std::vector<double>& advantages) {
    RolloutGroup group;
    group.context = small_context(seed);
    group.members = model.sample(params, group.context, g, DecodeMode::Stochastic, seed);
    group.advantages = advantages;
    return group;
}

} // namespace

TEST_CASE("advantage examples") {
    auto a = compute_advantages({0.0, 1.0}, 1e-8);
    CHECK(a[0] == doctest::Approx(-1.0));
    CHECK(a[1] == doctest::Approx(1.0));

    auto zero = compute_advantages({2.0, 2.0, 2.0, 2.0}, 1e-8);
    for (double v : zero) CHECK(v == 0.0);

    auto d = compute_advantages({1.0, 2.0, 3.0, 4.0}, 1e-8);
    CHECK(d[0] == doctest::Approx(-1.3416).epsilon(1e-4));
    CHECK(d[1] == doctest::Approx(-0.4472).epsilon(1e-4));
    CHECK(d[2] == doctest::Approx(0.4472).epsilon(1e-4));
    CHECK(d[3] == doctest::Approx(1.3416).epsilon(1e-4));

    CHECK_THROWS_AS(compute_advantages({1.0}, 1e-8), DimensionMismatch);
}

TEST_CASE("advantage statistics and scale invariance") {
    Rng rng(17);
    for (int trial = 0; trial < 10000; ++trial) {
        size_t g = 2 + rng.next_below(15);
        std::vector<double> rewards(g);
        for (auto& r : rewards) r = rng.uniform01() * 5.0;
        rewards[0] += 1.0; // guarantee non-degenerate
        auto a = compute_advantages(rewards, 1e-8);

        double mean = 0.0;
        for (double v : a) mean += v;
        mean /= static_cast<double>(g);
        CHECK(std::abs(mean) <= 1e-9);

        double var = 0.0;
        for (double v : a) var += (v - mean) * (v - mean);
        var /= static_cast<double>(g);
        CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-6);

        for (double c : {0.1, 10.0}) {
            std::vector<double> scaled(g);
            for (size_t i = 0; i < g; ++i) scaled[i] = c * rewards[i];
            auto b = compute_advantages(scaled, 1e-8);
            for (size_t i = 0; i < g; ++i) CHECK(std::abs(b[i] - a[i]) <= 1e-9);
        }
    }
}

TEST_CASE("exact categorical KL examples") {
    auto model = testutil::small_model();
    Params p = model.zero_params();
    PolicyContext ctx = small_context();
    CHECK(model.kl_token(p, p, ctx, {}) == doctest::Approx(0.0).epsilon(1e-12));

    // Hand-checked two-outcome value: KL((.5,.5) || (.9,.1)) ~= 0.5108.
    double kl = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    CHECK(kl == doctest::Approx(0.5108).epsilon(1e-3));
}

TEST_CASE("KL is non-negative over random parameter pairs") {
    auto model = testutil::small_model(1024, 4, 16);
    Rng rng(19);
    PolicyContext ctx = small_context();
    for (int trial = 0; trial < 10000; ++trial) {
        Params p = model.zero_params(), q = model.zero_params();
        for (int k = 0; k < 50; ++k) {
            p[rng.next_below(p.size())] = (rng.uniform01() - 0.5) * 6.0;
            q[rng.next_below(q.size())] = (rng.uniform01() - 0.5) * 6.0;
        }
        std::vector<int> prefix;
        for (int j = 0; j < static_cast<int>(rng.next_below(4)); ++j)
            prefix.push_back(static_cast<int>(rng.next_below(model.vocab().size())));
        CHECK(model.kl_token(p, q, ctx, prefix) >= -1e-12);
    }
}

TEST_CASE("objective at theta = theta_old = theta_ref is the mean advantage") {
    auto model = testutil::small_model();
    Params params = model.zero_params();
    Rng rng(23);
    for (auto& w : params) w = (rng.uniform01() - 0.5) * 0.3;
    RolloutGroup group = sample_group(model, params, 4, 31, {});
    group.advantages = compute_advantages({0.0, 1.0, 2.0, 5.0}, 1e-8);
    auto obj = grpo_objective(group, model, params, params, 0.2, 0.04, nullptr);
    CHECK(obj.objective == doctest::Approx(0.0).epsilon(1e-9)); // advantages are mean-zero
    CHECK(obj.mean_kl == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("clipped min keeps the bounded branch") {
    auto model = testutil::small_model();
    Params params = model.zero_params();
    PolicyContext ctx = small_context();
    RolloutGroup group;
    group.context = ctx;
    SampledTurn member;
    member.token_ids = {5};
    // Doctor the stored theta_old logprob so the ratio is exactly 1.5.
    double lp_new = model.token_logprobs(params, ctx, member.token_ids)[0];
    member.token_logprobs = {lp_new - std::log(1.5)};
    group.members.push_back(member);
    group.advantages = {1.0};
    auto obj = grpo_objective(group, model, params, params, 0.2, 0.0, nullptr);
    CHECK(obj.objective == doctest::Approx(1.2).epsilon(1e-12));

    group.advantages = {-1.0};
    obj = grpo_objective(group, model, params, params, 0.2, 0.0, nullptr);
    CHECK(obj.objective == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("objective gradient matches central finite differences") {
    auto model = testutil::small_model(2048, 8, 24);
    Rng rng(29);
    double worst = 0.0;
    int checked = 0;
    for (int trial = 0; trial < 60 || checked < 50; ++trial) {
        REQUIRE(trial < 200);
        Params theta = model.zero_params(), theta_ref = model.zero_params();
        for (int k = 0; k < 400; ++k) {
            theta[rng.next_below(theta.size())] = (rng.uniform01() - 0.5) * 0.4;
            theta_ref[rng.next_below(theta_ref.size())] = (rng.uniform01() - 0.5) * 0.4;
        }
        RolloutGroup group = sample_group(model, theta, 3, 500 + trial, {});
        group.advantages = compute_advantages({0.0, 1.0, 3.0}, 1e-8);
        // Perturb the stored logprobs a little so ratios leave 1 but stay
        // away from the clip kink where the objective is non-differentiable.
        double eps = 0.2;
        bool near_kink = false;
        for (auto& m : group.members) {
            auto lp = model.token_logprobs(theta, group.context, m.token_ids);
            for (size_t j = 0; j < lp.size(); ++j) {
                m.token_logprobs[j] = lp[j] + (rng.uniform01() - 0.5) * 0.3;
                double ratio = std::exp(lp[j] - m.token_logprobs[j]);
                if (std::abs(ratio - (1 - eps)) < 0.02 || std::abs(ratio - (1 + eps)) < 0.02)
                    near_kink = true;
            }
        }
        if (near_kink) continue;
        ++checked;

        Params grad = model.zero_params();
        grpo_objective(group, model, theta, theta_ref, eps, 0.04, &grad);
        std::vector<size_t> idx;
        for (int k = 0; k < 20; ++k) idx.push_back(rng.next_below(theta.size()));
        auto f = [&] {
            return grpo_objective(group, model, theta, theta_ref, eps, 0.04, nullptr).objective;
        };
        worst = std::max(worst, testutil::max_rel_error_fd(f, theta, grad, idx));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("at theta_old the policy gradient equals the REINFORCE estimator") {
    auto model = testutil::small_model(2048, 8, 24);
    Rng rng(31);
    Params theta = model.zero_params();
    for (int k = 0; k < 300; ++k)
        theta[rng.next_below(theta.size())] = (rng.uniform01() - 0.5) * 0.5;
    RolloutGroup group = sample_group(model, theta, 4, 77, {});
    group.advantages = compute_advantages({0.0, 2.0, 1.0, 4.0}, 1e-8);

    Params grad = model.zero_params();
    grpo_objective(group, model, theta, theta, 0.2, 0.0, &grad); // beta = 0, ratios = 1

    Params reinforce = model.zero_params();
    const double g = static_cast<double>(group.members.size());
    for (size_t i = 0; i < group.members.size(); ++i) {
        const auto& m = group.members[i];
        std::vector<double> coeffs(m.token_ids.size(),
                                   group.advantages[i] /
                                       (g * static_cast<double>(m.token_ids.size())));
        model.eval_sequence(theta, group.context, m.token_ids, nullptr, coeffs.data(), nullptr,
                            &reinforce, nullptr);
    }
    double max_diff = 0.0;
    for (size_t k = 0; k < grad.size(); ++k)
        max_diff = std::max(max_diff, std::abs(grad[k] - reinforce[k]));
    CHECK(max_diff <= 1e-10);
}

TEST_CASE("train iterations are deterministic and worker-count independent") {
    auto model = testutil::small_model(4096, 20, 64);
    SimConfig cfg;
    cfg.rng_seed = 83;
    auto episodes = generate_dataset(cfg, 3);
    std::vector<const Episode*> batch{&episodes[0], &episodes[1], &episodes[2]};
    RewardConfig rcfg;
    GrpoConfig gcfg;
    gcfg.group_size = 4;

    auto run = [&](int workers) {
        TrainerState st;
        st.theta = model.zero_params();
        Rng rng(37);
        for (auto& w : st.theta) w = (rng.uniform01() - 0.5) * 0.2;
        st.theta_old = st.theta;
        st.theta_ref = st.theta;
        for (int it = 0; it < 2; ++it) train_iteration(st, model, batch, rcfg, gcfg, 11, workers);
        return st.theta;
    };
    auto t1 = run(1);
    auto t2 = run(1);
    auto t4 = run(4);
    CHECK(t1 == t2);
    CHECK(t1 == t4);
}

TEST_CASE("identical member rewards leave only the KL pull") {
    auto model = testutil::small_model(4096, 20, 64);
    SimConfig cfg;
    cfg.rng_seed = 89;
    auto episodes = generate_dataset(cfg, 1);
    std::vector<const Episode*> batch{&episodes[0]};
    RewardConfig rcfg;
    GrpoConfig gcfg;
    gcfg.group_size = 4;

    // Zero params: every sampled member earns the same reward (0 components),
    // so advantages vanish. With theta == theta_ref the KL gradient is zero
    // too and theta must not move.
    TrainerState st;
    st.theta = model.zero_params();
    st.theta_old = st.theta;
    st.theta_ref = st.theta;
    train_iteration(st, model, batch, rcfg, gcfg, 13, 1);
    for (double w : st.theta) CHECK(w == 0.0);
}

TEST_CASE("gate law holds for every logged member") {
    auto model = testutil::small_model(4096, 20, 64);
    SimConfig cfg;
    cfg.rng_seed = 97;
    auto episodes = generate_dataset(cfg, 2);
    std::vector<const Episode*> batch{&episodes[0], &episodes[1]};
    RewardConfig rcfg;
    GrpoConfig gcfg;
    gcfg.group_size = 6;
    TrainerState st;
    st.theta = model.zero_params();
    Rng rng(41);
    for (auto& w : st.theta) w = (rng.uniform01() - 0.5) * 0.3;
    st.theta_old = st.theta;
    st.theta_ref = st.theta;
    for (int it = 0; it < 3; ++it) {
        auto result = train_iteration(st, model, batch, rcfg, gcfg, 17, 2);
        for (const auto& g : result.groups)
            for (const auto& b : g.rewards)
                if (b.r_a == 0.0) CHECK(b.r_h == 0.0);
    }
}

TEST_CASE("the update depends on rollouts only through the logged groups") {
    auto model = testutil::small_model(4096, 20, 64);
    SimConfig cfg;
    cfg.rng_seed = 101;
    auto episodes = generate_dataset(cfg, 1);
    std::vector<const Episode*> batch{&episodes[0]};
    RewardConfig rcfg;
    GrpoConfig gcfg;
    gcfg.group_size = 4;

    TrainerState st;
    st.theta = model.zero_params();
    Rng rng(43);
    for (auto& w : st.theta) w = (rng.uniform01() - 0.5) * 0.3;
    st.theta_old = st.theta;
    st.theta_ref = st.theta;
    Params theta_before = st.theta;
    auto result = train_iteration(st, model, batch, rcfg, gcfg, 19, 1);

    // Recompute the ascent direction from the logged groups alone: no
    // history-rollout turn participates in the gradient.
    Params grad = model.zero_params();
    for (const auto& g : result.groups)
        grpo_objective(g, model, theta_before, theta_before, gcfg.clip_epsilon, gcfg.kl_beta,
                       &grad);
    const double scale = gcfg.learning_rate / static_cast<double>(result.groups.size());
    Params expected = theta_before;
    for (size_t k = 0; k < expected.size(); ++k) expected[k] += scale * grad[k];
    CHECK(expected == st.theta);
}
