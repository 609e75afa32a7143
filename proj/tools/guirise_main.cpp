#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "guirise/errors.hpp"
#include "guirise/harness.hpp"
#include "guirise/util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitStageFailure = 3;

struct CommonArgs {
    std::string config_path;
    uint64_t seed = 0;
    std::string out_dir = "run";
    int workers = 0;
    std::string policy = "toy";
    int episodes = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_policy = false) {
    cmd->add_option("--config", args.config_path, "key = value configuration file");
    cmd->add_option("--seed", args.seed, "root seed all randomness derives from");
    cmd->add_option("--out", args.out_dir, "run directory for artifacts");
    cmd->add_option("--workers", args.workers, "worker pool size (0 = available parallelism)");
    if (with_policy)
        cmd->add_option("--policy", args.policy,
                        "toy | scripted-oracle | scripted-corrupt:p | remote:URL");
}

guirise::Experiment resolve(const CommonArgs& args) {
    guirise::KvConfig cfg;
    if (!args.config_path.empty()) cfg = guirise::KvConfig::parse_file(args.config_path);
    if (args.episodes >= 0) cfg.set("data.episodes", std::to_string(args.episodes));
    return guirise::Experiment::resolve(cfg, args.seed, args.out_dir, args.workers);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training and evaluation engine for reasoning-enhanced GUI navigation agents"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* gen = app.add_subcommand("gen-data", "generate train and eval episode datasets");
    add_common(gen, args);
    gen->add_option("--episodes", args.episodes, "number of training episodes");
    auto* label = app.add_subcommand("label", "pseudo-label the training dataset");
    add_common(label, args);
    auto* sft = app.add_subcommand("sft", "supervised cold-start training");
    add_common(sft, args);
    auto* grpo = app.add_subcommand("grpo", "group-relative policy optimization");
    add_common(grpo, args);
    auto* eval = app.add_subcommand("eval", "evaluate a policy on the eval dataset");
    add_common(eval, args, true);
    auto* curves = app.add_subcommand("curves", "export training curves as plot-ready series");
    add_common(curves, args);
    auto* ablate = app.add_subcommand("ablate", "history-reward on/off comparison runs");
    add_common(ablate, args);

    CLI11_PARSE(app, argc, argv);

    try {
        guirise::Experiment exp = resolve(args);
        if (gen->parsed()) {
            auto episodes = run_gen_data(exp);
            if (guirise::log_level() >= guirise::LogLevel::Info)
                std::cout << "wrote " << episodes.size() << " train episodes and "
                          << exp.n_eval_episodes << " eval episodes to " << exp.out_dir.string()
                          << "\n";
        } else if (label->parsed()) {
            auto labels = run_label(exp);
            if (guirise::log_level() >= guirise::LogLevel::Info)
                std::cout << "wrote " << labels.size() << " pseudo-labels\n";
        } else if (sft->parsed()) {
            run_sft(exp);
            if (guirise::log_level() >= guirise::LogLevel::Info)
                std::cout << "wrote sft_policy.json\n";
        } else if (grpo->parsed()) {
            run_grpo(exp);
            if (guirise::log_level() >= guirise::LogLevel::Info)
                std::cout << "wrote grpo_policy.json\n";
        } else if (eval->parsed()) {
            auto report = run_eval(exp, args.policy);
            std::cout << render_report(report);
        } else if (curves->parsed()) {
            run_curves(exp);
        } else if (ablate->parsed()) {
            auto report = run_ablate(exp);
            std::cout << "arm,seed,final_step_accuracy\n";
            for (const auto& r : report.rows)
                std::cout << r.arm << "," << r.seed << "," << r.final_step_accuracy << "\n";
            std::cout << "median history-reward    = " << report.median_with_history << "\n"
                      << "median no-history-reward = " << report.median_without_history << "\n";
        }
        return kExitOk;
    } catch (const guirise::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "stage failed: " << e.what() << "\n";
        return kExitStageFailure;
    }
}
