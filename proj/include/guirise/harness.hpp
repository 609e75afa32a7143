#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "guirise/config.hpp"
#include "guirise/dataset_io.hpp"
#include "guirise/grpo.hpp"
#include "guirise/labeler.hpp"
#include "guirise/metrics.hpp"
#include "guirise/policy.hpp"
#include "guirise/sft.hpp"
#include "guirise/sim.hpp"

namespace guirise {

// Everything a stage needs, resolved from the config file plus command-line
// overrides. All randomness descends from the one root seed.
struct Experiment {
    KvConfig raw;
    uint64_t seed = 0;
    int workers = 0;
    std::filesystem::path out_dir;

    SimConfig sim;
    int n_episodes = 50;
    int n_eval_episodes = 100;
    ToyPolicyConfig policy_cfg;
    RewardConfig reward;
    GrpoConfig grpo;
    SftConfig sft;
    LabelerOptions labeler;
    std::string label_mode = "mock"; // mock | remote
    std::string label_url;
    std::string label_audit_log;
    std::string eval_datasets;       // comma-separated; empty -> eval_dataset.jsonl
    std::string eval_params;         // snapshot path; empty -> grpo_policy.json
    int ablate_seeds = 3;

    static Experiment resolve(const KvConfig& cfg, uint64_t seed,
                              const std::filesystem::path& out_dir, int workers);
    ToyModel make_model() const;
};

// Stage entry points. Each writes its artifacts plus a manifest under
// exp.out_dir; reruns with the same config and seed are bit-identical.
std::vector<Episode> run_gen_data(const Experiment& exp);
std::vector<PseudoLabel> run_label(const Experiment& exp);
ToyPolicySnapshot run_sft(const Experiment& exp);
ToyPolicySnapshot run_grpo(const Experiment& exp);
Report run_eval(const Experiment& exp, const std::string& policy_spec);
void run_curves(const Experiment& exp);

struct AblationArmResult {
    std::string arm;
    uint64_t seed = 0;
    double final_step_accuracy = 0.0;
};

struct AblationReport {
    std::vector<AblationArmResult> rows;
    double median_with_history = 0.0;
    double median_without_history = 0.0;
};

// Trains the memory-probe task twice per seed (history reward on/off) and
// compares final-step accuracy on held-out episodes.
AblationReport run_ablate(const Experiment& exp);

struct ColdStartCurves {
    std::vector<double> rl_only_r_pos;  // mean r_pos per iteration
    std::vector<double> sft_rl_r_pos;
};

// Reward curves with and without the supervised cold start, on one seed.
ColdStartCurves run_coldstart_study(const Experiment& exp, uint64_t seed, int iterations);

// Evaluates a predictor over episodes with self-chained histories.
std::vector<ReportRow> evaluate_policy(EvalPolicy& policy, const std::vector<Episode>& episodes,
                                       const std::string& split);

// Builds the eval predictor named by --policy:
// toy | scripted-oracle | scripted-corrupt:<p> | remote:<url>.
std::unique_ptr<EvalPolicy> make_eval_policy(const std::string& spec, const Experiment& exp,
                                             const ToyModel* model, const Params* params);

// Writes report.csv plus a readable table; returns the table text.
std::string render_report(const Report& report);

} // namespace guirise
