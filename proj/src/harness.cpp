#include "guirise/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "guirise/errors.hpp"
#include "guirise/rng.hpp"
#include "guirise/sha256.hpp"
#include "guirise/util.hpp"

namespace guirise {

namespace {

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "sim.rows", "sim.cols", "sim.family", "sim.length_min", "sim.length_max",
        "sim.value_vocab", "sim.distractors",
        "data.episodes", "data.eval_episodes",
        "policy.hash_dim", "policy.coord_bins", "policy.max_len",
        "label.mode", "label.url", "label.thought", "label.max_retries", "label.audit_log",
        "sft.learning_rate", "sft.iterations", "sft.batch_size",
        "reward.lambda_a", "reward.lambda_h", "reward.lambda_type", "reward.lambda_pos",
        "reward.k_rollouts", "reward.advantage_epsilon", "reward.rollout_mode",
        "grpo.group_size", "grpo.clip_epsilon", "grpo.kl_beta", "grpo.learning_rate",
        "grpo.iterations", "grpo.episodes_per_iter", "grpo.refresh",
        "eval.datasets", "eval.params",
        "ablate.seeds",
    };
    return keys;
}

void require_valid(const std::vector<std::string>& violations, const std::string& what) {
    if (!violations.empty()) throw ConfigError(what + ": " + violations.front());
}

std::string file_sha256(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    Sha256 h;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) h.update(buf, in.gcount());
    return h.hex_digest();
}

// One manifest per command; resolved config and seed land beside it.
void write_manifest(const Experiment& exp, const std::string& command,
                    const std::vector<std::filesystem::path>& outputs) {
    std::filesystem::create_directories(exp.out_dir);
    {
        std::ofstream out(exp.out_dir / "resolved.config", std::ios::binary);
        out << "# resolved configuration\nseed = " << exp.seed << "\n" << exp.raw.dump();
    }
    nlohmann::ordered_json j;
    j["command"] = command;
    j["seed"] = exp.seed;
    j["workers"] = exp.workers;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [key, entry] : exp.raw.entries()) j["config"][key] = entry.first;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& p : outputs) {
        nlohmann::ordered_json o;
        o["path"] = p.filename().string();
        o["sha256"] = file_sha256(p);
        j["outputs"].push_back(std::move(o));
    }
    std::ofstream out(exp.out_dir / ("manifest-" + command + ".json"), std::ios::binary);
    out << j.dump(2) << "\n";
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!trim(cur).empty()) out.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.emplace_back(trim(cur));
    return out;
}

} // namespace

Experiment Experiment::resolve(const KvConfig& cfg, uint64_t seed,
                               const std::filesystem::path& out_dir, int workers) {
    cfg.check_known_keys(known_keys());
    Experiment e;
    e.raw = cfg;
    e.seed = seed;
    e.workers = workers;
    e.out_dir = out_dir;

    e.sim.rows = static_cast<int>(cfg.get_int("sim.rows", 4));
    e.sim.cols = static_cast<int>(cfg.get_int("sim.cols", 4));
    std::string family = cfg.get_string("sim.family", "click-sequence");
    auto fam = task_family_from_string(family);
    if (!fam) throw ConfigError("unknown sim.family '" + family + "'");
    e.sim.task_family = *fam;
    e.sim.episode_length_min = static_cast<int>(cfg.get_int("sim.length_min", 3));
    e.sim.episode_length_max = static_cast<int>(cfg.get_int("sim.length_max", 3));
    e.sim.value_vocab_size = static_cast<int>(cfg.get_int("sim.value_vocab", 16));
    e.sim.n_distractors = static_cast<int>(cfg.get_int("sim.distractors", 3));
    e.sim.rng_seed = mix_seed(seed, 0x5117u);
    require_valid(e.sim.validate(), "sim");

    e.n_episodes = static_cast<int>(cfg.get_int("data.episodes", 50));
    e.n_eval_episodes = static_cast<int>(cfg.get_int("data.eval_episodes", 100));
    if (e.n_episodes < 1) throw ConfigError("data.episodes must be >= 1");

    e.policy_cfg.hash_dim = static_cast<int>(cfg.get_int("policy.hash_dim", 1 << 18));
    e.policy_cfg.coord_bins = static_cast<int>(cfg.get_int("policy.coord_bins", 20));
    e.policy_cfg.max_len = static_cast<int>(cfg.get_int("policy.max_len", 96));
    if (e.policy_cfg.hash_dim < 16) throw ConfigError("policy.hash_dim is too small");
    if (e.policy_cfg.coord_bins < 2) throw ConfigError("policy.coord_bins must be >= 2");
    if (e.policy_cfg.max_len < 8) throw ConfigError("policy.max_len must be >= 8");

    e.reward.lambda_a = cfg.get_double("reward.lambda_a", 1.0);
    e.reward.lambda_h = cfg.get_double("reward.lambda_h", 0.5);
    e.reward.lambda_type = cfg.get_double("reward.lambda_type", 1.0);
    e.reward.lambda_pos = cfg.get_double("reward.lambda_pos", 1.0);
    e.reward.k_rollouts = static_cast<int>(cfg.get_int("reward.k_rollouts", 4));
    e.reward.advantage_epsilon = cfg.get_double("reward.advantage_epsilon", 1e-8);
    std::string mode = cfg.get_string("reward.rollout_mode", "greedy");
    if (mode == "greedy") e.reward.history_rollout_mode = DecodeMode::Greedy;
    else if (mode == "stochastic") e.reward.history_rollout_mode = DecodeMode::Stochastic;
    else throw ConfigError("reward.rollout_mode must be greedy or stochastic");
    require_valid(e.reward.validate(), "reward");

    e.grpo.group_size = static_cast<int>(cfg.get_int("grpo.group_size", 8));
    e.grpo.clip_epsilon = cfg.get_double("grpo.clip_epsilon", 0.2);
    e.grpo.kl_beta = cfg.get_double("grpo.kl_beta", 0.04);
    e.grpo.learning_rate = cfg.get_double("grpo.learning_rate", 0.05);
    e.grpo.iterations = static_cast<int>(cfg.get_int("grpo.iterations", 1000));
    e.grpo.episodes_per_iter = static_cast<int>(cfg.get_int("grpo.episodes_per_iter", 2));
    e.grpo.theta_old_refresh = static_cast<int>(cfg.get_int("grpo.refresh", 1));
    require_valid(e.grpo.validate(), "grpo");

    e.sft.learning_rate = cfg.get_double("sft.learning_rate", 0.4);
    e.sft.iterations = static_cast<int>(cfg.get_int("sft.iterations", 400));
    e.sft.batch_size = static_cast<int>(cfg.get_int("sft.batch_size", 16));
    require_valid(e.sft.validate(), "sft");

    e.labeler.thought = cfg.get_string("label.thought", "");
    e.labeler.max_retries = static_cast<int>(cfg.get_int("label.max_retries", 2));
    e.label_mode = cfg.get_string("label.mode", "mock");
    if (e.label_mode != "mock" && e.label_mode != "remote")
        throw ConfigError("label.mode must be mock or remote");
    e.label_url = cfg.get_string("label.url", "");
    if (e.label_mode == "remote" && e.label_url.empty())
        throw ConfigError("label.mode = remote requires label.url");
    e.label_audit_log = cfg.get_string("label.audit_log", "");

    e.eval_datasets = cfg.get_string("eval.datasets", "");
    e.eval_params = cfg.get_string("eval.params", "");
    e.ablate_seeds = static_cast<int>(cfg.get_int("ablate.seeds", 3));
    if (e.ablate_seeds < 1) throw ConfigError("ablate.seeds must be >= 1");
    return e;
}

ToyModel Experiment::make_model() const {
    return ToyModel(policy_cfg, sim_action_vocab(), sim_lexicon(sim));
}

std::vector<Episode> run_gen_data(const Experiment& exp) {
    std::filesystem::create_directories(exp.out_dir);
    auto train = generate_dataset(exp.sim, exp.n_episodes);
    SimConfig eval_cfg = exp.sim;
    eval_cfg.rng_seed = mix_seed(exp.seed, 0xEEu);
    auto eval = generate_dataset(eval_cfg, exp.n_eval_episodes);
    for (auto& ep : eval) ep.episode_id = "eval-" + ep.episode_id;

    const auto train_path = exp.out_dir / "dataset.jsonl";
    const auto eval_path = exp.out_dir / "eval_dataset.jsonl";
    save_episodes(train_path, train);
    save_episodes(eval_path, eval);
    write_manifest(exp, "gen-data", {train_path, eval_path});
    return train;
}

std::vector<PseudoLabel> run_label(const Experiment& exp) {
    auto episodes = load_episodes(exp.out_dir / "dataset.jsonl");
    std::vector<std::vector<PseudoLabel>> per_episode(episodes.size());
    if (exp.label_mode == "mock") {
        // Trajectories label independently; steps inside one stay sequential.
        parallel_for(episodes.size(), exp.workers, [&](size_t i) {
            MockLabelClient client(episodes[i]);
            per_episode[i] = label_trajectory(episodes[i], client, exp.labeler);
        });
    } else {
        std::filesystem::path audit =
            exp.label_audit_log.empty() ? std::filesystem::path{}
                                        : exp.out_dir / exp.label_audit_log;
        for (size_t i = 0; i < episodes.size(); ++i) {
            HttpLabelClient client(exp.label_url, audit);
            per_episode[i] = label_trajectory(episodes[i], client, exp.labeler);
        }
    }
    std::vector<PseudoLabel> labels;
    for (auto& ls : per_episode)
        for (auto& l : ls) labels.push_back(std::move(l));
    const auto path = exp.out_dir / "labels.jsonl";
    save_labels(path, labels);
    write_manifest(exp, "label", {path});
    return labels;
}

ToyPolicySnapshot run_sft(const Experiment& exp) {
    auto episodes = load_episodes(exp.out_dir / "dataset.jsonl");
    auto labels = load_labels(exp.out_dir / "labels.jsonl");
    ToyModel model = exp.make_model();
    auto examples = build_sft_dataset(model, episodes, labels);

    Params params = model.zero_params();
    auto stats = sft_train(params, model, examples, exp.sft, exp.workers);

    const auto log_path = exp.out_dir / "sft_log.csv";
    {
        std::ofstream out(log_path, std::ios::binary);
        out << "iter,loss\n";
        for (const auto& s : stats) out << s.iteration << "," << format_double(s.loss) << "\n";
    }
    ToyPolicySnapshot snap{exp.policy_cfg, sim_action_vocab().types(), sim_lexicon(exp.sim),
                           std::move(params)};
    const auto snap_path = exp.out_dir / "sft_policy.json";
    snap.save(snap_path);
    write_manifest(exp, "sft", {snap_path, log_path});
    return snap;
}

ToyPolicySnapshot run_grpo(const Experiment& exp) {
    auto episodes = load_episodes(exp.out_dir / "dataset.jsonl");
    ToyModel model = exp.make_model();

    TrainerState state;
    const auto init_path = exp.out_dir / "sft_policy.json";
    if (std::filesystem::exists(init_path)) {
        auto snap = ToyPolicySnapshot::load(init_path);
        if (snap.params.size() != static_cast<size_t>(exp.policy_cfg.hash_dim))
            throw ConfigError("sft_policy.json does not match policy.hash_dim");
        state.theta = std::move(snap.params);
    } else {
        state.theta = model.zero_params();
    }
    state.theta_old = state.theta;
    state.theta_ref = state.theta;

    const auto log_path = exp.out_dir / "train_log.csv";
    const auto rewards_path = exp.out_dir / "step_rewards.csv";
    std::ofstream log(log_path, std::ios::binary);
    std::ofstream rewards_log(rewards_path, std::ios::binary);
    log << "iter,mean_reward,mean_r_f,mean_r_a,mean_r_h,objective,kl\n";
    rewards_log << "iter,episode_id,t,i,r_f,r_af,r_type,r_pos,r_a,r_h,total\n";

    const size_t n = episodes.size();
    const size_t per_iter = std::min<size_t>(exp.grpo.episodes_per_iter, n);
    for (int it = 0; it < exp.grpo.iterations; ++it) {
        std::vector<const Episode*> batch;
        for (size_t k = 0; k < per_iter; ++k)
            batch.push_back(&episodes[(static_cast<size_t>(it) * per_iter + k) % n]);
        auto result = train_iteration(state, model, batch, exp.reward, exp.grpo, exp.seed,
                                      exp.workers);
        const auto& s = result.stats;
        log << s.iteration << "," << format_double(s.mean_reward) << ","
            << format_double(s.mean_r_f) << "," << format_double(s.mean_r_a) << ","
            << format_double(s.mean_r_h) << "," << format_double(s.objective) << ","
            << format_double(s.mean_kl) << "\n";
        for (const auto& g : result.groups) {
            for (size_t i = 0; i < g.rewards.size(); ++i) {
                const auto& b = g.rewards[i];
                rewards_log << s.iteration << "," << g.episode_id << "," << g.step_index << ","
                            << i << "," << format_double(b.r_f) << "," << format_double(b.r_af)
                            << "," << format_double(b.r_type) << "," << format_double(b.r_pos)
                            << "," << format_double(b.r_a) << "," << format_double(b.r_h) << ","
                            << format_double(b.total) << "\n";
            }
        }
    }
    log.close();
    rewards_log.close();

    ToyPolicySnapshot snap{exp.policy_cfg, sim_action_vocab().types(), sim_lexicon(exp.sim),
                           std::move(state.theta)};
    const auto snap_path = exp.out_dir / "grpo_policy.json";
    snap.save(snap_path);
    write_manifest(exp, "grpo", {snap_path, log_path, rewards_path});
    return snap;
}

std::vector<ReportRow> evaluate_policy(EvalPolicy& policy, const std::vector<Episode>& episodes,
                                       const std::string& split) {
    std::vector<ReportRow> rows;
    for (const auto& ep : episodes) {
        std::string history;
        for (size_t t = 0; t < ep.steps.size(); ++t) {
            AgentTurn turn = policy.predict(ep, static_cast<int>(t), history);
            const Step& step = ep.steps[t];
            ReportRow row;
            row.split = split;
            row.episode_id = ep.episode_id;
            row.step = static_cast<int>(t);
            row.metrics = step_metrics(turn.parsed_action, step.gt_action, step.gt_bbox);
            row.action_acc = action_accuracy(turn.parsed_action, step.gt_action, step.gt_bbox);
            rows.push_back(row);
            history = turn.history_summary;
        }
    }
    return rows;
}

std::unique_ptr<EvalPolicy> make_eval_policy(const std::string& spec, const Experiment& exp,
                                             const ToyModel* model, const Params* params) {
    if (spec == "toy") {
        if (!model || !params) throw ConfigError("toy policy needs a params snapshot");
        return make_toy_eval(*model, *params);
    }
    if (spec == "scripted-oracle") return make_scripted_oracle();
    if (spec.rfind("scripted-corrupt:", 0) == 0) {
        double p = std::stod(spec.substr(std::string("scripted-corrupt:").size()));
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("corruption probability must be in [0,1]");
        return make_scripted_corrupt(p, mix_seed(exp.seed, 0xC0u));
    }
    if (spec.rfind("remote:", 0) == 0) return make_remote_eval(spec.substr(7));
    throw ConfigError("unknown policy '" + spec +
                      "' (expected toy|scripted-oracle|scripted-corrupt:p|remote:URL)");
}

std::string render_report(const Report& report) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %8s %8s %8s %8s %10s\n", "Split", "Steps", "Ele.Acc",
                  "Op.F1", "Step SR", "Action Acc");
    out += line;
    auto emit = [&](const SplitSummary& s) {
        std::snprintf(line, sizeof(line), "%-24s %8zu %8.4f %8.4f %8.4f %10.4f\n", s.split.c_str(),
                      s.steps, s.ele_acc, s.op_f1, s.step_sr, s.action_acc);
        out += line;
    };
    for (const auto& s : report.splits) emit(s);
    emit(report.overall);
    return out;
}

Report run_eval(const Experiment& exp, const std::string& policy_spec) {
    std::vector<std::string> paths = split_csv_list(exp.eval_datasets);
    if (paths.empty()) paths.push_back((exp.out_dir / "eval_dataset.jsonl").string());

    std::optional<ToyModel> model;
    Params params;
    if (policy_spec == "toy") {
        std::filesystem::path snap_path =
            exp.eval_params.empty() ? exp.out_dir / "grpo_policy.json"
                                    : std::filesystem::path(exp.eval_params);
        auto snap = ToyPolicySnapshot::load(snap_path);
        model.emplace(snap.make_model());
        params = std::move(snap.params);
    }

    std::vector<ReportRow> rows;
    for (const auto& p : paths) {
        auto episodes = load_episodes(p);
        std::string split = std::filesystem::path(p).stem().string();
        auto policy = make_eval_policy(policy_spec, exp, model ? &*model : nullptr,
                                       model ? &params : nullptr);
        auto split_rows = evaluate_policy(*policy, episodes, split);
        rows.insert(rows.end(), split_rows.begin(), split_rows.end());
    }
    Report report = aggregate(rows);

    const auto path = exp.out_dir / "report.csv";
    {
        std::ofstream out(path, std::ios::binary);
        out << "split,steps,Ele.Acc,Op.F1,Step SR,Action Acc\n";
        for (const auto& s : report.splits)
            out << s.split << "," << s.steps << "," << format_double(s.ele_acc) << ","
                << format_double(s.op_f1) << "," << format_double(s.step_sr) << ","
                << format_double(s.action_acc) << "\n";
        out << report.overall.split << "," << report.overall.steps << ","
            << format_double(report.overall.ele_acc) << "," << format_double(report.overall.op_f1)
            << "," << format_double(report.overall.step_sr) << ","
            << format_double(report.overall.action_acc) << "\n";
    }
    write_manifest(exp, "eval", {path});
    return report;
}

void run_curves(const Experiment& exp) {
    std::ifstream in(exp.out_dir / "train_log.csv");
    if (!in) throw ConfigError("train_log.csv not found; run grpo first");
    std::string header;
    std::getline(in, header);
    auto columns = split_csv_list(header);

    const auto path = exp.out_dir / "curves.csv";
    std::ofstream out(path, std::ios::binary);
    out << "iter,metric,value\n";
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_list(line);
        for (size_t c = 1; c < cells.size() && c < columns.size(); ++c)
            out << cells[0] << "," << columns[c] << "," << cells[c] << "\n";
    }
    out.close();
    write_manifest(exp, "curves", {path});
}

namespace {

double final_step_accuracy(const std::vector<ReportRow>& rows,
                           const std::vector<Episode>& episodes) {
    std::map<std::string, int> last_step;
    for (const auto& ep : episodes)
        last_step[ep.episode_id] = static_cast<int>(ep.steps.size()) - 1;
    double sum = 0.0;
    size_t n = 0;
    for (const auto& row : rows) {
        if (row.step == last_step[row.episode_id]) {
            sum += row.action_acc;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

AblationReport run_ablate(const Experiment& exp) {
    AblationReport report;
    std::vector<double> with_h, without_h;
    for (int s = 0; s < exp.ablate_seeds; ++s) {
        for (double lambda_h : {exp.reward.lambda_h, 0.0}) {
            Experiment arm = exp;
            arm.seed = mix_seed(exp.seed, 0xAB1u, static_cast<uint64_t>(s));
            arm.sim.rng_seed = mix_seed(arm.seed, 0x5117u);
            arm.reward.lambda_h = lambda_h;
            std::string arm_name = lambda_h > 0.0 ? "history-reward" : "no-history-reward";
            arm.out_dir = exp.out_dir / "ablate" / arm_name / ("seed" + std::to_string(s));
            std::filesystem::create_directories(arm.out_dir);

            run_gen_data(arm);
            run_label(arm);
            run_sft(arm);
            auto snap = run_grpo(arm);

            auto eval_eps = load_episodes(arm.out_dir / "eval_dataset.jsonl");
            ToyModel model = snap.make_model();
            auto policy = make_toy_eval(model, snap.params);
            auto rows = evaluate_policy(*policy, eval_eps, arm_name);
            double acc = final_step_accuracy(rows, eval_eps);
            report.rows.push_back({arm_name, arm.seed, acc});
            (lambda_h > 0.0 ? with_h : without_h).push_back(acc);
        }
    }
    report.median_with_history = median(with_h);
    report.median_without_history = median(without_h);

    const auto path = exp.out_dir / "ablation.csv";
    {
        std::ofstream out(path, std::ios::binary);
        out << "arm,seed,final_step_accuracy\n";
        for (const auto& r : report.rows)
            out << r.arm << "," << r.seed << "," << format_double(r.final_step_accuracy) << "\n";
        out << "median,history-reward," << format_double(report.median_with_history) << "\n";
        out << "median,no-history-reward," << format_double(report.median_without_history) << "\n";
    }
    write_manifest(exp, "ablate", {path});
    return report;
}

ColdStartCurves run_coldstart_study(const Experiment& exp, uint64_t seed, int iterations) {
    Experiment arm = exp;
    arm.seed = seed;
    arm.sim.rng_seed = mix_seed(seed, 0x5117u);
    arm.out_dir = exp.out_dir / ("coldstart-seed" + std::to_string(seed));
    std::filesystem::create_directories(arm.out_dir);

    auto episodes = generate_dataset(arm.sim, arm.n_episodes);
    ToyModel model = arm.make_model();

    auto run_arm = [&](const Params& init) {
        TrainerState state;
        state.theta = init;
        state.theta_old = init;
        state.theta_ref = init;
        std::vector<double> r_pos_curve;
        const size_t n = episodes.size();
        const size_t per_iter = std::min<size_t>(arm.grpo.episodes_per_iter, n);
        for (int it = 0; it < iterations; ++it) {
            std::vector<const Episode*> batch;
            for (size_t k = 0; k < per_iter; ++k)
                batch.push_back(&episodes[(static_cast<size_t>(it) * per_iter + k) % n]);
            auto result = train_iteration(state, model, batch, arm.reward, arm.grpo, arm.seed,
                                          arm.workers);
            double sum = 0.0;
            size_t count = 0;
            for (const auto& g : result.groups)
                for (const auto& b : g.rewards) {
                    sum += b.r_pos;
                    ++count;
                }
            r_pos_curve.push_back(sum / static_cast<double>(count));
        }
        return r_pos_curve;
    };

    ColdStartCurves curves;
    curves.rl_only_r_pos = run_arm(model.zero_params());

    // Cold-start arm: label + SFT first, then the same RL loop.
    std::vector<PseudoLabel> labels;
    for (const auto& ep : episodes) {
        MockLabelClient client(ep);
        auto ls = label_trajectory(ep, client, arm.labeler);
        labels.insert(labels.end(), ls.begin(), ls.end());
    }
    auto examples = build_sft_dataset(model, episodes, labels);
    Params sft_params = model.zero_params();
    sft_train(sft_params, model, examples, arm.sft, arm.workers);
    curves.sft_rl_r_pos = run_arm(sft_params);

    const auto path = arm.out_dir / "coldstart.csv";
    {
        std::ofstream out(path, std::ios::binary);
        out << "iter,rl_only_r_pos,sft_rl_r_pos\n";
        for (size_t i = 0; i < curves.rl_only_r_pos.size(); ++i)
            out << i << "," << format_double(curves.rl_only_r_pos[i]) << ","
                << format_double(curves.sft_rl_r_pos[i]) << "\n";
    }
    write_manifest(arm, "coldstart", {path});
    return curves;
}

} // namespace guirise
