// Scenario runner: trains the agents, replays scenarios against checkpoints,
// recomputes reports from logged CSVs and drives the force-estimator
// fit/eval pipeline.

#include "multipilot/config.hpp"
#include "multipilot/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using namespace multipilot;

std::string hash_hex(const Config& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(cfg.hash()));
    return buf;
}

Config load_config(const std::string& path, const std::optional<std::uint64_t>& seed) {
    Config cfg = Config::parse_file(path);
    if (seed) cfg = Config::with_override(cfg, "seed", std::to_string(*seed));
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-pilot teleoperation simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", checkpoint_path, log_path;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "scenario config file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override the scenario seed");
    };

    CLI::App* cmd_train = app.add_subcommand("train", "train both agents on a scenario");
    add_common(cmd_train);

    CLI::App* cmd_run = app.add_subcommand("run", "run a scenario against checkpoints");
    add_common(cmd_run);
    cmd_run->add_option("--checkpoint", checkpoint_path, "checkpoint directory")->required();

    CLI::App* cmd_report = app.add_subcommand("report", "recompute metrics from a tick log");
    cmd_report->add_option("--log", log_path, "ticks.csv produced by run")->required();
    cmd_report->add_option("--out", out_dir, "output directory");

    CLI::App* cmd_force_fit = app.add_subcommand("force-fit", "fit the force estimator");
    add_common(cmd_force_fit);

    CLI::App* cmd_force_eval = app.add_subcommand("force-eval", "evaluate a force estimator");
    add_common(cmd_force_eval);
    cmd_force_eval->add_option("--checkpoint", checkpoint_path, "force model checkpoint")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_train) {
            const Config raw = load_config(config_path, seed);
            const ScenarioConfig sc = ScenarioConfig::from_config(raw);
            DdpgAgent agent1(sc.agent1);
            DdpgAgent agent2(sc.agent2);
            const TrainingCurves curves = train_agents(sc, agent1, agent2, out_dir);
            std::cout << "trained " << sc.episodes << " episodes; final returns "
                      << curves.returns1.back() << " / " << curves.returns2.back() << "\n"
                      << "checkpoints written to " << out_dir << "\n";
            return 0;
        }
        if (*cmd_run) {
            const Config raw = load_config(config_path, seed);
            const ScenarioConfig sc = ScenarioConfig::from_config(raw);
            DdpgAgent agent1 = DdpgAgent::load_file(checkpoint_path + "/ddpg1.ckpt");
            DdpgAgent agent2 = DdpgAgent::load_file(checkpoint_path + "/ddpg2.ckpt");
            std::optional<FuzzyModel> force_model;
            if (!sc.force_checkpoint.empty())
                force_model = FuzzyModel::load_file(sc.force_checkpoint);
            const RunReport rep =
                run_scenario(sc, agent1, agent2, force_model ? &*force_model : nullptr, out_dir,
                             hash_hex(raw));
            std::cout << rep.summary();
            return rep.gates_passed ? 0 : 1;
        }
        if (*cmd_report) {
            const RunReport rep = report_from_log_auto(log_path);
            std::cout << rep.summary();
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                rep.write_csv(out_dir + "/report_from_log.csv");
            }
            return 0;
        }
        if (*cmd_force_fit) {
            const Config raw = load_config(config_path, seed);
            const ForceScenarioConfig fc = ForceScenarioConfig::from_config(raw);
            const FuzzyModel model = fit_force_model(fc);
            std::filesystem::create_directories(out_dir);
            model.save(out_dir + "/force_model.ckpt");
            std::cout << "fitted " << model.rule_count() << " rules; checkpoint written to "
                      << out_dir << "/force_model.ckpt\n";
            return 0;
        }
        if (*cmd_force_eval) {
            const Config raw = load_config(config_path, seed);
            const ForceScenarioConfig fc = ForceScenarioConfig::from_config(raw);
            const FuzzyModel model = FuzzyModel::load_file(checkpoint_path);
            const ForceEvalReport rep = eval_force_model(fc, model);
            std::cout << rep.summary();
            return rep.pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
