#pragma once

#include "multipilot/channel.hpp"
#include "multipilot/config.hpp"
#include "multipilot/control.hpp"
#include "multipilot/ddpg.hpp"
#include "multipilot/fuzzy.hpp"
#include "multipilot/kalman.hpp"
#include "multipilot/metrics.hpp"
#include "multipilot/operators.hpp"
#include "multipilot/plant.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace multipilot {

// ----- scenario configuration -----

struct ScenarioConfig {
    enum class Kind { DualPilot, TriplePilotDelay };

    Kind kind = Kind::DualPilot;
    std::uint64_t seed = 1;
    double dt = 0.01;
    int episodes = 20;
    int train_steps_per_tick = 1;
    int steps = 2000;

    OperatorProfile reference; // clean task circle
    std::vector<OperatorProfile> masters;
    OperatorProfile copilot;

    ChannelConfig forward_channel;
    ChannelConfig backward_channel;

    GaussianLinearModel kf_model;
    double backward_predict_horizon = 0.0; // seconds the slave-state filter extrapolates

    DdpgConfig agent1;
    DdpgConfig agent2;
    bool master_oriented = false;

    // input normalization: agent states are divided by these before the nets
    double s1_vel_scale = 0.0;  // 0 = derive from the reference circle
    double s1_acc_scale = 0.0;
    double s2_err_scale = 0.05;

    PidGains pid;
    EnvironmentModel env;
    std::string force_checkpoint; // optional, enables F_se reconstruction logging

    static ScenarioConfig from_config(const Config& cfg);
    void validate() const;
};

// ----- per-episode signal log -----

struct EpisodeLog {
    std::vector<double> t;
    std::vector<Eigen::Vector3d> x_ref, x_m1, x_m2, x_mc, x_d, x_mf, x_cpf, w_m, x_sc, x_s,
        f_se, f_hat_se;
    bool has_m2 = false;

    double return1 = 0.0;
    double return2 = 0.0;

    void write_csv(const std::string& path) const;
};

// ----- reports -----

struct RunReport {
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::string> gate_lines;
    bool gates_passed = true;
    double wall_seconds = 0.0;
    std::string config_hash;

    double value(const std::string& key) const;
    void write_csv(const std::string& path) const;
    std::string summary() const;
};

// Recompute the metric table from a tick log alone.
RunReport report_from_log(const std::string& csv_path, ScenarioConfig::Kind kind,
                          bool master_oriented);

// As above, inferring the scenario kind from the logged columns.
RunReport report_from_log_auto(const std::string& csv_path);

// ----- engine -----

// One full control loop: scripted masters -> KF fusion -> delayed channel ->
// restoration agent -> co-pilot smoothing & arbitration -> slave plant, with
// the slave state fed back through the return channel into a predicting
// filter and the optional force estimator.
class ScenarioEngine {
  public:
    ScenarioEngine(const ScenarioConfig& cfg, DdpgAgent& agent1, DdpgAgent& agent2,
                   const FuzzyModel* force_model = nullptr);

    // Exploration follows training: an agent under training explores, a
    // frozen agent acts deterministically.
    EpisodeLog run_episode(int episode_index, bool train1, bool train2);

  private:
    const ScenarioConfig& cfg_;
    DdpgAgent& agent1_;
    DdpgAgent& agent2_;
    const FuzzyModel* force_model_;
    Eigen::Matrix3d predict_ahead_; // per-axis extrapolation over the backward delay
    double vel_scale_ = 1.0;
    double acc_scale_ = 1.0;
    double err_scale_ = 1.0;
};

// ----- top-level operations -----

struct TrainingCurves {
    std::vector<double> returns1, returns2;

    void write_csv(const std::string& path) const;
};

// Trains the agents through the scenario loop, staged: the restoration agent
// trains for the configured episode count first, then is frozen while the
// arbitration agent trains against the resulting command distribution.
// Checkpoints land in out_dir when it is non-empty.
TrainingCurves train_agents(const ScenarioConfig& cfg, DdpgAgent& agent1, DdpgAgent& agent2,
                            const std::string& out_dir = "");

// Evaluation run with frozen policies; writes ticks.csv / report.csv when
// out_dir is non-empty and evaluates the scenario's ordinal gates.
RunReport run_scenario(const ScenarioConfig& cfg, DdpgAgent& agent1, DdpgAgent& agent2,
                       const FuzzyModel* force_model, const std::string& out_dir,
                       const std::string& config_hash = "");

// ----- force estimation scenario -----

struct ForceScenarioConfig {
    int classes = 3;
    std::vector<double> stiffness{200.0, 500.0, 1000.0};
    std::vector<double> damping{5.0, 10.0, 20.0};
    int trials = 50;
    int train_trials = 3;
    int samples_per_trial = 200;
    double dt = 0.01;
    double settle_steps = 50;       // ticks discarded while the filter warms up
    double state_noise_std = 1e-4;  // position measurement noise into the filter
    double force_noise_std = 0.0;   // sensor noise on the recorded force
    double sweep_radius = 0.0;      // optional planar sweep during the press
    std::uint64_t seed = 1;
    PidGains pid;
    GaussianLinearModel kf_model;
    FuzzyModelConfig fuzzy;

    static ForceScenarioConfig from_config(const Config& cfg);
    void validate() const;
};

struct ForceDataset {
    Eigen::MatrixXd states; // N x 9 filtered slave states
    Eigen::MatrixXd forces; // N x 3 measured interaction forces
    std::vector<int> labels;
    std::vector<int> trial_ids;
};

ForceDataset generate_force_dataset(const ForceScenarioConfig& cfg);

// Deterministic split: per class, trials are shuffled by seed and the first
// train_trials go to training.
void split_force_dataset(const ForceScenarioConfig& cfg, const ForceDataset& all,
                         ForceDataset& train, ForceDataset& test);

FuzzyModel fit_force_model(const ForceScenarioConfig& cfg);

struct ForceEvalReport {
    struct PerClass {
        int label = 0;
        double rmse = 0.0;
        double force_range = 0.0;
        double ratio = 0.0;
    };
    std::vector<PerClass> classes;
    bool pass = true; // every class ratio < 0.05

    std::string summary() const;
};

ForceEvalReport eval_force_model(const ForceScenarioConfig& cfg, const FuzzyModel& model);

} // namespace multipilot
