#include "multipilot/scenario.hpp"

#include "multipilot/csv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>

namespace multipilot {

namespace {

OperatorProfile parse_profile(const Config& cfg, const std::string& prefix,
                              const OperatorProfile& reference, std::uint64_t default_seed) {
    OperatorProfile p = reference;
    p.radius = cfg.get_double(prefix + ".radius", reference.radius);
    p.period = cfg.get_double(prefix + ".period", reference.period);
    p.center = cfg.get_vec3(prefix + ".center", reference.center);
    p.phase = cfg.get_double(prefix + ".phase", reference.phase);
    p.noise_std = cfg.get_double(prefix + ".noise_std", 0.001);
    p.seed = cfg.get_u64(prefix + ".seed", default_seed);
    p.windows.clear();
    for (int k = 1;; ++k) {
        const std::string wp = prefix + ".error" + std::to_string(k);
        if (!cfg.has(wp + ".start")) break;
        ErrorWindow w;
        w.start = cfg.require_double(wp + ".start");
        w.end = cfg.require_double(wp + ".end");
        const std::string shape = cfg.get_string(wp + ".shape", "bias");
        if (shape == "bias") {
            w.shape = ErrorWindow::Shape::Bias;
        } else if (shape == "drift") {
            w.shape = ErrorWindow::Shape::Drift;
        } else {
            throw std::invalid_argument("config: unknown error window shape '" + shape + "'");
        }
        w.magnitude = cfg.get_vec3(wp + ".magnitude", Eigen::Vector3d(0.05, 0.0, 0.0));
        p.windows.push_back(w);
    }
    p.validate();
    return p;
}

ChannelConfig parse_channel(const Config& cfg, const std::string& prefix,
                            const ChannelConfig& defaults) {
    ChannelConfig c = defaults;
    c.base_delay = cfg.get_double(prefix + ".base_delay", defaults.base_delay);
    c.jitter_std = cfg.get_double(prefix + ".jitter_std", defaults.jitter_std);
    c.loss_prob = cfg.get_double(prefix + ".loss_prob", defaults.loss_prob);
    c.seed = cfg.get_u64(prefix + ".seed", defaults.seed);
    c.hold_last_sample = cfg.get_bool(prefix + ".hold_last_sample", defaults.hold_last_sample);
    c.validate();
    return c;
}

DdpgConfig parse_agent(const Config& cfg, const std::string& prefix, DdpgConfig base) {
    base.gamma = cfg.get_double(prefix + ".gamma", base.gamma);
    base.minibatch = cfg.get_int(prefix + ".minibatch", base.minibatch);
    base.buffer_capacity =
        static_cast<std::size_t>(cfg.get_int(prefix + ".buffer", static_cast<int>(base.buffer_capacity)));
    base.noise_var = cfg.get_double(prefix + ".noise_var", base.noise_var);
    base.noise_decay = cfg.get_double(prefix + ".noise_decay", base.noise_decay);
    base.tau = cfg.get_double(prefix + ".tau", base.tau);
    base.actor_lr = cfg.get_double(prefix + ".actor_lr", base.actor_lr);
    base.critic_lr = cfg.get_double(prefix + ".critic_lr", base.critic_lr);
    base.grad_clip = cfg.get_double(prefix + ".grad_clip", base.grad_clip);
    const std::string opt = cfg.get_string(prefix + ".optimizer", "adam");
    if (opt == "adam") {
        base.optimizer = OptimizerKind::Adam;
    } else if (opt == "sgd") {
        base.optimizer = OptimizerKind::Sgd;
    } else {
        throw std::invalid_argument("config: unknown optimizer '" + opt + "'");
    }
    base.actor_warmup = cfg.get_int(prefix + ".actor_warmup", base.actor_warmup);
    base.center_rewards = cfg.get_bool(prefix + ".center_rewards", base.center_rewards);
    base.baseline_rate = cfg.get_double(prefix + ".baseline_rate", base.baseline_rate);
    base.final_layer_init = cfg.get_double(prefix + ".final_layer_init", base.final_layer_init);
    base.actor_update_period = cfg.get_int(prefix + ".actor_update_period", base.actor_update_period);
    base.actor_weight_decay = cfg.get_double(prefix + ".actor_weight_decay", base.actor_weight_decay);
    base.action_input_scale = cfg.get_double(prefix + ".action_input_scale", base.action_input_scale);
    base.lr_decay_steps = cfg.get_int(prefix + ".lr_decay_steps", static_cast<int>(base.lr_decay_steps));
    base.policy_average_rate = cfg.get_double(prefix + ".policy_average_rate", base.policy_average_rate);
    base.twin_critic = cfg.get_bool(prefix + ".twin_critic", base.twin_critic);
    base.random_steps = cfg.get_int(prefix + ".random_steps", static_cast<int>(base.random_steps));
    base.random_epsilon = cfg.get_double(prefix + ".random_epsilon", base.random_epsilon);
    base.seed = cfg.get_u64(prefix + ".seed", base.seed);
    base.validate();
    return base;
}

void append_vec3(std::vector<double>& row, const Eigen::Vector3d& v) {
    row.push_back(v.x());
    row.push_back(v.y());
    row.push_back(v.z());
}

std::vector<Eigen::Vector3d> csv_vec3(const CsvTable& t, const std::string& base) {
    const auto x = t.column(base + "_x");
    const auto y = t.column(base + "_y");
    const auto z = t.column(base + "_z");
    std::vector<Eigen::Vector3d> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = Eigen::Vector3d(x[i], y[i], z[i]);
    return out;
}

} // namespace

// ----- ScenarioConfig -----

ScenarioConfig ScenarioConfig::from_config(const Config& cfg) {
    ScenarioConfig sc;
    const std::string kind = cfg.get_string("scenario", "dual-pilot");
    if (kind == "dual-pilot") {
        sc.kind = Kind::DualPilot;
    } else if (kind == "triple-pilot-delay") {
        sc.kind = Kind::TriplePilotDelay;
    } else {
        throw std::invalid_argument("config: unknown scenario '" + kind + "'");
    }
    sc.seed = cfg.get_u64("seed", 1);
    sc.dt = cfg.get_double("dt", 0.01);
    sc.episodes = cfg.get_int("episodes", 20);
    sc.train_steps_per_tick = cfg.get_int("train_steps_per_tick", 1);
    sc.steps = cfg.get_int("steps", 2000);
    if (cfg.has("episode_duration")) {
        const double duration = cfg.require_double("episode_duration");
        if (std::abs(sc.steps * sc.dt - duration) > 1e-9)
            throw std::invalid_argument("config: steps * dt does not match episode_duration");
    }

    sc.reference.radius = cfg.get_double("reference.radius", 0.1);
    sc.reference.period = cfg.get_double("reference.period", 10.0);
    sc.reference.center = cfg.get_vec3("reference.center", Eigen::Vector3d::Zero());
    sc.reference.phase = cfg.get_double("reference.phase", 0.0);
    sc.reference.noise_std = 0.0;

    sc.masters.push_back(parse_profile(cfg, "master1", sc.reference, derive_seed(sc.seed, 11)));
    if (sc.kind == Kind::TriplePilotDelay)
        sc.masters.push_back(parse_profile(cfg, "master2", sc.reference, derive_seed(sc.seed, 12)));
    sc.copilot = parse_profile(cfg, "copilot", sc.reference, derive_seed(sc.seed, 13));

    ChannelConfig fwd_default;
    fwd_default.base_delay = sc.kind == Kind::TriplePilotDelay ? 0.5 : 0.0;
    fwd_default.seed = derive_seed(sc.seed, 41);
    sc.forward_channel = parse_channel(cfg, "channel", fwd_default);
    ChannelConfig back_default = sc.forward_channel;
    back_default.seed = derive_seed(sc.seed, 42);
    sc.backward_channel = parse_channel(cfg, "backchannel", back_default);

    const double kf_dt = cfg.get_double("kalman.dt", sc.dt);
    sc.kf_model = constant_jerk_model(kf_dt, cfg.get_double("kalman.jerk_std", 1.0),
                                      cfg.get_double("kalman.r", 1e-6));
    sc.backward_predict_horizon =
        cfg.get_double("kalman.predict_horizon", sc.backward_channel.base_delay);

    const std::string mode = cfg.get_string("arbitration.mode", "balanced");
    if (mode == "balanced") {
        sc.master_oriented = false;
    } else if (mode == "master-oriented") {
        sc.master_oriented = true;
    } else {
        throw std::invalid_argument("config: unknown arbitration.mode '" + mode + "'");
    }

    DdpgConfig a1;
    a1.state_dim = 6;  // received velocity + acceleration
    a1.action_dim = 6; // additive position + velocity offsets
    a1.action_lo = -1.0;
    a1.action_hi = 1.0;
    a1.seed = derive_seed(sc.seed, 61);
    sc.agent1 = parse_agent(cfg, "agent1", a1);

    DdpgConfig a2;
    a2.state_dim = 6; // position errors of both candidate commands
    a2.action_dim = 3;
    a2.action_lo = 0.0;
    a2.action_hi = sc.master_oriented ? 0.5 : 1.0;
    a2.seed = derive_seed(sc.seed, 62);
    sc.agent2 = parse_agent(cfg, "agent2", a2);

    sc.pid.kp = cfg.get_double("pid.kp", 100.0);
    sc.pid.ki = cfg.get_double("pid.ki", 0.0);
    sc.pid.kd = cfg.get_double("pid.kd", 20.0);

    sc.env.stiffness = cfg.get_double("env.stiffness", 0.0);
    sc.env.damping = cfg.get_double("env.damping", 0.0);
    sc.env.normal = cfg.get_vec3("env.normal", Eigen::Vector3d(0.0, 0.0, 1.0));
    sc.env.plane_offset = cfg.get_double("env.plane_offset", -1.0);

    const double ref_omega = 2.0 * M_PI / sc.reference.period;
    sc.s1_vel_scale = cfg.get_double("state_scale.vel", sc.reference.radius * ref_omega);
    sc.s1_acc_scale = cfg.get_double("state_scale.acc", sc.reference.radius * ref_omega * ref_omega);
    sc.s2_err_scale = cfg.get_double("state_scale.err", 0.05);

    sc.force_checkpoint = cfg.get_string("force_checkpoint", "");

    sc.validate();
    return sc;
}

void ScenarioConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("scenario: dt must be positive");
    if (episodes < 1 || steps < 1)
        throw std::invalid_argument("scenario: episodes and steps must be positive");
    if (masters.empty() || masters.size() > 2)
        throw std::invalid_argument("scenario: need one or two masters");
    for (const auto& m : masters) m.validate();
    copilot.validate();
    forward_channel.validate();
    backward_channel.validate();
    kf_model.validate();
    agent1.validate();
    agent2.validate();
    if (master_oriented && agent2.action_hi > 0.5 + 1e-12)
        throw std::invalid_argument("scenario: master-oriented mode caps weights at 0.5");
}

// ----- EpisodeLog -----

void EpisodeLog::write_csv(const std::string& path) const {
    std::vector<std::string> cols{"t"};
    auto add3 = [&cols](const std::string& base) {
        cols.push_back(base + "_x");
        cols.push_back(base + "_y");
        cols.push_back(base + "_z");
    };
    add3("x_ref");
    add3("x_m1");
    if (has_m2) add3("x_m2");
    add3("x_mc");
    add3("x_d");
    add3("x_mf");
    add3("x_cpf");
    add3("w_m");
    add3("x_sc");
    add3("x_s");
    add3("f_se");
    add3("f_hat_se");

    CsvWriter out(path, cols);
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::vector<double> row{t[i]};
        append_vec3(row, x_ref[i]);
        append_vec3(row, x_m1[i]);
        if (has_m2) append_vec3(row, x_m2[i]);
        append_vec3(row, x_mc[i]);
        append_vec3(row, x_d[i]);
        append_vec3(row, x_mf[i]);
        append_vec3(row, x_cpf[i]);
        append_vec3(row, w_m[i]);
        append_vec3(row, x_sc[i]);
        append_vec3(row, x_s[i]);
        append_vec3(row, f_se[i]);
        append_vec3(row, f_hat_se[i]);
        out.row(row);
    }
    out.flush();
}

// ----- RunReport -----

double RunReport::value(const std::string& key) const {
    for (const auto& [k, v] : values)
        if (k == key) return v;
    throw std::invalid_argument("report: no metric '" + key + "'");
}

void RunReport::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("report: cannot write '" + path + "'");
    out << "metric,value\n";
    for (const auto& [k, v] : values) out << k << ',' << Checkpoint::format_double(v) << '\n';
    out << "config_hash," << config_hash << '\n';
    out << "gates_passed," << (gates_passed ? 1 : 0) << '\n';
}

std::string RunReport::summary() const {
    std::ostringstream ss;
    for (const auto& [k, v] : values) ss << k << " = " << Checkpoint::format_double(v) << '\n';
    for (const auto& line : gate_lines) ss << line << '\n';
    ss << (gates_passed ? "gates: PASS" : "gates: FAIL") << '\n';
    return ss.str();
}

namespace {

RunReport compute_report(const EpisodeLog& log, ScenarioConfig::Kind kind, bool master_oriented) {
    RunReport rep;
    auto put = [&rep](const std::string& k, double v) { rep.values.emplace_back(k, v); };

    auto put_rmse3 = [&](const std::string& name, const std::vector<Eigen::Vector3d>& a,
                         const std::vector<Eigen::Vector3d>& b) {
        const Rmse3 r = rmse(a, b);
        put(name, r.aggregate);
        put(name + ".x", r.per_axis.x());
        put(name + ".y", r.per_axis.y());
        put(name + ".z", r.per_axis.z());
        return r.aggregate;
    };

    put_rmse3("rmse.x_m1", log.x_m1, log.x_ref);
    if (log.has_m2) put_rmse3("rmse.x_m2", log.x_m2, log.x_ref);
    const double r_mc = put_rmse3("rmse.x_mc", log.x_mc, log.x_ref);
    const double r_cpf = put_rmse3("rmse.x_cpf", log.x_cpf, log.x_ref);
    const double r_sc = put_rmse3("rmse.x_sc", log.x_sc, log.x_ref);
    put_rmse3("rmse.x_s", log.x_s, log.x_ref);
    put_rmse3("rmse.x_d", log.x_d, log.x_ref);
    put_rmse3("rmse.x_mf", log.x_mf, log.x_ref);
    put_rmse3("rmse.x_mf_vs_x_mc", log.x_mf, log.x_mc);
    put_rmse3("rmse.x_d_vs_x_mc", log.x_d, log.x_mc);
    put_rmse3("rmse.f_hat_vs_f", log.f_hat_se, log.f_se);

    double wm_max = 0.0, wm_sum = 0.0;
    for (const auto& w : log.w_m) {
        wm_max = std::max(wm_max, w.maxCoeff());
        wm_sum += w.mean();
    }
    put("wm_max", wm_max);
    put("wm_mean", log.w_m.empty() ? 0.0 : wm_sum / static_cast<double>(log.w_m.size()));

    std::ostringstream gate;
    if (kind == ScenarioConfig::Kind::DualPilot) {
        const bool ok = r_sc < std::min(r_mc, r_cpf);
        gate << "gate arbitration_beats_both: rmse(x_sc)=" << r_sc
             << " < min(rmse(x_mc)=" << r_mc << ", rmse(x_cpf)=" << r_cpf << ") -> "
             << (ok ? "PASS" : "FAIL");
        rep.gates_passed = rep.gates_passed && ok;
        rep.gate_lines.push_back(gate.str());
    } else {
        const bool ok = r_sc < r_mc;
        gate << "gate arbitration_beats_master: rmse(x_sc)=" << r_sc << " < rmse(x_mc)=" << r_mc
             << " -> " << (ok ? "PASS" : "FAIL");
        rep.gates_passed = rep.gates_passed && ok;
        rep.gate_lines.push_back(gate.str());
    }
    if (master_oriented) {
        const bool ok = wm_max <= 0.5 + 1e-12;
        std::ostringstream g2;
        g2 << "gate wm_within_master_bound: max(w_m)=" << wm_max << " <= 0.5 -> "
           << (ok ? "PASS" : "FAIL");
        rep.gates_passed = rep.gates_passed && ok;
        rep.gate_lines.push_back(g2.str());
    }
    return rep;
}

} // namespace

RunReport report_from_log_auto(const std::string& csv_path) {
    const CsvTable t = read_csv(csv_path);
    const auto kind = t.has_column("x_m2_x") ? ScenarioConfig::Kind::TriplePilotDelay
                                             : ScenarioConfig::Kind::DualPilot;
    return report_from_log(csv_path, kind, false);
}

RunReport report_from_log(const std::string& csv_path, ScenarioConfig::Kind kind,
                          bool master_oriented) {
    const CsvTable t = read_csv(csv_path);
    EpisodeLog log;
    log.t = t.column("t");
    log.x_ref = csv_vec3(t, "x_ref");
    log.x_m1 = csv_vec3(t, "x_m1");
    log.has_m2 = t.has_column("x_m2_x");
    if (log.has_m2) log.x_m2 = csv_vec3(t, "x_m2");
    log.x_mc = csv_vec3(t, "x_mc");
    log.x_d = csv_vec3(t, "x_d");
    log.x_mf = csv_vec3(t, "x_mf");
    log.x_cpf = csv_vec3(t, "x_cpf");
    log.w_m = csv_vec3(t, "w_m");
    log.x_sc = csv_vec3(t, "x_sc");
    log.x_s = csv_vec3(t, "x_s");
    log.f_se = csv_vec3(t, "f_se");
    log.f_hat_se = csv_vec3(t, "f_hat_se");
    return compute_report(log, kind, master_oriented);
}

// ----- ScenarioEngine -----

ScenarioEngine::ScenarioEngine(const ScenarioConfig& cfg, DdpgAgent& agent1, DdpgAgent& agent2,
                               const FuzzyModel* force_model)
    : cfg_(cfg), agent1_(agent1), agent2_(agent2), force_model_(force_model) {
    predict_ahead_ = cfg_.backward_predict_horizon > 0.0
                         ? constant_jerk_transition(cfg_.backward_predict_horizon)
                         : Eigen::Matrix3d::Identity();
    const double omega = 2.0 * M_PI / cfg_.reference.period;
    vel_scale_ = cfg_.s1_vel_scale > 0.0 ? cfg_.s1_vel_scale : cfg_.reference.radius * omega;
    acc_scale_ = cfg_.s1_acc_scale > 0.0 ? cfg_.s1_acc_scale
                                         : cfg_.reference.radius * omega * omega;
    err_scale_ = cfg_.s2_err_scale > 0.0 ? cfg_.s2_err_scale : 1.0;
}

EpisodeLog ScenarioEngine::run_episode(int episode_index, bool train1, bool train2) {
    const std::uint64_t ep = static_cast<std::uint64_t>(episode_index);

    std::vector<ScriptedOperator> masters;
    for (std::size_t k = 0; k < cfg_.masters.size(); ++k) {
        OperatorProfile p = cfg_.masters[k];
        p.seed = derive_seed(p.seed, ep);
        masters.emplace_back(p);
    }
    OperatorProfile cp_profile = cfg_.copilot;
    cp_profile.seed = derive_seed(cp_profile.seed, ep);
    ScriptedOperator copilot(cp_profile);

    ChannelConfig fwd_cfg = cfg_.forward_channel;
    fwd_cfg.seed = derive_seed(fwd_cfg.seed, ep);
    DelayChannel forward(fwd_cfg);
    ChannelConfig back_cfg = cfg_.backward_channel;
    back_cfg.seed = derive_seed(back_cfg.seed, ep);
    DelayChannel backward(back_cfg);

    KalmanBank3 fusion(cfg_.kf_model);
    KalmanBank3 copilot_filter(cfg_.kf_model);
    KalmanBank3 slave_filter(cfg_.kf_model);

    const CartesianState start = circle_reference(cfg_.reference, 0.0);
    SlavePlant plant(cfg_.pid, cfg_.env, start);

    ArbitrationWeights weights =
        cfg_.master_oriented ? ArbitrationWeights::master_oriented() : ArbitrationWeights::balanced();

    CartesianState x_d_held = start;

    // the operators were already tracing the task before the episode window,
    // so the forward channel starts loaded with the pre-episode trajectory
    if (fwd_cfg.base_delay > 0.0) {
        const int pre = static_cast<int>(std::ceil(fwd_cfg.base_delay / cfg_.dt));
        for (int k = pre; k >= 1; --k)
            forward.send(circle_reference(cfg_.reference, -k * cfg_.dt), -k * cfg_.dt);
    }

    EpisodeLog log;
    log.has_m2 = cfg_.masters.size() > 1;

    bool have_prev1 = false, have_prev2 = false;
    std::vector<double> prev_s1, prev_a1, prev_s2, prev_a2;
    double prev_r1 = 0.0, prev_r2 = 0.0;

    for (int i = 0; i < cfg_.steps; ++i) {
        const double t = i * cfg_.dt;
        const CartesianState ref = circle_reference(cfg_.reference, t);

        const CartesianState m1 = masters[0].sample(t);
        CartesianState m2;
        fusion.predict();
        CartesianState x_mc;
        if (masters.size() > 1) {
            m2 = masters[1].sample(t);
            x_mc = fusion.fuse_dual(m1.pos, m2.pos);
        } else {
            x_mc = fusion.correct(m1.pos);
        }

        forward.send(x_mc, t);
        if (const auto delivered = forward.recv_latest(t)) x_d_held = *delivered;
        const CartesianState x_d = x_d_held;

        std::vector<double> s1 = restore_state(x_d);
        for (int k = 0; k < 3; ++k) {
            s1[k] /= vel_scale_;
            s1[k + 3] /= acc_scale_;
        }
        const std::vector<double> a1 = agent1_.act(s1, train1);
        const CartesianState x_mf = apply_restore(x_d, a1);

        const CartesianState cp_raw = copilot.sample(t);
        copilot_filter.predict();
        const CartesianState x_cpf = copilot_filter.correct(cp_raw.pos);

        std::vector<double> s2 = arbitration_state(x_mf, x_cpf, ref);
        for (double& v : s2) v /= err_scale_;
        const std::vector<double> a2 = agent2_.act(s2, train2);
        weights.set(Eigen::Vector3d(a2[0], a2[1], a2[2]));
        const CartesianState x_sc = arbitrate(weights, x_cpf, x_mf);

        const auto [x_s, f_se] = plant.step(x_sc, cfg_.dt);

        backward.send(x_s, t);
        if (const auto delivered = backward.recv_latest(t)) {
            slave_filter.predict();
            slave_filter.correct(delivered->pos);
        } else {
            slave_filter.coast();
        }
        // delay-free slave estimate: extrapolate each axis over the return delay
        CartesianState x_hat_s;
        for (int axis = 0; axis < 3; ++axis) {
            const Eigen::Vector3d ahead = predict_ahead_ * slave_filter.axis(axis).state();
            x_hat_s.pos[axis] = ahead[0];
            x_hat_s.vel[axis] = ahead[1];
            x_hat_s.acc[axis] = ahead[2];
        }
        Eigen::Vector3d f_hat = Eigen::Vector3d::Zero();
        if (force_model_) {
            Eigen::VectorXd feat(6);
            feat << x_hat_s.pos, x_hat_s.vel;
            f_hat = force_model_->predict(feat);
        }

        // rewards: restoration error against the live master command, and the
        // blended command against the task target. Velocity errors score in
        // position units as the displacement they cause over the channel delay.
        const Eigen::Vector3d r1_pos = tracking_reward(Eigen::Vector3d(x_mc.pos - x_mf.pos));
        const double vel_horizon = std::max(cfg_.forward_channel.base_delay, cfg_.dt);
        const Eigen::Vector3d r1_vel =
            tracking_reward(Eigen::Vector3d(vel_horizon * (x_mc.vel - x_mf.vel)));
        const double r1 = (r1_pos.sum() + r1_vel.sum()) / 6.0;
        const double r2 = tracking_reward(Eigen::Vector3d(x_sc.pos - ref.pos)).sum() / 3.0;
        log.return1 += r1;
        log.return2 += r2;

        if (train1) {
            if (have_prev1) {
                agent1_.push({prev_s1, prev_a1, prev_r1, s1});
                for (int k = 0; k < cfg_.train_steps_per_tick; ++k) agent1_.train_step();
            }
            prev_s1 = s1;
            prev_a1 = a1;
            prev_r1 = r1;
            have_prev1 = true;
        }
        if (train2) {
            if (have_prev2) {
                agent2_.push({prev_s2, prev_a2, prev_r2, s2});
                for (int k = 0; k < cfg_.train_steps_per_tick; ++k) agent2_.train_step();
            }
            prev_s2 = s2;
            prev_a2 = a2;
            prev_r2 = r2;
            have_prev2 = true;
        }

        log.t.push_back(t);
        log.x_ref.push_back(ref.pos);
        log.x_m1.push_back(m1.pos);
        if (log.has_m2) log.x_m2.push_back(m2.pos);
        log.x_mc.push_back(x_mc.pos);
        log.x_d.push_back(x_d.pos);
        log.x_mf.push_back(x_mf.pos);
        log.x_cpf.push_back(x_cpf.pos);
        log.w_m.push_back(weights.diag);
        log.x_sc.push_back(x_sc.pos);
        log.x_s.push_back(x_s.pos);
        log.f_se.push_back(f_se);
        log.f_hat_se.push_back(f_hat);
    }
    return log;
}

// ----- training / running -----

void TrainingCurves::write_csv(const std::string& path) const {
    CsvWriter out(path, {"episode", "return1", "return2"});
    for (std::size_t i = 0; i < returns1.size(); ++i)
        out.row({static_cast<double>(i), returns1[i], returns2[i]});
    out.flush();
}

namespace {

void check_finite(const DdpgAgent& agent, const std::string& name, int episode) {
    for (const double v : agent.actor().flatten())
        if (!std::isfinite(v))
            throw std::runtime_error("training diverged: non-finite " + name +
                                     " actor weight after episode " + std::to_string(episode));
    for (const double v : agent.critic().flatten())
        if (!std::isfinite(v))
            throw std::runtime_error("training diverged: non-finite " + name +
                                     " critic weight after episode " + std::to_string(episode));
}

} // namespace

TrainingCurves train_agents(const ScenarioConfig& cfg, DdpgAgent& agent1, DdpgAgent& agent2,
                            const std::string& out_dir) {
    ScenarioEngine engine(cfg, agent1, agent2);
    TrainingCurves curves;
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const EpisodeLog log = engine.run_episode(ep, true, false);
        curves.returns1.push_back(log.return1);
        check_finite(agent1, "agent1", ep);
    }
    agent1.finalize_policy();
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const EpisodeLog log = engine.run_episode(cfg.episodes + ep, false, true);
        curves.returns2.push_back(log.return2);
        check_finite(agent2, "agent2", ep);
    }
    agent2.finalize_policy();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        agent1.save(out_dir + "/ddpg1.ckpt");
        agent2.save(out_dir + "/ddpg2.ckpt");
        curves.write_csv(out_dir + "/training_curve.csv");
    }
    return curves;
}

RunReport run_scenario(const ScenarioConfig& cfg, DdpgAgent& agent1, DdpgAgent& agent2,
                       const FuzzyModel* force_model, const std::string& out_dir,
                       const std::string& config_hash) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioEngine engine(cfg, agent1, agent2, force_model);
    // the evaluation episode index sits past the training range, so its
    // operator noise is held out from everything the agents saw
    const EpisodeLog log = engine.run_episode(2 * cfg.episodes, false, false);

    RunReport rep;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::string ticks = out_dir + "/ticks.csv";
        log.write_csv(ticks);
        rep = report_from_log(ticks, cfg.kind, cfg.master_oriented);
        rep.config_hash = config_hash;
        rep.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.write_csv(out_dir + "/report.csv");
    } else {
        rep = compute_report(log, cfg.kind, cfg.master_oriented);
        rep.config_hash = config_hash;
        rep.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return rep;
}

// ----- force estimation scenario -----

ForceScenarioConfig ForceScenarioConfig::from_config(const Config& cfg) {
    ForceScenarioConfig fc;
    fc.classes = cfg.get_int("force.classes", 3);
    fc.stiffness.clear();
    fc.damping.clear();
    for (int c = 1; c <= fc.classes; ++c) {
        const std::string prefix = "force.class" + std::to_string(c);
        const double defaults_k[] = {200.0, 500.0, 1000.0};
        const double defaults_c[] = {5.0, 10.0, 20.0};
        fc.stiffness.push_back(
            cfg.get_double(prefix + ".stiffness", c <= 3 ? defaults_k[c - 1] : 100.0 * c));
        fc.damping.push_back(
            cfg.get_double(prefix + ".damping", c <= 3 ? defaults_c[c - 1] : 5.0 * c));
    }
    fc.trials = cfg.get_int("force.trials", 50);
    fc.train_trials = cfg.get_int("force.train_trials", 3);
    fc.samples_per_trial = cfg.get_int("force.samples_per_trial", 200);
    fc.dt = cfg.get_double("force.dt", 0.01);
    fc.settle_steps = cfg.get_int("force.settle_steps", 50);
    fc.state_noise_std = cfg.get_double("force.state_noise_std", 1e-4);
    fc.force_noise_std = cfg.get_double("force.force_noise_std", 0.0);
    fc.sweep_radius = cfg.get_double("force.sweep_radius", 0.0);
    fc.seed = cfg.get_u64("force.seed", cfg.get_u64("seed", 1));
    fc.pid.kp = cfg.get_double("pid.kp", 100.0);
    fc.pid.ki = cfg.get_double("pid.ki", 0.0);
    fc.pid.kd = cfg.get_double("pid.kd", 20.0);
    fc.kf_model = constant_jerk_model(cfg.get_double("kalman.dt", fc.dt),
                                      cfg.get_double("kalman.jerk_std", 30.0),
                                      cfg.get_double("kalman.r", 1e-8));
    fc.fuzzy.m = cfg.get_double("fuzzy.m", 2.0);
    fc.fuzzy.fou_delta = cfg.get_double("fuzzy.fou_delta", 0.1);
    fc.fuzzy.b_lower = cfg.get_double("fuzzy.b_lower", 0.5);
    fc.fuzzy.b_upper = cfg.get_double("fuzzy.b_upper", 0.5);
    fc.fuzzy.sigma = cfg.get_double("fuzzy.sigma", 1.0);
    fc.fuzzy.cluster_radius = cfg.get_double("fuzzy.cluster_radius", 1.0);
    fc.fuzzy.update_gate = cfg.get_double("fuzzy.update_gate", 0.05);
    fc.fuzzy.s0 = cfg.get_double("fuzzy.s0", 1e6);
    fc.validate();
    return fc;
}

void ForceScenarioConfig::validate() const {
    if (classes < 2) throw std::invalid_argument("force: need at least two classes");
    if (static_cast<int>(stiffness.size()) != classes ||
        static_cast<int>(damping.size()) != classes)
        throw std::invalid_argument("force: per-class parameters missing");
    if (train_trials < 1 || train_trials >= trials)
        throw std::invalid_argument("force: train_trials must be in [1, trials)");
    if (samples_per_trial < 10) throw std::invalid_argument("force: too few samples per trial");
    fuzzy.validate();
}

ForceDataset generate_force_dataset(const ForceScenarioConfig& cfg) {
    ForceDataset data;
    const int rows = cfg.classes * cfg.trials * cfg.samples_per_trial;
    data.states.resize(rows, 6);
    data.forces.resize(rows, 3);
    data.labels.reserve(rows);
    data.trial_ids.reserve(rows);

    int row = 0;
    int trial_id = 0;
    for (int c = 0; c < cfg.classes; ++c) {
        for (int k = 0; k < cfg.trials; ++k, ++trial_id) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(c) * 1000 + k));
            // a standardized press depth keeps the achieved penetration a
            // clean function of the material, while varied tones decorrelate
            // depth and rate within each trial
            const double depth0 = 0.025;
            const double amp = 0.004;
            const double amp2 = 0.002;
            const double freq = rng.uniform(0.3, 0.9);
            const double freq2 = rng.uniform(1.3, 2.4);
            const double phase = rng.uniform(0.0, 2.0 * M_PI);
            const double phase2 = rng.uniform(0.0, 2.0 * M_PI);
            const double xy_radius = cfg.sweep_radius > 0.0 ? rng.uniform(0.5 * cfg.sweep_radius, cfg.sweep_radius) : 0.0;
            const double xy_freq = rng.uniform(0.1, 0.5);

            EnvironmentModel env;
            env.stiffness = cfg.stiffness[c];
            env.damping = cfg.damping[c];
            env.normal = Eigen::Vector3d(0.0, 0.0, 1.0);
            env.plane_offset = 0.0;

            // press trajectory: a two-tone penetration oscillation along -z plus
            // a gentle planar sweep, always inside the material; the second
            // tone decorrelates depth and depth rate across the trial
            auto command = [&](double t) {
                CartesianState cmd;
                const double w1 = 2.0 * M_PI * freq;
                const double w2 = 2.0 * M_PI * freq2;
                const double wxy = 2.0 * M_PI * xy_freq;
                const double dip = amp * 0.5 * (1.0 - std::cos(w1 * t + phase)) +
                                   amp2 * 0.5 * (1.0 - std::cos(w2 * t + phase2));
                const double dip_rate = amp * 0.5 * w1 * std::sin(w1 * t + phase) +
                                        amp2 * 0.5 * w2 * std::sin(w2 * t + phase2);
                cmd.pos = Eigen::Vector3d(xy_radius * std::cos(wxy * t),
                                          xy_radius * std::sin(wxy * t), -depth0 - dip);
                cmd.vel = Eigen::Vector3d(-xy_radius * wxy * std::sin(wxy * t),
                                          xy_radius * wxy * std::cos(wxy * t), -dip_rate);
                return cmd;
            };

            SlavePlant plant(cfg.pid, env, command(0.0));
            KalmanBank3 filter(cfg.kf_model);

            const int total = static_cast<int>(cfg.settle_steps) + cfg.samples_per_trial;
            for (int i = 0; i < total; ++i) {
                const double t = i * cfg.dt;
                const auto [x_s, f_se] = plant.step(command(t), cfg.dt);
                Eigen::Vector3d meas = x_s.pos;
                if (cfg.state_noise_std > 0.0)
                    meas += Eigen::Vector3d(rng.gaussian(0.0, cfg.state_noise_std),
                                            rng.gaussian(0.0, cfg.state_noise_std),
                                            rng.gaussian(0.0, cfg.state_noise_std));
                filter.predict();
                const CartesianState x_hat = filter.correct(meas);
                if (i < cfg.settle_steps) continue;

                // estimated position and velocity carry the contact law; the
                // filter's acceleration block is trajectory-specific and does
                // not transfer across trials
                Eigen::VectorXd feat(6);
                feat << x_hat.pos, x_hat.vel;
                Eigen::Vector3d f = f_se;
                if (cfg.force_noise_std > 0.0)
                    f += Eigen::Vector3d(rng.gaussian(0.0, cfg.force_noise_std),
                                         rng.gaussian(0.0, cfg.force_noise_std),
                                         rng.gaussian(0.0, cfg.force_noise_std));
                data.states.row(row) = feat.transpose();
                data.forces.row(row) = f.transpose();
                data.labels.push_back(c);
                data.trial_ids.push_back(trial_id);
                ++row;
            }
        }
    }
    return data;
}

void split_force_dataset(const ForceScenarioConfig& cfg, const ForceDataset& all,
                         ForceDataset& train, ForceDataset& test) {
    std::set<int> train_trials;
    for (int c = 0; c < cfg.classes; ++c) {
        std::vector<int> ids(cfg.trials);
        for (int k = 0; k < cfg.trials; ++k) ids[k] = c * cfg.trials + k;
        Rng rng(derive_seed(cfg.seed, 777 + static_cast<std::uint64_t>(c)));
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.integer(ids.size() - i));
            std::swap(ids[i], ids[j]);
        }
        for (int k = 0; k < cfg.train_trials; ++k) train_trials.insert(ids[k]);
    }

    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < static_cast<int>(all.trial_ids.size()); ++i) {
        if (train_trials.count(all.trial_ids[i]))
            train_rows.push_back(i);
        else
            test_rows.push_back(i);
    }
    auto gather = [&all](const std::vector<int>& rows, ForceDataset& out) {
        out.states.resize(rows.size(), all.states.cols());
        out.forces.resize(rows.size(), all.forces.cols());
        out.labels.clear();
        out.trial_ids.clear();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.states.row(i) = all.states.row(rows[i]);
            out.forces.row(i) = all.forces.row(rows[i]);
            out.labels.push_back(all.labels[rows[i]]);
            out.trial_ids.push_back(all.trial_ids[rows[i]]);
        }
    };
    gather(train_rows, train);
    gather(test_rows, test);
}

FuzzyModel fit_force_model(const ForceScenarioConfig& cfg) {
    const ForceDataset all = generate_force_dataset(cfg);
    ForceDataset train, test;
    split_force_dataset(cfg, all, train, test);
    return FuzzyModel::fit(train.states, train.forces, train.labels, cfg.fuzzy);
}

std::string ForceEvalReport::summary() const {
    std::ostringstream ss;
    for (const auto& c : classes)
        ss << "class " << c.label << ": rmse = " << c.rmse << ", range = " << c.force_range
           << ", ratio = " << c.ratio << '\n';
    ss << (pass ? "force gate: PASS" : "force gate: FAIL") << '\n';
    return ss.str();
}

ForceEvalReport eval_force_model(const ForceScenarioConfig& cfg, const FuzzyModel& model) {
    const ForceDataset all = generate_force_dataset(cfg);
    ForceDataset train, test;
    split_force_dataset(cfg, all, train, test);

    ForceEvalReport rep;
    for (int c = 0; c < cfg.classes; ++c) {
        double se = 0.0;
        int n = 0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(test.labels.size()); ++i) {
            if (test.labels[i] != c) continue;
            const Eigen::VectorXd pred = model.predict(test.states.row(i).transpose());
            const Eigen::VectorXd err = pred - test.forces.row(i).transpose();
            se += err.squaredNorm();
            n += 3;
            lo = std::min(lo, test.forces.row(i).minCoeff());
            hi = std::max(hi, test.forces.row(i).maxCoeff());
        }
        ForceEvalReport::PerClass pc;
        pc.label = c;
        pc.rmse = n > 0 ? std::sqrt(se / n) : 0.0;
        pc.force_range = hi - lo;
        pc.ratio = pc.force_range > 0.0 ? pc.rmse / pc.force_range : 0.0;
        rep.pass = rep.pass && pc.ratio < 0.05;
        rep.classes.push_back(pc);
    }
    return rep;
}

} // namespace multipilot
