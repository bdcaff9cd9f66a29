#include "multipilot/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multipilot {

namespace {

std::vector<int> full_widths(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> w;
    w.push_back(in);
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

} // namespace

void DdpgConfig::validate() const {
    if (state_dim <= 0 || action_dim <= 0)
        throw std::invalid_argument("ddpg: state_dim and action_dim must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("ddpg: gamma must be in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("ddpg: tau must be in (0,1]");
    if (minibatch <= 0) throw std::invalid_argument("ddpg: minibatch must be positive");
    if (buffer_capacity == 0) throw std::invalid_argument("ddpg: buffer capacity must be positive");
    if (noise_var < 0.0 || noise_decay < 0.0 || noise_decay >= 1.0)
        throw std::invalid_argument("ddpg: bad noise settings");
    if (!(action_lo < action_hi)) throw std::invalid_argument("ddpg: action bounds inverted");
}

DdpgAgent::DdpgAgent(DdpgConfig cfg)
    : cfg_(std::move(cfg)),
      actor_(full_widths(cfg_.state_dim, cfg_.actor_hidden, cfg_.action_dim), Head::BoundedTanh,
             cfg_.action_lo, cfg_.action_hi),
      critic_(full_widths(cfg_.state_dim + cfg_.action_dim, cfg_.critic_hidden, 1), Head::Linear),
      rng_(cfg_.seed),
      noise_var_(cfg_.noise_var) {
    cfg_.validate();
    actor_.init_uniform(rng_, cfg_.final_layer_init);
    critic_.init_uniform(rng_, cfg_.final_layer_init);
    actor_target_ = actor_;
    critic_target_ = critic_;
    actor_avg_ = actor_;
    if (cfg_.twin_critic) {
        critic2_ = Mlp(full_widths(cfg_.state_dim + cfg_.action_dim, cfg_.critic_hidden, 1),
                       Head::Linear);
        critic2_.init_uniform(rng_, cfg_.final_layer_init);
        critic2_target_ = critic2_;
        critic2_opt_ = critic2_.make_adam_state();
    }
    actor_opt_ = actor_.make_adam_state();
    critic_opt_ = critic_.make_adam_state();
    buffer_.reserve(std::min<std::size_t>(cfg_.buffer_capacity, 1 << 16));
}

std::vector<double> DdpgAgent::critic_input(std::span<const double> s,
                                            std::span<const double> a) const {
    if (static_cast<int>(s.size()) != cfg_.state_dim)
        throw std::invalid_argument("ddpg: state dimension mismatch");
    if (static_cast<int>(a.size()) != cfg_.action_dim)
        throw std::invalid_argument("ddpg: action dimension mismatch");
    std::vector<double> sa;
    sa.reserve(s.size() + a.size());
    sa.insert(sa.end(), s.begin(), s.end());
    for (const double v : a) sa.push_back(v / cfg_.action_input_scale);
    return sa;
}

std::vector<double> DdpgAgent::act(std::span<const double> s, bool explore) {
    if (static_cast<int>(s.size()) != cfg_.state_dim)
        throw std::invalid_argument("ddpg: state dimension mismatch");
    if (explore) {
        const bool warm = explore_calls_ < cfg_.random_steps;
        if (warm || (cfg_.random_epsilon > 0.0 && rng_.uniform() < cfg_.random_epsilon)) {
            ++explore_calls_;
            std::vector<double> a(cfg_.action_dim);
            for (double& v : a) v = rng_.uniform(cfg_.action_lo, cfg_.action_hi);
            return a;
        }
    }
    std::vector<double> a = actor_.forward(s);
    if (explore) {
        ++explore_calls_;
        const double stddev = std::sqrt(noise_var_);
        for (double& v : a) {
            v += rng_.gaussian(0.0, stddev);
            v = std::clamp(v, cfg_.action_lo, cfg_.action_hi);
        }
        noise_var_ *= (1.0 - cfg_.noise_decay);
    }
    return a;
}

double DdpgAgent::critic_value(std::span<const double> s, std::span<const double> a) const {
    return critic_.forward(critic_input(s, a))[0];
}

void DdpgAgent::push(Transition t) {
    if (static_cast<int>(t.s.size()) != cfg_.state_dim ||
        static_cast<int>(t.s_next.size()) != cfg_.state_dim ||
        static_cast<int>(t.a.size()) != cfg_.action_dim)
        throw std::invalid_argument("ddpg: transition dimension mismatch");
    if (buffer_.size() < cfg_.buffer_capacity) {
        buffer_.push_back(std::move(t));
    } else {
        buffer_[buffer_head_] = std::move(t); // FIFO eviction
        buffer_head_ = (buffer_head_ + 1) % cfg_.buffer_capacity;
    }
}

std::vector<Transition> DdpgAgent::sample(std::size_t n) {
    if (buffer_.empty()) throw std::runtime_error("ddpg: sample from empty buffer");
    const std::size_t k = std::min(n, buffer_.size());
    std::vector<std::size_t> idx(buffer_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    // partial Fisher-Yates: first k entries are a uniform draw without replacement
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng_.integer(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<Transition> batch;
    batch.reserve(k);
    for (std::size_t i = 0; i < k; ++i) batch.push_back(buffer_[idx[i]]);
    return batch;
}

namespace {
double mse_loss_and_gradient(const Mlp& critic, const std::vector<std::vector<double>>& inputs,
                             const std::vector<double>& targets, Mlp::Grad& g) {
    const double inv_n = 1.0 / static_cast<double>(inputs.size());
    double loss = 0.0;
    Mlp::Workspace ws;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const double q = critic.forward(inputs[i], ws)[0];
        const double err = q - targets[i];
        loss += err * err * inv_n;
        const double dLdq[1] = {2.0 * err * inv_n};
        critic.backward(ws, dLdq, g);
    }
    return loss;
}
} // namespace

void DdpgAgent::bootstrap_targets(const std::vector<Transition>& batch,
                                  std::vector<std::vector<double>>& inputs,
                                  std::vector<double>& targets) const {
    inputs.clear();
    targets.clear();
    inputs.reserve(batch.size());
    targets.reserve(batch.size());
    for (const Transition& t : batch) {
        // bootstrapped target from the frozen target copies; with a twin the
        // smaller of the two estimates feeds the target
        const std::vector<double> a_next = actor_target_.forward(t.s_next);
        const std::vector<double> sa_next = critic_input(t.s_next, a_next);
        double q_next = critic_target_.forward(sa_next)[0];
        if (cfg_.twin_critic) q_next = std::min(q_next, critic2_target_.forward(sa_next)[0]);
        const double r = cfg_.center_rewards ? t.r - reward_baseline_ : t.r;
        targets.push_back(r + cfg_.gamma * q_next);
        inputs.push_back(critic_input(t.s, t.a));
    }
}

double DdpgAgent::critic_loss_and_gradient(const std::vector<Transition>& batch,
                                           Mlp::Grad& g) const {
    if (batch.empty()) throw std::invalid_argument("ddpg: empty batch");
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    bootstrap_targets(batch, inputs, targets);
    return mse_loss_and_gradient(critic_, inputs, targets, g);
}

double DdpgAgent::critic2_loss_and_gradient(const std::vector<Transition>& batch,
                                            Mlp::Grad& g) const {
    if (batch.empty()) throw std::invalid_argument("ddpg: empty batch");
    if (!cfg_.twin_critic) throw std::logic_error("ddpg: twin critic disabled");
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    bootstrap_targets(batch, inputs, targets);
    return mse_loss_and_gradient(critic2_, inputs, targets, g);
}

double DdpgAgent::actor_objective_and_gradient(const std::vector<Transition>& batch,
                                               Mlp::Grad& g) const {
    if (batch.empty()) throw std::invalid_argument("ddpg: empty batch");
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double mean_q = 0.0;
    Mlp::Workspace ws_a, ws_c;
    Mlp::Grad unused = critic_.make_grad();
    for (const Transition& t : batch) {
        const std::vector<double> a = actor_.forward(t.s, ws_a);
        const double q = critic_.forward(critic_input(t.s, a), ws_c)[0];
        mean_q += q * inv_n;
        const double dJdq[1] = {inv_n};
        const std::vector<double> d_input = critic_.backward(ws_c, dJdq, unused);
        // chain through the action slice of the critic input
        std::vector<double> dJda(d_input.begin() + cfg_.state_dim, d_input.end());
        for (double& v : dJda) v /= cfg_.action_input_scale; // undo the input scaling
        actor_.backward(ws_a, dJda, g);
    }
    return mean_q;
}

std::pair<double, double> DdpgAgent::train_step(const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("ddpg: empty batch");

    if (cfg_.center_rewards) {
        double mean_r = 0.0;
        for (const Transition& t : batch) mean_r += t.r;
        mean_r /= static_cast<double>(batch.size());
        if (!baseline_started_) {
            reward_baseline_ = mean_r;
            baseline_started_ = true;
        } else {
            reward_baseline_ += cfg_.baseline_rate * (mean_r - reward_baseline_);
        }
    }

    double lr_scale = 1.0;
    if (cfg_.lr_decay_steps > 0)
        lr_scale = std::max(0.05, 1.0 - static_cast<double>(train_calls_) /
                                       static_cast<double>(cfg_.lr_decay_steps));

    Mlp::Grad gc = critic_.make_grad();
    const double critic_loss = critic_loss_and_gradient(batch, gc);
    if (cfg_.optimizer == OptimizerKind::Adam)
        critic_.apply_adam(gc, critic_opt_, lr_scale * cfg_.critic_lr, cfg_.grad_clip);
    else
        critic_.apply_sgd(gc, lr_scale * cfg_.critic_lr, cfg_.grad_clip);
    if (cfg_.twin_critic) {
        Mlp::Grad gc2 = critic2_.make_grad();
        critic2_loss_and_gradient(batch, gc2);
        if (cfg_.optimizer == OptimizerKind::Adam)
            critic2_.apply_adam(gc2, critic2_opt_, lr_scale * cfg_.critic_lr, cfg_.grad_clip);
        else
            critic2_.apply_sgd(gc2, lr_scale * cfg_.critic_lr, cfg_.grad_clip);
    }

    ++train_calls_;
    Mlp::Grad ga = actor_.make_grad();
    const double mean_q = actor_objective_and_gradient(batch, ga);
    const bool actor_due = train_calls_ > cfg_.actor_warmup &&
                           (cfg_.actor_update_period <= 1 ||
                            train_calls_ % cfg_.actor_update_period == 0);
    if (actor_due) {
        if (cfg_.optimizer == OptimizerKind::Adam)
            actor_.apply_adam(ga, actor_opt_, lr_scale * cfg_.actor_lr, cfg_.grad_clip,
                              /*ascend=*/true);
        else
            actor_.apply_sgd(ga, lr_scale * cfg_.actor_lr, cfg_.grad_clip, /*ascend=*/true);
        if (cfg_.actor_weight_decay > 0.0) {
            const double keep = 1.0 - cfg_.actor_weight_decay;
            for (std::size_t l = 0; l < actor_.layer_count(); ++l) {
                for (double& w : actor_.weights(l)) w *= keep;
                for (double& b : actor_.biases(l)) b *= keep;
            }
        }
        actor_target_.soft_update_from(actor_, cfg_.tau);
        if (cfg_.policy_average_rate > 0.0)
            actor_avg_.soft_update_from(actor_, cfg_.policy_average_rate);
    }
    critic_target_.soft_update_from(critic_, cfg_.tau);
    if (cfg_.twin_critic) critic2_target_.soft_update_from(critic2_, cfg_.tau);
    return {critic_loss, mean_q};
}

std::pair<double, double> DdpgAgent::train_step() {
    const std::size_t n = std::min<std::size_t>(buffer_.size(),
                                                static_cast<std::size_t>(cfg_.minibatch));
    return train_step(sample(n));
}

void DdpgAgent::finalize_policy() {
    if (cfg_.policy_average_rate <= 0.0) return;
    actor_ = actor_avg_;
    actor_target_ = actor_avg_;
}

void DdpgAgent::save(Checkpoint& ck) const {
    ck.begin_section("agent");
    ck.put("state_dim", static_cast<double>(cfg_.state_dim));
    ck.put("action_dim", static_cast<double>(cfg_.action_dim));
    ck.put("action_lo", cfg_.action_lo);
    ck.put("action_hi", cfg_.action_hi);
    ck.put("gamma", cfg_.gamma);
    ck.put("minibatch", static_cast<double>(cfg_.minibatch));
    ck.put("buffer_capacity", static_cast<double>(cfg_.buffer_capacity));
    ck.put("noise_var", cfg_.noise_var);
    ck.put("noise_var_current", noise_var_);
    ck.put("noise_decay", cfg_.noise_decay);
    ck.put("tau", cfg_.tau);
    ck.put("actor_lr", cfg_.actor_lr);
    ck.put("critic_lr", cfg_.critic_lr);
    ck.put("grad_clip", cfg_.grad_clip);
    ck.put("optimizer", std::string(cfg_.optimizer == OptimizerKind::Adam ? "adam" : "sgd"));
    ck.put("actor_warmup", static_cast<double>(cfg_.actor_warmup));
    ck.put("center_rewards", cfg_.center_rewards ? 1.0 : 0.0);
    ck.put("baseline_rate", cfg_.baseline_rate);
    ck.put("final_layer_init", cfg_.final_layer_init);
    ck.put("actor_update_period", static_cast<double>(cfg_.actor_update_period));
    ck.put("actor_weight_decay", cfg_.actor_weight_decay);
    ck.put("action_input_scale", cfg_.action_input_scale);
    ck.put("lr_decay_steps", static_cast<double>(cfg_.lr_decay_steps));
    ck.put("policy_average_rate", cfg_.policy_average_rate);
    ck.put("twin_critic", cfg_.twin_critic ? 1.0 : 0.0);
    ck.put("random_steps", static_cast<double>(cfg_.random_steps));
    ck.put("random_epsilon", cfg_.random_epsilon);
    ck.put("reward_baseline", reward_baseline_);
    ck.put("seed", static_cast<double>(cfg_.seed));
    ck.put_ints("critic_hidden", cfg_.critic_hidden);
    ck.put_ints("actor_hidden", cfg_.actor_hidden);
    actor_.save(ck, "actor");
    critic_.save(ck, "critic");
    actor_target_.save(ck, "actor_target");
    critic_target_.save(ck, "critic_target");
    if (cfg_.twin_critic) {
        critic2_.save(ck, "critic2");
        critic2_target_.save(ck, "critic2_target");
    }
}

void DdpgAgent::save(const std::string& path) const {
    Checkpoint ck;
    save(ck);
    ck.save(path);
}

DdpgAgent DdpgAgent::load(const Checkpoint& ck) {
    DdpgConfig cfg;
    cfg.state_dim = static_cast<int>(ck.get_scalar("agent", "state_dim"));
    cfg.action_dim = static_cast<int>(ck.get_scalar("agent", "action_dim"));
    cfg.action_lo = ck.get_scalar("agent", "action_lo");
    cfg.action_hi = ck.get_scalar("agent", "action_hi");
    cfg.gamma = ck.get_scalar("agent", "gamma");
    cfg.minibatch = static_cast<int>(ck.get_scalar("agent", "minibatch"));
    cfg.buffer_capacity = static_cast<std::size_t>(ck.get_scalar("agent", "buffer_capacity"));
    cfg.noise_var = ck.get_scalar("agent", "noise_var");
    cfg.noise_decay = ck.get_scalar("agent", "noise_decay");
    cfg.tau = ck.get_scalar("agent", "tau");
    cfg.actor_lr = ck.get_scalar("agent", "actor_lr");
    cfg.critic_lr = ck.get_scalar("agent", "critic_lr");
    cfg.grad_clip = ck.get_scalar("agent", "grad_clip");
    cfg.optimizer =
        ck.get_string("agent", "optimizer") == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
    cfg.actor_warmup = static_cast<int>(ck.get_scalar("agent", "actor_warmup"));
    cfg.center_rewards = ck.get_scalar("agent", "center_rewards") != 0.0;
    cfg.baseline_rate = ck.get_scalar("agent", "baseline_rate");
    cfg.final_layer_init = ck.get_scalar("agent", "final_layer_init");
    cfg.actor_update_period = static_cast<int>(ck.get_scalar("agent", "actor_update_period"));
    cfg.actor_weight_decay = ck.get_scalar("agent", "actor_weight_decay");
    cfg.action_input_scale = ck.get_scalar("agent", "action_input_scale");
    cfg.lr_decay_steps = static_cast<long>(ck.get_scalar("agent", "lr_decay_steps"));
    cfg.policy_average_rate = ck.get_scalar("agent", "policy_average_rate");
    cfg.twin_critic = ck.get_scalar("agent", "twin_critic") != 0.0;
    cfg.random_steps = static_cast<long>(ck.get_scalar("agent", "random_steps"));
    cfg.random_epsilon = ck.get_scalar("agent", "random_epsilon");
    cfg.seed = static_cast<std::uint64_t>(ck.get_scalar("agent", "seed"));
    cfg.critic_hidden = ck.get_ints("agent", "critic_hidden");
    cfg.actor_hidden = ck.get_ints("agent", "actor_hidden");
    DdpgAgent agent(cfg);
    agent.actor_ = Mlp::load(ck, "actor");
    agent.actor_avg_ = agent.actor_;
    agent.critic_ = Mlp::load(ck, "critic");
    agent.actor_target_ = Mlp::load(ck, "actor_target");
    agent.critic_target_ = Mlp::load(ck, "critic_target");
    if (cfg.twin_critic) {
        agent.critic2_ = Mlp::load(ck, "critic2");
        agent.critic2_target_ = Mlp::load(ck, "critic2_target");
    }
    agent.noise_var_ = ck.get_scalar("agent", "noise_var_current");
    agent.reward_baseline_ = ck.get_scalar("agent", "reward_baseline");
    agent.baseline_started_ = true;
    return agent;
}

DdpgAgent DdpgAgent::load_file(const std::string& path) {
    return load(Checkpoint::load(path));
}

} // namespace multipilot
