#pragma once

#include "multipilot/checkpoint.hpp"
#include "multipilot/mlp.hpp"
#include "multipilot/rng.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace multipilot {

struct Transition {
    std::vector<double> s;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> s_next;
};

enum class OptimizerKind { Adam, Sgd };

struct DdpgConfig {
    int state_dim = 0;
    int action_dim = 0;
    std::vector<int> critic_hidden{5, 5, 5, 2};
    std::vector<int> actor_hidden{3};
    double action_lo = -1.0;
    double action_hi = 1.0;
    double gamma = 0.99;
    int minibatch = 100;
    std::size_t buffer_capacity = 10000;
    double noise_var = 0.01;    // exploration noise variance
    double noise_decay = 1e-5;  // multiplicative variance decay per explore step
    double tau = 1e-3;          // target soft-update rate
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double grad_clip = 1.0;
    // Adam by default: with plain SGD the narrow bootstrapped critic loses its
    // ReLU layers to the drifting target mean and the policy freezes.
    OptimizerKind optimizer = OptimizerKind::Adam;
    // Actor updates start this many train calls in, once the critic's
    // action-gradient means something; 0 trains both from the first call.
    int actor_warmup = 0;
    // Subtract a running reward baseline inside the bootstrap target. Shifts
    // Q by a constant, so action preferences are untouched, but it stops the
    // target mean from dragging the narrow critic's ReLU layers dead.
    bool center_rewards = true;
    double baseline_rate = 0.01;
    // output layers start tiny so the policy opens at its bound midpoint and
    // the critic near zero
    double final_layer_init = 3e-3;
    // actor updates run every k-th train call on a critic that has seen k
    // refits, and a light decoupled decay keeps the policy off its rails
    int actor_update_period = 1;
    double actor_weight_decay = 0.0;
    // actions are divided by this inside the critic input, so a policy whose
    // useful range is a small slice of the bounds still spans unit scale
    double action_input_scale = 1.0;
    // linear learning-rate decay horizon in train calls (0 = constant rates);
    // rates floor at 5% so late training anneals instead of stopping
    long lr_decay_steps = 0;
    // Polyak-averaged policy extraction: a slow EMA of the actor tracks the
    // average of its wander around the optimum, and finalize_policy() makes
    // that average the deployed policy. 0 disables it.
    double policy_average_rate = 0.0;
    // clipped double-Q: a second critic and min-target bootstrap suppress the
    // overestimation spikes that drag the policy into over-corrections
    bool twin_critic = false;
    // explore steps drawn uniformly from the action box before the policy
    // takes over, seeding the replay buffer with full-range coverage
    long random_steps = 0;
    // after that, this fraction of explore steps stays uniform so the critic
    // keeps seeing the whole action range instead of extrapolating stale data
    double random_epsilon = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Deterministic-policy actor-critic with target copies and a FIFO replay
// buffer. Both networks are trained by plain SGD with global gradient-norm
// clipping; the actor ascends the mean critic value of its own actions.
class DdpgAgent {
  public:
    explicit DdpgAgent(DdpgConfig cfg);

    // Policy action for state s. With explore set, adds Gaussian noise of the
    // current variance, clamps to the action bounds and decays the variance.
    std::vector<double> act(std::span<const double> s, bool explore);

    double critic_value(std::span<const double> s, std::span<const double> a) const;

    void push(Transition t);
    std::vector<Transition> sample(std::size_t n); // uniform, without replacement
    std::size_t buffer_size() const { return buffer_.size(); }

    // One update on the given batch; returns (critic mse loss, mean Q of the
    // actor's actions) evaluated before the respective updates.
    std::pair<double, double> train_step(const std::vector<Transition>& batch);

    // Convenience: sample a minibatch (whole buffer while warming up) and train.
    std::pair<double, double> train_step();

    // Swap the averaged policy in as the deployed actor (no-op when averaging
    // is off). Called once when training completes.
    void finalize_policy();

    // Objective evaluations with analytic gradients; train_step is built on
    // these, so gradient tests exercise the real update path.
    double critic_loss_and_gradient(const std::vector<Transition>& batch, Mlp::Grad& g) const;
    double critic2_loss_and_gradient(const std::vector<Transition>& batch, Mlp::Grad& g) const;
    double actor_objective_and_gradient(const std::vector<Transition>& batch, Mlp::Grad& g) const;

    double noise_variance() const { return noise_var_; }
    double reward_baseline() const { return reward_baseline_; }
    const DdpgConfig& config() const { return cfg_; }

    Mlp& actor() { return actor_; }
    Mlp& critic() { return critic_; }
    Mlp& actor_target() { return actor_target_; }
    Mlp& critic_target() { return critic_target_; }
    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }

    void save(Checkpoint& ck) const;
    void save(const std::string& path) const;
    static DdpgAgent load(const Checkpoint& ck);
    static DdpgAgent load_file(const std::string& path);

  private:
    std::vector<double> critic_input(std::span<const double> s, std::span<const double> a) const;
    void bootstrap_targets(const std::vector<Transition>& batch,
                           std::vector<std::vector<double>>& inputs,
                           std::vector<double>& targets) const;

    DdpgConfig cfg_;
    Mlp actor_, critic_, actor_target_, critic_target_, actor_avg_;
    Mlp critic2_, critic2_target_;
    Mlp::AdamState actor_opt_, critic_opt_, critic2_opt_;
    Rng rng_;
    double noise_var_ = 0.0;

    std::vector<Transition> buffer_; // ring
    std::size_t buffer_head_ = 0;
    long train_calls_ = 0;
    long explore_calls_ = 0;
    double reward_baseline_ = 0.0;
    bool baseline_started_ = false;
};

} // namespace multipilot
