#pragma once

#include "multipilot/checkpoint.hpp"
#include "multipilot/rng.hpp"

#include <span>
#include <string>
#include <vector>

namespace multipilot {

enum class Head { Linear, BoundedTanh };

// Dense ReLU network with manual backpropagation. The output layer is either
// linear or a tanh squashed into [lo, hi]; a bounded head keeps every output
// strictly inside its interval.
class Mlp {
  public:
    struct Grad {
        std::vector<std::vector<double>> w;
        std::vector<std::vector<double>> b;

        void zero();
        void scale(double s);
        double norm() const;
    };

    struct Workspace {
        std::vector<std::vector<double>> act; // act[0] = input, act[L] = output
        std::vector<std::vector<double>> pre; // pre-activations per layer
    };

    Mlp() = default;
    Mlp(std::vector<int> widths, Head head = Head::Linear, double lo = -1.0, double hi = 1.0);

    // U(+-1/sqrt(fan_in)) per layer; hidden biases get a small positive
    // margin. final_scale >= 0 initializes the output layer at U(+-final_scale)
    // instead, so a policy head starts at its bound midpoint.
    void init_uniform(Rng& rng, double final_scale = -1.0);

    int input_dim() const { return widths_.front(); }
    int output_dim() const { return widths_.back(); }
    const std::vector<int>& widths() const { return widths_; }
    Head head() const { return head_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> forward(std::span<const double> x, Workspace& ws) const;

    // Backpropagate dL/dy through the cached forward pass; gradients are
    // accumulated into g and the gradient w.r.t. the input is returned.
    std::vector<double> backward(const Workspace& ws, std::span<const double> dLdy,
                                 Grad& g) const;

    Grad make_grad() const;

    // One SGD step with global gradient-norm clipping; ascend flips the sign.
    void apply_sgd(const Grad& g, double lr, double clip_norm, bool ascend = false);

    // Adam state for one network; moments mirror the parameter layout.
    struct AdamState {
        std::vector<std::vector<double>> mw, vw, mb, vb;
        long steps = 0;
    };
    AdamState make_adam_state() const;

    // One Adam step on the norm-clipped gradient.
    void apply_adam(const Grad& g, AdamState& state, double lr, double clip_norm,
                    bool ascend = false, double beta1 = 0.9, double beta2 = 0.999,
                    double eps = 1e-8);

    void soft_update_from(const Mlp& online, double tau);

    std::size_t layer_count() const { return w_.size(); }
    std::vector<double>& weights(std::size_t layer) { return w_[layer]; }
    std::vector<double>& biases(std::size_t layer) { return b_[layer]; }
    const std::vector<double>& weights(std::size_t layer) const { return w_[layer]; }
    const std::vector<double>& biases(std::size_t layer) const { return b_[layer]; }
    std::size_t parameter_count() const;

    // flattened parameter view, used by checkpoints and the gradient tests
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> params);

    void save(Checkpoint& ck, const std::string& section) const;
    static Mlp load(const Checkpoint& ck, const std::string& section);

    bool same_shape(const Mlp& other) const;

  private:
    std::vector<int> widths_;
    std::vector<std::vector<double>> w_; // [layer][out * in + in_idx]
    std::vector<std::vector<double>> b_; // [layer][out]
    Head head_ = Head::Linear;
    double lo_ = -1.0;
    double hi_ = 1.0;
};

} // namespace multipilot
