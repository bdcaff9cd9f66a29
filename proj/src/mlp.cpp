#include "multipilot/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace multipilot {

void Mlp::Grad::zero() {
    for (auto& layer : w) std::fill(layer.begin(), layer.end(), 0.0);
    for (auto& layer : b) std::fill(layer.begin(), layer.end(), 0.0);
}

void Mlp::Grad::scale(double s) {
    for (auto& layer : w)
        for (double& v : layer) v *= s;
    for (auto& layer : b)
        for (double& v : layer) v *= s;
}

double Mlp::Grad::norm() const {
    double acc = 0.0;
    for (const auto& layer : w)
        for (const double v : layer) acc += v * v;
    for (const auto& layer : b)
        for (const double v : layer) acc += v * v;
    return std::sqrt(acc);
}

Mlp::Mlp(std::vector<int> widths, Head head, double lo, double hi)
    : widths_(std::move(widths)), head_(head), lo_(lo), hi_(hi) {
    if (widths_.size() < 2) throw std::invalid_argument("mlp: need at least input and output widths");
    for (const int w : widths_)
        if (w <= 0) throw std::invalid_argument("mlp: layer widths must be positive");
    if (head_ == Head::BoundedTanh && !(lo_ < hi_))
        throw std::invalid_argument("mlp: bounded head needs lo < hi");
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        w_.emplace_back(static_cast<std::size_t>(widths_[l]) * widths_[l + 1], 0.0);
        b_.emplace_back(widths_[l + 1], 0.0);
    }
}

void Mlp::init_uniform(Rng& rng, double final_scale) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
        const bool hidden = l + 1 < w_.size();
        double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        if (!hidden && final_scale >= 0.0) bound = final_scale;
        for (double& v : w_[l]) v = rng.uniform(-bound, bound);
        for (double& v : b_[l]) {
            // hidden ReLU units start with a positive margin so narrow layers
            // do not lose units to early gradient noise
            v = hidden ? 0.5 * bound : rng.uniform(-bound, bound);
        }
    }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    Workspace ws;
    return forward(x, ws);
}

std::vector<double> Mlp::forward(std::span<const double> x, Workspace& ws) const {
    if (static_cast<int>(x.size()) != widths_.front())
        throw std::invalid_argument("mlp: input dimension mismatch");
    const std::size_t L = w_.size();
    ws.act.assign(L + 1, {});
    ws.pre.assign(L, {});
    ws.act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < L; ++l) {
        const int in = widths_[l];
        const int out = widths_[l + 1];
        ws.pre[l].assign(out, 0.0);
        ws.act[l + 1].assign(out, 0.0);
        for (int o = 0; o < out; ++o) {
            double z = b_[l][o];
            const double* wrow = &w_[l][static_cast<std::size_t>(o) * in];
            for (int i = 0; i < in; ++i) z += wrow[i] * ws.act[l][i];
            ws.pre[l][o] = z;
            if (l + 1 < L) {
                ws.act[l + 1][o] = z > 0.0 ? z : 0.0; // ReLU hidden
            } else if (head_ == Head::Linear) {
                ws.act[l + 1][o] = z;
            } else {
                ws.act[l + 1][o] = lo_ + (hi_ - lo_) * 0.5 * (std::tanh(z) + 1.0);
            }
        }
    }
    return ws.act.back();
}

std::vector<double> Mlp::backward(const Workspace& ws, std::span<const double> dLdy,
                                  Grad& g) const {
    const std::size_t L = w_.size();
    if (ws.act.size() != L + 1) throw std::logic_error("mlp: backward without forward");
    if (static_cast<int>(dLdy.size()) != widths_.back())
        throw std::invalid_argument("mlp: output gradient dimension mismatch");

    std::vector<double> delta(dLdy.begin(), dLdy.end());
    // output head derivative
    for (int o = 0; o < widths_.back(); ++o) {
        if (head_ == Head::BoundedTanh) {
            const double th = std::tanh(ws.pre[L - 1][o]);
            delta[o] *= (hi_ - lo_) * 0.5 * (1.0 - th * th);
        }
    }

    for (std::size_t l = L; l-- > 0;) {
        const int in = widths_[l];
        const int out = widths_[l + 1];
        std::vector<double> prev(in, 0.0);
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            double* grow = &g.w[l][static_cast<std::size_t>(o) * in];
            const double* wrow = &w_[l][static_cast<std::size_t>(o) * in];
            for (int i = 0; i < in; ++i) {
                grow[i] += d * ws.act[l][i];
                prev[i] += d * wrow[i];
            }
            g.b[l][o] += d;
        }
        if (l > 0) {
            for (int i = 0; i < in; ++i)
                if (ws.pre[l - 1][i] <= 0.0) prev[i] = 0.0; // ReLU gate
        }
        delta = std::move(prev);
    }
    return delta; // dL/dinput
}

Mlp::Grad Mlp::make_grad() const {
    Grad g;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        g.w.emplace_back(w_[l].size(), 0.0);
        g.b.emplace_back(b_[l].size(), 0.0);
    }
    return g;
}

void Mlp::apply_sgd(const Grad& g, double lr, double clip_norm, bool ascend) {
    double scale = 1.0;
    if (clip_norm > 0.0) {
        const double n = g.norm();
        if (n > clip_norm) scale = clip_norm / n;
    }
    const double step = (ascend ? -lr : lr) * scale;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (std::size_t i = 0; i < w_[l].size(); ++i) w_[l][i] -= step * g.w[l][i];
        for (std::size_t i = 0; i < b_[l].size(); ++i) b_[l][i] -= step * g.b[l][i];
    }
}

Mlp::AdamState Mlp::make_adam_state() const {
    AdamState st;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        st.mw.emplace_back(w_[l].size(), 0.0);
        st.vw.emplace_back(w_[l].size(), 0.0);
        st.mb.emplace_back(b_[l].size(), 0.0);
        st.vb.emplace_back(b_[l].size(), 0.0);
    }
    return st;
}

void Mlp::apply_adam(const Grad& g, AdamState& st, double lr, double clip_norm, bool ascend,
                     double beta1, double beta2, double eps) {
    double scale = 1.0;
    if (clip_norm > 0.0) {
        const double n = g.norm();
        if (n > clip_norm) scale = clip_norm / n;
    }
    if (ascend) scale = -scale;
    ++st.steps;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.steps));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.steps));
    auto update = [&](std::vector<double>& p, const std::vector<double>& grad,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = scale * grad[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
            p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    };
    for (std::size_t l = 0; l < w_.size(); ++l) {
        update(w_[l], g.w[l], st.mw[l], st.vw[l]);
        update(b_[l], g.b[l], st.mb[l], st.vb[l]);
    }
}

void Mlp::soft_update_from(const Mlp& online, double tau) {
    if (!same_shape(online)) throw std::invalid_argument("mlp: soft update shape mismatch");
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (std::size_t i = 0; i < w_[l].size(); ++i)
            w_[l][i] = tau * online.w_[l][i] + (1.0 - tau) * w_[l][i];
        for (std::size_t i = 0; i < b_[l].size(); ++i)
            b_[l][i] = tau * online.b_[l][i] + (1.0 - tau) * b_[l][i];
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
    return n;
}

std::vector<double> Mlp::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < w_.size(); ++l) {
        out.insert(out.end(), w_[l].begin(), w_[l].end());
        out.insert(out.end(), b_[l].begin(), b_[l].end());
    }
    return out;
}

void Mlp::unflatten(std::span<const double> params) {
    if (params.size() != parameter_count())
        throw std::invalid_argument("mlp: parameter count mismatch");
    std::size_t k = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (double& v : w_[l]) v = params[k++];
        for (double& v : b_[l]) v = params[k++];
    }
}

void Mlp::save(Checkpoint& ck, const std::string& section) const {
    ck.begin_section(section);
    ck.put_ints("widths", widths_);
    ck.put("head", std::string(head_ == Head::Linear ? "linear" : "tanh"));
    ck.put("lo", lo_);
    ck.put("hi", hi_);
    for (std::size_t l = 0; l < w_.size(); ++l) {
        ck.put("W" + std::to_string(l), w_[l]);
        ck.put("b" + std::to_string(l), b_[l]);
    }
}

Mlp Mlp::load(const Checkpoint& ck, const std::string& section) {
    const std::vector<int> widths = ck.get_ints(section, "widths");
    const std::string head_name = ck.get_string(section, "head");
    const Head head = head_name == "linear" ? Head::Linear : Head::BoundedTanh;
    Mlp net(widths, head, ck.get_scalar(section, "lo"), ck.get_scalar(section, "hi"));
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const auto w = ck.get(section, "W" + std::to_string(l));
        const auto b = ck.get(section, "b" + std::to_string(l));
        if (w.size() != net.w_[l].size() || b.size() != net.b_[l].size())
            throw std::runtime_error("mlp: checkpoint layer size mismatch");
        net.w_[l] = w;
        net.b_[l] = b;
    }
    return net;
}

bool Mlp::same_shape(const Mlp& other) const {
    return widths_ == other.widths_ && head_ == other.head_ && lo_ == other.lo_ &&
           hi_ == other.hi_;
}

} // namespace multipilot
