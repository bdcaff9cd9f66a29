#include "multipilot/channel.hpp"

#include <algorithm>
#include <stdexcept>

namespace multipilot {

namespace {
// Tolerance for delivery-time comparison so grid-aligned schedules (t = i*dt)
// are not off by one sample from rounding in i*dt + delay.
constexpr double kDeliverEps = 1e-9;
} // namespace

void ChannelConfig::validate() const {
    if (base_delay < 0.0) throw std::invalid_argument("channel: base_delay must be >= 0");
    if (jitter_std < 0.0) throw std::invalid_argument("channel: jitter_std must be >= 0");
    if (loss_prob < 0.0 || loss_prob >= 1.0)
        throw std::invalid_argument("channel: loss_prob must be in [0, 1)");
}

DelayChannel::DelayChannel(ChannelConfig cfg) : cfg_(cfg), rng_(cfg.seed) { cfg_.validate(); }

void DelayChannel::send(const CartesianState& msg, double t) {
    if (t < last_send_time_)
        throw std::invalid_argument("channel: send time went backwards");
    last_send_time_ = t;
    ++sent_;
    if (cfg_.loss_prob > 0.0 && rng_.uniform() < cfg_.loss_prob) {
        ++dropped_;
        return;
    }
    double delay = cfg_.base_delay;
    if (cfg_.jitter_std > 0.0) delay += rng_.gaussian(0.0, cfg_.jitter_std);
    delay = std::max(0.0, delay);
    queue_.push(StampedMessage{msg, t, t + delay, next_seq_++});
}

std::optional<CartesianState> DelayChannel::recv_latest(double t) {
    while (!queue_.empty() && queue_.top().deliver_at <= t + kDeliverEps) {
        const StampedMessage& m = queue_.top();
        // supersede by send order, not arrival order
        if (!have_latest_ || m.sent_at > latest_.sent_at ||
            (m.sent_at == latest_.sent_at && m.seq > latest_.seq)) {
            latest_ = m;
            consumed_ = false;
        }
        queue_.pop();
        have_latest_ = true;
    }
    if (!have_latest_) return std::nullopt;
    if (!cfg_.hold_last_sample) {
        if (consumed_) return std::nullopt;
        consumed_ = true;
    }
    return latest_.payload;
}

} // namespace multipilot
