#pragma once

#include "multipilot/cartesian.hpp"
#include "multipilot/rng.hpp"

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

namespace multipilot {

struct StampedMessage {
    CartesianState payload;
    double sent_at = 0.0;
    double deliver_at = 0.0;
    std::uint64_t seq = 0;
};

struct ChannelConfig {
    double base_delay = 0.0;   // seconds
    double jitter_std = 0.0;   // seconds, Gaussian, clamped so delay >= 0
    double loss_prob = 0.0;    // in [0, 1)
    std::uint64_t seed = 0;
    bool hold_last_sample = true; // receiver keeps acting on the newest delivered command

    void validate() const;
};

// Simulated forward channel: messages are enqueued with a delivery time and
// the receiver polls with the simulation clock. Delivery supersession keeps
// the most recently *sent* message among everything delivered so far, so
// out-of-order arrivals under jitter never roll the command stream backwards.
class DelayChannel {
  public:
    explicit DelayChannel(ChannelConfig cfg);

    // Enqueue (or drop) a message at simulation time t. t must not decrease.
    void send(const CartesianState& msg, double t);

    // Newest delivered payload at time t, or nothing. Without hold-last-sample
    // a payload is handed out once; with it (default) the last sample repeats.
    std::optional<CartesianState> recv_latest(double t);

    std::size_t pending() const { return queue_.size(); }
    std::uint64_t sent_count() const { return sent_; }
    std::uint64_t dropped_count() const { return dropped_; }

  private:
    struct Later {
        bool operator()(const StampedMessage& a, const StampedMessage& b) const {
            if (a.deliver_at != b.deliver_at) return a.deliver_at > b.deliver_at;
            return a.seq > b.seq;
        }
    };

    ChannelConfig cfg_;
    Rng rng_;
    std::priority_queue<StampedMessage, std::vector<StampedMessage>, Later> queue_;
    double last_send_time_ = -1e300;
    std::uint64_t next_seq_ = 0;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;

    bool have_latest_ = false;
    StampedMessage latest_;
    bool consumed_ = false;
};

} // namespace multipilot
