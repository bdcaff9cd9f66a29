#include "multipilot/control.hpp"

#include <cmath>
#include <stdexcept>

namespace multipilot {

double tracking_reward(double e) {
    const double a = std::abs(e);
    if (a > 0.1) return -10.0 * a;
    if (a > 0.01) return 2.0;
    return 10.0;
}

Eigen::Vector3d tracking_reward(const Eigen::Vector3d& e) {
    return Eigen::Vector3d(tracking_reward(e.x()), tracking_reward(e.y()),
                           tracking_reward(e.z()));
}

ArbitrationWeights ArbitrationWeights::balanced() { return ArbitrationWeights{}; }

ArbitrationWeights ArbitrationWeights::master_oriented() {
    ArbitrationWeights w;
    w.hi = 0.5;
    return w;
}

void ArbitrationWeights::set(const Eigen::Vector3d& entries) {
    diag = entries.cwiseMax(lo).cwiseMin(hi);
}

void ArbitrationWeights::validate() const {
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi))
        throw std::invalid_argument("arbitration: bounds must satisfy 0 <= lo < hi <= 1");
    for (int i = 0; i < 3; ++i)
        if (diag[i] < lo || diag[i] > hi)
            throw std::invalid_argument("arbitration: weight outside bounds");
}

CartesianState arbitrate(const ArbitrationWeights& w, const CartesianState& x_cpf,
                         const CartesianState& x_mf) {
    w.validate();
    const Eigen::Vector3d one = Eigen::Vector3d::Ones();
    CartesianState out;
    out.pos = w.diag.cwiseProduct(x_cpf.pos) + (one - w.diag).cwiseProduct(x_mf.pos);
    out.vel = w.diag.cwiseProduct(x_cpf.vel) + (one - w.diag).cwiseProduct(x_mf.vel);
    out.acc = w.diag.cwiseProduct(x_cpf.acc) + (one - w.diag).cwiseProduct(x_mf.acc);
    return out;
}

std::vector<double> restore_state(const CartesianState& delayed) {
    return {delayed.vel.x(), delayed.vel.y(), delayed.vel.z(),
            delayed.acc.x(), delayed.acc.y(), delayed.acc.z()};
}

CartesianState apply_restore(const CartesianState& delayed, std::span<const double> action) {
    if (action.size() != 6) throw std::invalid_argument("restore: action must have 6 components");
    CartesianState out = delayed;
    out.pos += Eigen::Vector3d(action[0], action[1], action[2]);
    out.vel += Eigen::Vector3d(action[3], action[4], action[5]);
    return out;
}

RestoreResult restore_master(DdpgAgent& agent1, const CartesianState& delayed, bool explore) {
    RestoreResult r;
    r.state = restore_state(delayed);
    r.action = agent1.act(r.state, explore);
    r.x_mf = apply_restore(delayed, r.action);
    return r;
}

std::vector<double> arbitration_state(const CartesianState& x_mf, const CartesianState& x_cpf,
                                      const CartesianState& x_ref) {
    const Eigen::Vector3d em = x_mf.pos - x_ref.pos;
    const Eigen::Vector3d ec = x_cpf.pos - x_ref.pos;
    return {em.x(), em.y(), em.z(), ec.x(), ec.y(), ec.z()};
}

} // namespace multipilot
