#include "multipilot/plant.hpp"

#include <stdexcept>

namespace multipilot {

double EnvironmentModel::penetration(const Eigen::Vector3d& pos) const {
    const double depth = plane_offset - normal.dot(pos);
    return depth > 0.0 ? depth : 0.0;
}

SlavePlant::SlavePlant(PidGains gains, EnvironmentModel env, CartesianState x0)
    : gains_(gains), env_(env), state_(std::move(x0)) {
    env_.normal.normalize();
}

void SlavePlant::reset(const CartesianState& x0) {
    state_ = x0;
    integral_.setZero();
}

std::pair<CartesianState, Eigen::Vector3d> SlavePlant::step(const CartesianState& cmd, double dt) {
    if (!cmd.finite()) throw std::invalid_argument("plant: non-finite command");
    if (!(dt > 0.0)) throw std::invalid_argument("plant: dt must be positive");

    const Eigen::Vector3d err = cmd.pos - state_.pos;
    integral_ += dt * err;
    const Eigen::Vector3d u = gains_.kp * err + gains_.ki * integral_ +
                              gains_.kd * (cmd.vel - state_.vel);

    // contact force at the current state
    const double depth = env_.penetration(state_.pos);
    Eigen::Vector3d f_se = Eigen::Vector3d::Zero();
    if (depth > 0.0) {
        const double depth_rate = -env_.normal.dot(state_.vel);
        f_se = (-env_.stiffness * depth - env_.damping * depth_rate) * env_.normal;
    }

    // unit mass; the material pushes back with the reaction -f_se
    const Eigen::Vector3d acc = u - f_se;
    state_.vel += dt * acc;
    state_.pos += dt * state_.vel;
    state_.acc = acc;
    return {state_, f_se};
}

} // namespace multipilot
