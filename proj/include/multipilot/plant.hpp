#pragma once

#include "multipilot/cartesian.hpp"

#include <Eigen/Core>
#include <utility>

namespace multipilot {

struct PidGains {
    double kp = 100.0;
    double ki = 0.0;
    double kd = 20.0;
};

// Contact half-space: material fills normal . x < plane_offset. Penetration
// depth is measured along the outward normal.
struct EnvironmentModel {
    double stiffness = 0.0; // N/m
    double damping = 0.0;   // N s/m
    Eigen::Vector3d normal{0.0, 0.0, 1.0};
    double plane_offset = 0.0;

    double penetration(const Eigen::Vector3d& pos) const;
};

// Unit-mass Cartesian point plant driven by a per-axis PID position loop,
// integrated with semi-implicit Euler. step() returns the new state and the
// interaction force F_se = (-k d - c d')*normal measured at the contact
// (the force the end-effector exerts on the material).
class SlavePlant {
  public:
    SlavePlant() = default;
    SlavePlant(PidGains gains, EnvironmentModel env, CartesianState x0 = {});

    std::pair<CartesianState, Eigen::Vector3d> step(const CartesianState& cmd, double dt);

    const CartesianState& state() const { return state_; }
    void reset(const CartesianState& x0);

  private:
    PidGains gains_;
    EnvironmentModel env_;
    CartesianState state_;
    Eigen::Vector3d integral_ = Eigen::Vector3d::Zero();
};

} // namespace multipilot
