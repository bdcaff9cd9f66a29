#pragma once

#include "multipilot/cartesian.hpp"
#include "multipilot/ddpg.hpp"

#include <Eigen/Core>
#include <vector>

namespace multipilot {

// Piecewise tracking reward on the error magnitude: the band above 0.1 is
// penalized proportionally, the band (0.01, 0.1] earns 2, anything at or
// below 0.01 earns the full 10.
double tracking_reward(double e);
Eigen::Vector3d tracking_reward(const Eigen::Vector3d& e);

// Diagonal blending weights for the co-pilot; entries live in [lo, hi].
struct ArbitrationWeights {
    Eigen::Vector3d diag = Eigen::Vector3d::Zero();
    double lo = 0.0;
    double hi = 1.0;

    static ArbitrationWeights balanced();        // [0, 1]
    static ArbitrationWeights master_oriented(); // [0, 0.5]

    void set(const Eigen::Vector3d& entries); // clamps into [lo, hi]
    void validate() const;
};

// X_sc = W x_cpf + (I - W) x_mf, applied to positions and velocities alike.
CartesianState arbitrate(const ArbitrationWeights& w, const CartesianState& x_cpf,
                         const CartesianState& x_mf);

// Restoration of the master intent from the delayed command: the agent reads
// the received velocity and acceleration and emits additive position and
// velocity offsets (two per axis).
struct RestoreResult {
    CartesianState x_mf;
    std::vector<double> state;  // agent input
    std::vector<double> action; // agent output
};

std::vector<double> restore_state(const CartesianState& delayed);
CartesianState apply_restore(const CartesianState& delayed, std::span<const double> action);
RestoreResult restore_master(DdpgAgent& agent1, const CartesianState& delayed, bool explore);

// Arbitration agent input: position errors of both candidate commands
// against the known task target.
std::vector<double> arbitration_state(const CartesianState& x_mf, const CartesianState& x_cpf,
                                      const CartesianState& x_ref);

} // namespace multipilot
