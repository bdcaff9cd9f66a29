#pragma once

#include "multipilot/cartesian.hpp"
#include "multipilot/rng.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace multipilot {

// Timed perturbation injected into an operator's output: a constant bias or
// a linear drift that ramps from zero to the full magnitude over the window.
struct ErrorWindow {
    enum class Shape { Bias, Drift };

    double start = 0.0;
    double end = 0.0;
    Shape shape = Shape::Bias;
    Eigen::Vector3d magnitude = Eigen::Vector3d::Zero();
};

struct OperatorProfile {
    double radius = 0.1;  // m
    double period = 10.0; // s
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double phase = 0.0;
    double noise_std = 0.0; // position noise, m
    std::uint64_t seed = 0;
    std::vector<ErrorWindow> windows;

    void validate() const; // overlapping windows are rejected
};

// Clean circle point (position/velocity/acceleration) at time t.
CartesianState circle_reference(const OperatorProfile& profile, double t);

// Scripted stand-in for a human pilot: the reference circle plus hand noise
// plus whatever error window is active.
class ScriptedOperator {
  public:
    explicit ScriptedOperator(OperatorProfile profile);

    CartesianState sample(double t);

    const OperatorProfile& profile() const { return profile_; }

  private:
    OperatorProfile profile_;
    Rng rng_;
};

} // namespace multipilot
