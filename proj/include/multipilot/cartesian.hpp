#pragma once

#include <Eigen/Core>
#include <cmath>

namespace multipilot {

// Position/velocity/acceleration triple in Cartesian space; the signal
// currency every module trades in.
struct CartesianState {
    Eigen::Vector3d pos{0.0, 0.0, 0.0};
    Eigen::Vector3d vel{0.0, 0.0, 0.0};
    Eigen::Vector3d acc{0.0, 0.0, 0.0};

    bool finite() const {
        return pos.allFinite() && vel.allFinite() && acc.allFinite();
    }
};

} // namespace multipilot
