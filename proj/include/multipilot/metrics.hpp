#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace multipilot {

// Root-mean-square error between two equal-length signals.
double rmse(std::span<const double> a, std::span<const double> b);

// Per-axis RMSE plus the aggregate over all axes and samples.
struct Rmse3 {
    Eigen::Vector3d per_axis;
    double aggregate;
};

Rmse3 rmse(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b);

} // namespace multipilot
