#include "multipilot/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace multipilot {

double rmse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("rmse: length mismatch");
    if (a.empty()) throw std::invalid_argument("rmse: empty signals");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

Rmse3 rmse(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("rmse: length mismatch");
    if (a.empty()) throw std::invalid_argument("rmse: empty signals");
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Eigen::Vector3d d = a[i] - b[i];
        acc += d.cwiseProduct(d);
    }
    const double n = static_cast<double>(a.size());
    Rmse3 r;
    r.per_axis = (acc / n).cwiseSqrt();
    r.aggregate = std::sqrt(acc.sum() / (3.0 * n));
    return r;
}

} // namespace multipilot
