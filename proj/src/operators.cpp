#include "multipilot/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multipilot {

void OperatorProfile::validate() const {
    if (!(radius >= 0.0)) throw std::invalid_argument("operator: radius must be >= 0");
    if (!(period > 0.0)) throw std::invalid_argument("operator: period must be positive");
    if (noise_std < 0.0) throw std::invalid_argument("operator: noise_std must be >= 0");
    std::vector<ErrorWindow> sorted = windows;
    std::sort(sorted.begin(), sorted.end(),
              [](const ErrorWindow& a, const ErrorWindow& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(sorted[i].start < sorted[i].end))
            throw std::invalid_argument("operator: error window must have start < end");
        if (i > 0 && sorted[i].start < sorted[i - 1].end)
            throw std::invalid_argument("operator: overlapping error windows");
    }
}

CartesianState circle_reference(const OperatorProfile& p, double t) {
    const double omega = 2.0 * M_PI / p.period;
    const double theta = omega * t + p.phase;
    CartesianState s;
    s.pos = p.center + p.radius * Eigen::Vector3d(std::cos(theta), std::sin(theta), 0.0);
    s.vel = p.radius * omega * Eigen::Vector3d(-std::sin(theta), std::cos(theta), 0.0);
    s.acc = -p.radius * omega * omega * Eigen::Vector3d(std::cos(theta), std::sin(theta), 0.0);
    return s;
}

ScriptedOperator::ScriptedOperator(OperatorProfile profile)
    : profile_(std::move(profile)), rng_(profile_.seed) {
    profile_.validate();
}

CartesianState ScriptedOperator::sample(double t) {
    CartesianState s = circle_reference(profile_, t);
    if (profile_.noise_std > 0.0) {
        s.pos += Eigen::Vector3d(rng_.gaussian(0.0, profile_.noise_std),
                                 rng_.gaussian(0.0, profile_.noise_std),
                                 rng_.gaussian(0.0, profile_.noise_std));
    }
    for (const ErrorWindow& w : profile_.windows) {
        if (t < w.start || t >= w.end) continue;
        if (w.shape == ErrorWindow::Shape::Bias) {
            s.pos += w.magnitude;
        } else {
            const double ramp = (t - w.start) / (w.end - w.start);
            s.pos += ramp * w.magnitude;
            s.vel += w.magnitude / (w.end - w.start);
        }
        break; // windows do not overlap
    }
    return s;
}

} // namespace multipilot
