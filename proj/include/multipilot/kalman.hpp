#pragma once

#include "multipilot/cartesian.hpp"

#include <Eigen/Core>

namespace multipilot {

// Per-axis linear process model: 3-state (position, velocity, acceleration)
// transition A, scalar position observation C, process noise W, measurement
// noise R.
struct GaussianLinearModel {
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    Eigen::RowVector3d C = Eigen::RowVector3d(1.0, 0.0, 0.0);
    Eigen::Matrix3d W = Eigen::Matrix3d::Zero();
    double R = 1e-6;

    void validate() const; // W symmetric PSD, R > 0
};

// Constant-jerk kinematic model for one axis: A advances (pos, vel, acc) over
// dt, W = jerk_std^2 * G G^T with G = [dt^3/6, dt^2/2, dt].
GaussianLinearModel constant_jerk_model(double dt, double jerk_std = 1.0, double r = 1e-6);

// Transition matrix alone; transitions compose, so A(a) * A(b) == A(a + b).
Eigen::Matrix3d constant_jerk_transition(double dt);

// One-step-ahead predictor form: the stored covariance P is always the prior
// for the upcoming measurement, so the gain uses it directly and the
// covariance update folds the A-propagation and +W in after each correction.
class KalmanFilter {
  public:
    explicit KalmanFilter(GaussianLinearModel model,
                          const Eigen::Vector3d& x0 = Eigen::Vector3d::Zero(),
                          const Eigen::Matrix3d& P0 = 1e15 * Eigen::Matrix3d::Identity());

    // State prediction X* = A x_hat. Stages the prior for the next correction;
    // repeated calls before a correction return the same value.
    Eigen::Vector3d predict();

    // Scalar measurement update followed by covariance propagation.
    // Fails if the innovation variance C P C^T + R is not positive.
    Eigen::Vector3d correct(double z);

    // Two sequential scalar corrections sharing a single prediction; the
    // covariance is propagated once after both measurements are folded in.
    Eigen::Vector3d fuse_dual(double z1, double z2);

    // Advance one step with no measurement: x_hat <- A x_hat, P <- A P A^T + W.
    void coast();

    const Eigen::Vector3d& state() const { return x_hat_; }
    const Eigen::Matrix3d& covariance() const { return P_; }
    const Eigen::Vector3d& gain() const { return K_; }
    const GaussianLinearModel& model() const { return model_; }

  private:
    void measurement_update(double z); // updates x_hat_ and posterior P_ in place
    void propagate_covariance();       // P <- A P A^T + W

    GaussianLinearModel model_;
    Eigen::Vector3d x_hat_;
    Eigen::Matrix3d P_;
    Eigen::Vector3d K_ = Eigen::Vector3d::Zero();
    Eigen::Vector3d x_star_ = Eigen::Vector3d::Zero();
    bool pending_prediction_ = false;
};

// Three independent per-axis filters sharing one model; no cross-axis
// coupling. Measurements are the per-axis positions of a Cartesian signal.
class KalmanBank3 {
  public:
    explicit KalmanBank3(const GaussianLinearModel& model);

    void predict();
    CartesianState correct(const Eigen::Vector3d& pos);
    CartesianState fuse_dual(const Eigen::Vector3d& pos1, const Eigen::Vector3d& pos2);
    void coast();

    CartesianState state() const;
    KalmanFilter& axis(int i) { return filters_[i]; }

  private:
    KalmanFilter filters_[3];
};

} // namespace multipilot
