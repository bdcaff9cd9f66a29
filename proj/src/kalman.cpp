#include "multipilot/kalman.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace multipilot {

void GaussianLinearModel::validate() const {
    if (!(R > 0.0)) throw std::invalid_argument("kalman: R must be positive");
    if (!A.allFinite() || !C.allFinite() || !W.allFinite())
        throw std::invalid_argument("kalman: non-finite model matrices");
    if ((W - W.transpose()).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + W.norm()))
        throw std::invalid_argument("kalman: W must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(W);
    if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + W.norm()))
        throw std::invalid_argument("kalman: W must be positive semi-definite");
}

Eigen::Matrix3d constant_jerk_transition(double dt) {
    Eigen::Matrix3d A;
    A << 1.0, dt, dt * dt / 2.0, //
        0.0, 1.0, dt,            //
        0.0, 0.0, 1.0;
    return A;
}

GaussianLinearModel constant_jerk_model(double dt, double jerk_std, double r) {
    if (!(dt > 0.0)) throw std::invalid_argument("kalman: dt must be positive");
    GaussianLinearModel m;
    m.A = constant_jerk_transition(dt);
    const Eigen::Vector3d g(dt * dt * dt / 6.0, dt * dt / 2.0, dt);
    m.W = jerk_std * jerk_std * g * g.transpose();
    m.C = Eigen::RowVector3d(1.0, 0.0, 0.0);
    m.R = r;
    m.validate();
    return m;
}

KalmanFilter::KalmanFilter(GaussianLinearModel model, const Eigen::Vector3d& x0,
                           const Eigen::Matrix3d& P0)
    : model_(std::move(model)), x_hat_(x0), P_(P0) {
    model_.validate();
    if (!x_hat_.allFinite() || !P_.allFinite())
        throw std::invalid_argument("kalman: non-finite initial state");
}

Eigen::Vector3d KalmanFilter::predict() {
    x_star_ = model_.A * x_hat_;
    pending_prediction_ = true;
    return x_star_;
}

void KalmanFilter::measurement_update(double z) {
    const double s = model_.C * P_ * model_.C.transpose() + model_.R;
    if (!(s > 0.0) || !std::isfinite(s))
        throw std::runtime_error("kalman: innovation variance not positive");
    K_ = P_ * model_.C.transpose() / s;
    x_hat_ += K_ * (z - model_.C * x_hat_);
    // Joseph form: algebraically (I - K C) P, but stays positive
    // semi-definite even when P dwarfs R (P0 = 1e15 with R = 1e-6 loses the
    // plain-form subtraction to cancellation)
    const Eigen::Matrix3d ikc = Eigen::Matrix3d::Identity() - K_ * model_.C;
    P_ = (ikc * P_ * ikc.transpose() + model_.R * K_ * K_.transpose()).eval();
    P_ = ((P_ + P_.transpose()) / 2.0).eval();
}

void KalmanFilter::propagate_covariance() {
    P_ = (model_.A * P_ * model_.A.transpose() + model_.W).eval();
    P_ = ((P_ + P_.transpose()) / 2.0).eval();
}

Eigen::Vector3d KalmanFilter::correct(double z) {
    if (!pending_prediction_)
        throw std::logic_error("kalman: correct requires a prediction for this step");
    if (!std::isfinite(z)) throw std::invalid_argument("kalman: non-finite measurement");
    x_hat_ = x_star_;
    measurement_update(z);
    propagate_covariance();
    pending_prediction_ = false;
    return x_hat_;
}

Eigen::Vector3d KalmanFilter::fuse_dual(double z1, double z2) {
    if (!pending_prediction_)
        throw std::logic_error("kalman: fuse_dual requires a prediction for this step");
    if (!std::isfinite(z1) || !std::isfinite(z2))
        throw std::invalid_argument("kalman: non-finite measurement");
    x_hat_ = x_star_;
    measurement_update(z1);
    measurement_update(z2);
    propagate_covariance();
    pending_prediction_ = false;
    return x_hat_;
}

void KalmanFilter::coast() {
    x_hat_ = model_.A * x_hat_;
    propagate_covariance();
    pending_prediction_ = false;
}

KalmanBank3::KalmanBank3(const GaussianLinearModel& model)
    : filters_{KalmanFilter(model), KalmanFilter(model), KalmanFilter(model)} {}

void KalmanBank3::predict() {
    for (auto& f : filters_) f.predict();
}

CartesianState KalmanBank3::correct(const Eigen::Vector3d& pos) {
    for (int i = 0; i < 3; ++i) filters_[i].correct(pos[i]);
    return state();
}

CartesianState KalmanBank3::fuse_dual(const Eigen::Vector3d& pos1, const Eigen::Vector3d& pos2) {
    for (int i = 0; i < 3; ++i) filters_[i].fuse_dual(pos1[i], pos2[i]);
    return state();
}

void KalmanBank3::coast() {
    for (auto& f : filters_) f.coast();
}

CartesianState KalmanBank3::state() const {
    CartesianState s;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d& x = filters_[i].state();
        s.pos[i] = x[0];
        s.vel[i] = x[1];
        s.acc[i] = x[2];
    }
    return s;
}

} // namespace multipilot
