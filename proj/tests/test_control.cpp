#include "multipilot/control.hpp"

#include <doctest.h>

using namespace multipilot;

TEST_CASE("tracking reward hits the printed branch values") {
    CHECK(tracking_reward(0.0) == 10.0);
    CHECK(tracking_reward(0.05) == 2.0);
    CHECK(tracking_reward(-0.2) == doctest::Approx(-2.0));
    CHECK(tracking_reward(0.15) == doctest::Approx(-1.5));
    CHECK(tracking_reward(0.005) == 10.0);
    CHECK(tracking_reward(0.01) == 10.0);  // boundary goes to the top branch
    CHECK(tracking_reward(0.1) == 2.0);    // and this one to the middle band
}

TEST_CASE("reward is bounded by 10 and non-increasing in the error magnitude") {
    double prev = tracking_reward(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double e = 0.0005 * i;
        const double r = tracking_reward(e);
        CHECK(r <= 10.0);
        CHECK(r <= prev + 1e-12);
        CHECK(tracking_reward(-e) == r); // symmetric in the sign
        prev = r;
    }
}

TEST_CASE("componentwise reward vector") {
    const Eigen::Vector3d r = tracking_reward(Eigen::Vector3d(0.0, 0.05, -0.2));
    CHECK(r.x() == 10.0);
    CHECK(r.y() == 2.0);
    CHECK(r.z() == doctest::Approx(-2.0));
}

TEST_CASE("arbitration endpoints") {
    CartesianState cpf, mf;
    cpf.pos = Eigen::Vector3d(1.0, 0.0, 0.0);
    mf.pos = Eigen::Vector3d(0.0, 1.0, 0.0);

    ArbitrationWeights w = ArbitrationWeights::balanced();
    w.set(Eigen::Vector3d::Zero());
    CHECK(arbitrate(w, cpf, mf).pos == mf.pos);
    w.set(Eigen::Vector3d::Ones());
    CHECK(arbitrate(w, cpf, mf).pos == cpf.pos);
}

TEST_CASE("a 0.3 weight blends 30/70") {
    CartesianState cpf, mf;
    cpf.pos = Eigen::Vector3d(1.0, 0.0, 0.0);
    mf.pos = Eigen::Vector3d(0.0, 1.0, 0.0);
    ArbitrationWeights w = ArbitrationWeights::balanced();
    w.set(Eigen::Vector3d::Constant(0.3));
    const CartesianState out = arbitrate(w, cpf, mf);
    CHECK(out.pos.x() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(out.pos.y() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(out.pos.z() == 0.0);
}

TEST_CASE("blended command stays inside the interval spanned by its inputs") {
    Rng rng(77);
    for (int trial = 0; trial < 2000; ++trial) {
        CartesianState cpf, mf;
        for (int i = 0; i < 3; ++i) {
            cpf.pos[i] = rng.uniform(-1.0, 1.0);
            mf.pos[i] = rng.uniform(-1.0, 1.0);
            cpf.vel[i] = rng.uniform(-1.0, 1.0);
            mf.vel[i] = rng.uniform(-1.0, 1.0);
        }
        ArbitrationWeights w = ArbitrationWeights::balanced();
        w.set(Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform()));
        const CartesianState out = arbitrate(w, cpf, mf);
        for (int i = 0; i < 3; ++i) {
            CHECK(out.pos[i] >= std::min(cpf.pos[i], mf.pos[i]) - 1e-12);
            CHECK(out.pos[i] <= std::max(cpf.pos[i], mf.pos[i]) + 1e-12);
            CHECK(out.vel[i] >= std::min(cpf.vel[i], mf.vel[i]) - 1e-12);
            CHECK(out.vel[i] <= std::max(cpf.vel[i], mf.vel[i]) + 1e-12);
        }
    }
}

TEST_CASE("velocities blend with the same weights as positions") {
    CartesianState cpf, mf;
    cpf.vel = Eigen::Vector3d(2.0, 0.0, 0.0);
    mf.vel = Eigen::Vector3d(0.0, 2.0, 0.0);
    ArbitrationWeights w = ArbitrationWeights::balanced();
    w.set(Eigen::Vector3d::Constant(0.25));
    const CartesianState out = arbitrate(w, cpf, mf);
    CHECK(out.vel.x() == doctest::Approx(0.5));
    CHECK(out.vel.y() == doctest::Approx(1.5));
}

TEST_CASE("master-oriented weights clamp at one half") {
    ArbitrationWeights w = ArbitrationWeights::master_oriented();
    w.set(Eigen::Vector3d(0.9, 0.2, -0.3));
    CHECK(w.diag.x() == 0.5);
    CHECK(w.diag.y() == doctest::Approx(0.2));
    CHECK(w.diag.z() == 0.0);
    w.validate();
}

TEST_CASE("zero restoration action passes the delayed command through") {
    CartesianState delayed;
    delayed.pos = Eigen::Vector3d(0.1, 0.2, 0.3);
    delayed.vel = Eigen::Vector3d(-0.1, 0.0, 0.1);
    const CartesianState out = apply_restore(delayed, std::vector<double>(6, 0.0));
    CHECK(out.pos == delayed.pos);
    CHECK(out.vel == delayed.vel);
}

TEST_CASE("restoration never moves the command further than the action bound") {
    DdpgConfig cfg;
    cfg.state_dim = 6;
    cfg.action_dim = 6;
    cfg.action_lo = -1.0;
    cfg.action_hi = 1.0;
    cfg.seed = 4;
    DdpgAgent agent(cfg);
    Rng rng(9);
    for (int trial = 0; trial < 1000; ++trial) {
        CartesianState delayed;
        for (int i = 0; i < 3; ++i) {
            delayed.pos[i] = rng.uniform(-0.2, 0.2);
            delayed.vel[i] = rng.uniform(-0.2, 0.2);
            delayed.acc[i] = rng.uniform(-0.5, 0.5);
        }
        const RestoreResult r = restore_master(agent, delayed, trial % 2 == 0);
        CHECK((r.x_mf.pos - delayed.pos).lpNorm<Eigen::Infinity>() <= 1.0);
        CHECK((r.x_mf.vel - delayed.vel).lpNorm<Eigen::Infinity>() <= 1.0);
    }
}

TEST_CASE("restoration state is the received velocity and acceleration") {
    CartesianState delayed;
    delayed.vel = Eigen::Vector3d(1.0, 2.0, 3.0);
    delayed.acc = Eigen::Vector3d(4.0, 5.0, 6.0);
    const auto s = restore_state(delayed);
    CHECK(s == std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
}

TEST_CASE("arbitration state is both commands' position error against the target") {
    CartesianState mf, cpf, ref;
    mf.pos = Eigen::Vector3d(1.0, 1.0, 1.0);
    cpf.pos = Eigen::Vector3d(2.0, 2.0, 2.0);
    ref.pos = Eigen::Vector3d(1.0, 2.0, 3.0);
    const auto s = arbitration_state(mf, cpf, ref);
    CHECK(s == std::vector<double>{0.0, -1.0, -2.0, 1.0, 0.0, -1.0});
}
