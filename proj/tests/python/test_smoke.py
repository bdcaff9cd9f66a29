"""Smoke tests for the python bindings: each core operation is exercised once
and cross-checked against numpy where that is cheap."""

import math

import numpy as np
import pytest

import multipilot as mp


def test_kalman_predict_matches_numpy():
    model = mp.constant_jerk_model(0.01, 1.0, 1e-6)
    x0 = np.array([0.3, -0.1, 0.05])
    kf = mp.KalmanFilter(model, x0, np.eye(3))
    assert np.allclose(kf.predict(), np.asarray(model.A) @ x0, atol=1e-15)


def test_kalman_tracks_a_constant():
    kf = mp.KalmanFilter(mp.constant_jerk_model(0.01))
    for _ in range(100):
        kf.predict()
        est = kf.correct(0.7)
    assert abs(est[0] - 0.7) < 1e-6


def test_channel_shifts_by_fifty_samples():
    cfg = mp.ChannelConfig()
    cfg.base_delay = 0.5
    ch = mp.DelayChannel(cfg)
    got = []
    for i in range(200):
        msg = mp.CartesianState()
        msg.pos = np.array([float(i), 0.0, 0.0])
        ch.send(msg, i * 0.01)
        out = ch.recv_latest(i * 0.01)
        got.append(None if out is None else out.pos[0])
    assert got[:50] == [None] * 50
    assert got[50:] == [float(i) for i in range(150)]


def test_tracking_reward_branches():
    assert mp.tracking_reward(0.0) == 10.0
    assert mp.tracking_reward(0.05) == 2.0
    assert mp.tracking_reward(-0.2) == pytest.approx(-2.0)


def test_arbitration_blend():
    w = mp.ArbitrationWeights.balanced()
    w.set(np.array([0.3, 0.3, 0.3]))
    cpf, mf = mp.CartesianState(), mp.CartesianState()
    cpf.pos = np.array([1.0, 0.0, 0.0])
    mf.pos = np.array([0.0, 1.0, 0.0])
    out = mp.arbitrate(w, cpf, mf)
    assert np.allclose(out.pos, [0.3, 0.7, 0.0])


def test_agent_act_respects_bounds_and_checkpoints(tmp_path):
    cfg = mp.DdpgConfig()
    cfg.state_dim = 2
    cfg.action_dim = 1
    cfg.action_lo = 0.0
    cfg.action_hi = 1.0
    cfg.seed = 3
    agent = mp.DdpgAgent(cfg)
    for i in range(500):
        a = agent.act([math.sin(i * 0.1), math.cos(i * 0.1)], i % 2 == 0)
        assert 0.0 <= a[0] <= 1.0

    path = str(tmp_path / "agent.ckpt")
    agent.save(path)
    loaded = mp.DdpgAgent.load(path)
    assert loaded.act([0.2, -0.4]) == agent.act([0.2, -0.4])


def test_plant_spring_force():
    env = mp.EnvironmentModel()
    env.stiffness = 500.0
    env.plane_offset = 0.0
    x0 = mp.CartesianState()
    x0.pos = np.array([0.0, 0.0, -0.01])
    gains = mp.PidGains()
    gains.kp = gains.ki = gains.kd = 0.0
    plant = mp.SlavePlant(gains, env, x0)
    _, f = plant.step(x0, 1e-6)
    assert f[2] == pytest.approx(-5.0)


def test_operator_traces_the_circle():
    profile = mp.OperatorProfile()
    profile.radius = 0.1
    profile.period = 10.0
    op = mp.ScriptedOperator(profile)
    s = op.sample(2.5)  # quarter turn
    assert np.allclose(s.pos, [0.0, 0.1, 0.0], atol=1e-12)


def test_fuzzy_fit_and_predict():
    rng = np.random.default_rng(1)
    n = 120
    x = np.vstack([rng.normal(0.0, 1.0, (n // 2, 2)), rng.normal(8.0, 1.0, (n // 2, 2))])
    x[:, 1] = rng.normal(0.0, 1.0, n)
    labels = [0] * (n // 2) + [1] * (n // 2)
    forces = np.column_stack([2.0 * x[:, 0] - x[:, 1], x[:, 1], np.zeros(n)])

    model = mp.FuzzyModel.fit(x, forces, labels, mp.FuzzyModelConfig())
    assert model.rule_count() >= 1
    pred = model.predict(np.array([1.0, 0.5]))
    assert np.allclose(pred, [2.0 * 1.0 - 0.5, 0.5, 0.0], atol=0.2)


def test_fcm_memberships_sum_to_one():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(40, 2))
    res = mp.fcm(x, 3)
    assert np.allclose(np.asarray(res.memberships).sum(axis=1), 1.0, atol=1e-9)


def test_rmse_matches_numpy():
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=100), rng.normal(size=100)
    assert mp.rmse(list(a), list(b)) == pytest.approx(
        float(np.sqrt(np.mean((a - b) ** 2))), abs=1e-12
    )
