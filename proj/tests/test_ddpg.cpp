#include "multipilot/ddpg.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

using namespace multipilot;

namespace {

DdpgConfig small_config(std::uint64_t seed = 1) {
    DdpgConfig cfg;
    cfg.state_dim = 2;
    cfg.action_dim = 1;
    cfg.critic_hidden = {5};
    cfg.actor_hidden = {3};
    cfg.minibatch = 8;
    cfg.buffer_capacity = 64;
    cfg.seed = seed;
    return cfg;
}

Transition make_transition(Rng& rng, int sdim, int adim) {
    Transition t;
    t.s.resize(sdim);
    t.a.resize(adim);
    t.s_next.resize(sdim);
    for (double& v : t.s) v = rng.uniform(-1.0, 1.0);
    for (double& v : t.a) v = rng.uniform(-1.0, 1.0);
    for (double& v : t.s_next) v = rng.uniform(-1.0, 1.0);
    t.r = rng.uniform(-1.0, 1.0);
    return t;
}

template <typename ObjectiveFn>
std::vector<double> fd_gradient(Mlp& net, ObjectiveFn objective, double h) {
    std::vector<double> p = net.flatten();
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + h;
        net.unflatten(p);
        const double fp = objective();
        p[i] = keep - h;
        net.unflatten(p);
        const double fm = objective();
        p[i] = keep;
        net.unflatten(p);
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

std::vector<double> flatten_grad(const Mlp::Grad& g) {
    std::vector<double> out;
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        out.insert(out.end(), g.w[l].begin(), g.w[l].end());
        out.insert(out.end(), g.b[l].begin(), g.b[l].end());
    }
    return out;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double rel_tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-8});
        CHECK(std::abs(a[i] - b[i]) / scale < rel_tol);
    }
}

} // namespace

TEST_CASE("symmetric bounds and zero weights give the zero action") {
    DdpgAgent agent(small_config());
    for (auto& layer : {0u, 1u}) {
        std::fill(agent.actor().weights(layer).begin(), agent.actor().weights(layer).end(), 0.0);
        std::fill(agent.actor().biases(layer).begin(), agent.actor().biases(layer).end(), 0.0);
    }
    const auto a = agent.act(std::vector<double>{0.3, -0.8}, false);
    CHECK(a[0] == 0.0); // tanh(0) lands mid-interval, which is 0 for [-1, 1]
}

TEST_CASE("a [0,1]-bounded policy stays inside across 10^4 random states") {
    DdpgConfig cfg = small_config(5);
    cfg.action_lo = 0.0;
    cfg.action_hi = 1.0;
    DdpgAgent agent(cfg);
    Rng rng(77);
    for (int i = 0; i < 10000; ++i) {
        const std::vector<double> s{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const auto a = agent.act(s, i % 2 == 0);
        CHECK(a[0] >= 0.0);
        CHECK(a[0] <= 1.0);
    }
}

TEST_CASE("exploration with a fixed seed replays exactly") {
    auto run = []() {
        DdpgAgent agent(small_config(9));
        std::vector<double> actions;
        for (int i = 0; i < 200; ++i) {
            const std::vector<double> s{0.01 * i, -0.02 * i};
            actions.push_back(agent.act(s, true)[0]);
        }
        return actions;
    };
    CHECK(run() == run());
}

TEST_CASE("exploration noise variance decays multiplicatively") {
    DdpgConfig cfg = small_config();
    cfg.noise_var = 0.01;
    cfg.noise_decay = 1e-5;
    DdpgAgent agent(cfg);
    const std::vector<double> s{0.0, 0.0};
    agent.act(s, false);
    CHECK(agent.noise_variance() == 0.01); // greedy calls leave it alone
    for (int i = 0; i < 100; ++i) agent.act(s, true);
    CHECK(agent.noise_variance() == doctest::Approx(0.01 * std::pow(1.0 - 1e-5, 100)).epsilon(1e-12));
}

TEST_CASE("zero-weight critic evaluates to zero") {
    DdpgAgent agent(small_config());
    for (std::size_t l = 0; l < agent.critic().layer_count(); ++l) {
        std::fill(agent.critic().weights(l).begin(), agent.critic().weights(l).end(), 0.0);
        std::fill(agent.critic().biases(l).begin(), agent.critic().biases(l).end(), 0.0);
    }
    CHECK(agent.critic_value(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2}) == 0.0);
}

TEST_CASE("hand-set critic matches the by-hand value") {
    DdpgConfig cfg = small_config();
    cfg.state_dim = 1;
    cfg.action_dim = 1;
    cfg.critic_hidden = {2};
    DdpgAgent agent(cfg);
    agent.critic().weights(0) = {1.0, 0.5, -1.0, 2.0};
    agent.critic().biases(0) = {0.1, -0.2};
    agent.critic().weights(1) = {2.0, 3.0};
    agent.critic().biases(1) = {0.5};
    // input (0.3, 0.4): hidden pre = (0.6, 0.3), output = 2.6
    CHECK(agent.critic_value(std::vector<double>{0.3}, std::vector<double>{0.4}) ==
          doctest::Approx(2.6).epsilon(1e-12));
}

TEST_CASE("critic loss shrinks toward zero on a fixed-point batch") {
    DdpgConfig cfg = small_config(3);
    cfg.gamma = 0.001; // essentially reward-only targets
    cfg.critic_lr = 0.05;
    DdpgAgent agent(cfg);
    std::vector<Transition> batch(8);
    for (auto& t : batch) {
        t.s = {0.3, -0.2};
        t.a = {0.1};
        t.r = 0.0;
        t.s_next = {0.3, -0.2};
    }
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 500; ++i) {
        const auto [loss, q] = agent.train_step(batch);
        if (i == 0) first = loss;
        last = loss;
    }
    CHECK(last < 0.01 * first);
    CHECK(last < 1e-4);
}

TEST_CASE("analytic gradients match finite differences on a 5-neuron net") {
    DdpgConfig cfg = small_config(123);
    DdpgAgent agent(cfg);
    Rng rng(55);
    std::vector<Transition> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(make_transition(rng, 2, 1));

    SUBCASE("critic objective") {
        Mlp::Grad g = agent.critic().make_grad();
        agent.critic_loss_and_gradient(batch, g);
        const auto analytic = flatten_grad(g);
        const auto fd = fd_gradient(agent.critic(), [&]() {
            Mlp::Grad scratch = agent.critic().make_grad();
            return agent.critic_loss_and_gradient(batch, scratch);
        }, 1e-5);
        check_close(analytic, fd, 1e-4);
    }
    SUBCASE("actor objective") {
        Mlp::Grad g = agent.actor().make_grad();
        agent.actor_objective_and_gradient(batch, g);
        const auto analytic = flatten_grad(g);
        const auto fd = fd_gradient(agent.actor(), [&]() {
            Mlp::Grad scratch = agent.actor().make_grad();
            return agent.actor_objective_and_gradient(batch, scratch);
        }, 1e-5);
        check_close(analytic, fd, 1e-4);
    }
}

TEST_CASE("replay buffer evicts the oldest entry at capacity") {
    DdpgConfig cfg = small_config();
    cfg.buffer_capacity = 10000;
    DdpgAgent agent(cfg);
    Rng rng(1);
    for (int i = 0; i < 10001; ++i) {
        Transition t = make_transition(rng, 2, 1);
        t.r = static_cast<double>(i);
        agent.push(std::move(t));
    }
    CHECK(agent.buffer_size() == 10000);
    const auto all = agent.sample(10000);
    double min_r = 1e18;
    for (const auto& t : all) min_r = std::min(min_r, t.r);
    CHECK(min_r == 1.0); // item 0 was evicted
}

TEST_CASE("sampling the whole buffer returns a permutation") {
    DdpgAgent agent(small_config(2));
    Rng rng(6);
    for (int i = 0; i < 32; ++i) {
        Transition t = make_transition(rng, 2, 1);
        t.r = static_cast<double>(i);
        agent.push(std::move(t));
    }
    const auto batch = agent.sample(32);
    std::vector<double> rs;
    for (const auto& t : batch) rs.push_back(t.r);
    std::sort(rs.begin(), rs.end());
    for (int i = 0; i < 32; ++i) CHECK(rs[i] == static_cast<double>(i));
}

TEST_CASE("sampling from an empty buffer fails") {
    DdpgAgent agent(small_config());
    CHECK_THROWS_AS(agent.sample(4), std::runtime_error);
}

TEST_CASE("uniform sampling passes a chi-squared test") {
    DdpgConfig cfg = small_config(10);
    cfg.buffer_capacity = 100;
    DdpgAgent agent(cfg);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        Transition t = make_transition(rng, 2, 1);
        t.r = static_cast<double>(i);
        agent.push(std::move(t));
    }
    std::vector<int> counts(100, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto got = agent.sample(1);
        counts[static_cast<int>(got[0].r)]++;
    }
    const double expected = draws / 100.0;
    double chi2 = 0.0;
    for (const int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 134.642); // chi^2_{99} critical value at p = 0.01
}

TEST_CASE("frozen online nets pull the targets in geometrically") {
    DdpgConfig cfg = small_config(8);
    cfg.tau = 0.02;
    DdpgAgent agent(cfg);
    // push the online actor away from the target copy
    for (double& w : agent.actor().weights(0)) w += 0.5;

    auto dist = [&]() {
        const auto a = agent.actor().flatten();
        const auto b = agent.actor_target().flatten();
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(acc);
    };
    const double d0 = dist();
    const int k = 25;
    for (int i = 0; i < k; ++i) agent.actor_target().soft_update_from(agent.actor(), cfg.tau);
    CHECK(dist() <= std::pow(1.0 - cfg.tau, k) * d0 + 1e-12);
}

TEST_CASE("training is reproducible from the seed") {
    auto run = []() {
        DdpgConfig cfg = small_config(31);
        DdpgAgent agent(cfg);
        Rng rng(4);
        for (int i = 0; i < 200; ++i) agent.push(make_transition(rng, 2, 1));
        for (int i = 0; i < 1000; ++i) agent.train_step();
        return agent.actor().flatten();
    };
    CHECK(run() == run());
}

TEST_CASE("agent checkpoints reload bit-exactly") {
    DdpgConfig cfg = small_config(15);
    DdpgAgent agent(cfg);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) agent.push(make_transition(rng, 2, 1));
    for (int i = 0; i < 50; ++i) agent.train_step();

    Checkpoint ck;
    agent.save(ck);
    const std::string text = ck.to_string();
    DdpgAgent loaded = DdpgAgent::load(Checkpoint::from_string(text));
    Checkpoint ck2;
    loaded.save(ck2);
    CHECK(ck2.to_string() == text);

    const std::vector<double> s{0.25, -0.75};
    CHECK(loaded.act(s, false) == agent.act(s, false));
}

TEST_CASE("dimension and configuration errors are rejected") {
    DdpgAgent agent(small_config());
    CHECK_THROWS_AS(agent.act(std::vector<double>{1.0}, false), std::invalid_argument);
    CHECK_THROWS_AS(agent.train_step(std::vector<Transition>{}), std::invalid_argument);

    DdpgConfig bad = small_config();
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_config();
    bad.tau = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
