// Learning-behavior tests: these train real agents through the scenario loop,
// so they run for a couple of minutes. Everything here is seeded and
// deterministic.
#include "multipilot/metrics.hpp"
#include "multipilot/scenario.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

using namespace multipilot;

namespace {

const char* kAgent1Tuning = R"(
agent1.actor_lr = 3e-5
agent1.critic_lr = 1e-3
agent1.tau = 1e-2
agent1.actor_update_period = 2
agent1.actor_warmup = 4000
agent1.random_steps = 4000
agent1.twin_critic = true
agent1.action_input_scale = 0.5
train_steps_per_tick = 2
master1.noise_std = 0.0005
master2.noise_std = 0.0005
copilot.noise_std = 0.0005
)";

ScenarioConfig delay_task(std::uint64_t seed) {
    const std::string text = "scenario = triple-pilot-delay\nreference.radius = 0.25\n"
                             "reference.period = 3\nseed = " +
                             std::to_string(seed) + "\n" + kAgent1Tuning;
    return ScenarioConfig::from_config(Config::parse(text));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

} // namespace

TEST_CASE("restoration returns grow and the trained agent halves the delay error") {
    // five seeds of the delay-compensation task; tracks the greedy-policy
    // return over the first learning episodes plus the efficacy ratio
    std::vector<std::vector<double>> train_curves;
    std::vector<double> ratios;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ScenarioConfig sc = delay_task(seed);
        DdpgAgent a1(sc.agent1), a2(sc.agent2);
        ScenarioEngine engine(sc, a1, a2);
        std::vector<double> returns;
        for (int ep = 0; ep < sc.episodes; ++ep)
            returns.push_back(engine.run_episode(ep, true, false).return1);
        train_curves.push_back(returns);

        const EpisodeLog ev = engine.run_episode(2 * sc.episodes, false, false);
        const double r_mf = rmse(ev.x_mf, ev.x_mc).aggregate;
        const double r_d = rmse(ev.x_d, ev.x_mc).aggregate;
        ratios.push_back(r_mf / r_d);
    }

    // learning progress: the median return over consecutive five-episode
    // blocks increases strictly (per-episode returns are too noisy under the
    // exploration schedule for a stepwise claim)
    for (int block = 1; block < 4; ++block) {
        std::vector<double> prev, cur;
        for (const auto& c : train_curves) {
            double a = 0.0, b = 0.0;
            for (int ep = 0; ep < 5; ++ep) {
                a += c[(block - 1) * 5 + ep];
                b += c[block * 5 + ep];
            }
            prev.push_back(a / 5.0);
            cur.push_back(b / 5.0);
        }
        CHECK(median(cur) > median(prev));
    }

    // and the final five episodes beat the first five outright
    std::vector<double> gains;
    for (const auto& c : train_curves) {
        double head = 0.0, tail = 0.0;
        for (int ep = 0; ep < 5; ++ep) {
            head += c[ep];
            tail += c[c.size() - 5 + ep];
        }
        gains.push_back(tail - head);
    }
    CHECK(median(gains) > 0.0);

    // held-out delayed circle: restoration at least halves the tracking error
    CHECK(median(ratios) < 0.5);
}

TEST_CASE("arbitration returns improve across its training phase") {
    const std::string text = std::string("scenario = dual-pilot\nseed = 21\n") + kAgent1Tuning +
                             R"(
agent2.actor_lr = 1e-4
agent2.critic_lr = 1e-3
agent2.tau = 1e-2
agent2.actor_update_period = 2
agent2.actor_warmup = 8000
agent2.random_steps = 4000
agent2.random_epsilon = 0.08
agent2.twin_critic = true
agent2.actor_weight_decay = 3e-5
master1.error1.start = 5
master1.error1.end = 9
master1.error1.magnitude = 0.09 0.05 0
copilot.error1.start = 0.5
copilot.error1.end = 3.5
copilot.error1.magnitude = 0.07 0.055 0
)";
    const Config cfg = Config::with_override(Config::parse(text), "agent1.random_steps", "0");
    ScenarioConfig sc = ScenarioConfig::from_config(cfg);
    sc.episodes = 10; // reduced protocol keeps this suite quick
    DdpgAgent a1(sc.agent1), a2(sc.agent2);
    const TrainingCurves curves = train_agents(sc, a1, a2);
    REQUIRE(curves.returns2.size() == 10);
    double head = 0.0, tail = 0.0;
    for (int ep = 0; ep < 3; ++ep) {
        head += curves.returns2[ep];
        tail += curves.returns2[curves.returns2.size() - 3 + ep];
    }
    CHECK(tail > head);
}

TEST_CASE("with no delay to compensate the trained restorer keeps its hands still") {
    const std::string text = std::string("scenario = dual-pilot\nseed = 5\n") + kAgent1Tuning +
                             "channel.base_delay = 0\n";
    const Config cfg = Config::with_override(Config::parse(text), "agent1.random_steps", "0");
    ScenarioConfig sc = ScenarioConfig::from_config(cfg);
    sc.episodes = 8;
    DdpgAgent a1(sc.agent1), a2(sc.agent2);
    ScenarioEngine engine(sc, a1, a2);
    for (int ep = 0; ep < sc.episodes; ++ep) engine.run_episode(ep, true, false);

    const EpisodeLog ev = engine.run_episode(2 * sc.episodes, false, false);
    double mean_abs = 0.0;
    for (std::size_t i = 0; i < ev.t.size(); ++i)
        mean_abs += (ev.x_mf[i] - ev.x_d[i]).cwiseAbs().mean();
    mean_abs /= static_cast<double>(ev.t.size());
    CHECK(mean_abs < 0.05);
}

TEST_CASE("training diverging to non-finite weights is reported") {
    ScenarioConfig sc = delay_task(1);
    sc.episodes = 1;
    sc.steps = 50;
    DdpgAgent a1(sc.agent1), a2(sc.agent2);
    a1.actor().weights(0)[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train_agents(sc, a1, a2), std::runtime_error);
}
