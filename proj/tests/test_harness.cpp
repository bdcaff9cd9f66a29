#include "multipilot/config.hpp"
#include "multipilot/csv.hpp"
#include "multipilot/metrics.hpp"
#include "multipilot/scenario.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

using namespace multipilot;

namespace {

std::string temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("multipilot_test_" + tag);
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

constexpr const char* kDualConfig = R"(
scenario = dual-pilot
seed = 7
dt = 0.01
episodes = 2
steps = 300
master1.noise_std = 0.001
master1.error1.start = 0.5
master1.error1.end = 1.2
master1.error1.magnitude = 0.05 0 0
copilot.noise_std = 0.001
copilot.error1.start = 2.0
copilot.error1.end = 2.5
copilot.error1.magnitude = 0 -0.04 0
)";

} // namespace

TEST_CASE("rmse of identical signals is zero") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(rmse(a, a) == 0.0);
}

TEST_CASE("rmse of a constant offset is the offset") {
    std::vector<double> a(37, 0.25), b(37, 0.25 + 0.4);
    CHECK(rmse(a, b) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("rmse matches the direct formula on random signals") {
    Rng rng(12);
    std::vector<double> a, b;
    for (int i = 0; i < 500; ++i) {
        a.push_back(rng.gaussian());
        b.push_back(rng.gaussian());
    }
    CHECK(std::abs(rmse(a, b) - oracle::rmse_direct(a, b)) < 1e-12);
}

TEST_CASE("rmse rejects mismatched or empty signals") {
    const std::vector<double> a{1.0, 2.0};
    const std::vector<double> b{1.0};
    CHECK_THROWS_AS(rmse(a, b), std::invalid_argument);
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("config parses dotted keys, comments and vectors") {
    const Config cfg = Config::parse(R"(
# a comment
scenario = dual-pilot
channel.base_delay = 0.5   # trailing comment
env.normal = 0 0 1
flag = true
)");
    CHECK(cfg.get_string("scenario", "") == "dual-pilot");
    CHECK(cfg.get_double("channel.base_delay", 0.0) == 0.5);
    CHECK(cfg.get_vec3("env.normal", Eigen::Vector3d::Zero()) == Eigen::Vector3d(0, 0, 1));
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_double("missing", 1.25) == 1.25);
}

TEST_CASE("config rejects duplicates and malformed lines") {
    CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse("not a key value line\n"), std::invalid_argument);
    const Config cfg = Config::parse("x = abc\n");
    CHECK_THROWS_AS(cfg.get_double("x", 0.0), std::invalid_argument);
}

TEST_CASE("config override replaces the key and changes the hash") {
    const Config cfg = Config::parse("seed = 1\nother = 2\n");
    const Config patched = Config::with_override(cfg, "seed", "42");
    CHECK(patched.get_u64("seed", 0) == 42);
    CHECK(patched.get_int("other", 0) == 2);
    CHECK(patched.hash() != cfg.hash());
}

TEST_CASE("scenario config wires the documented keys") {
    const Config raw = Config::parse(kDualConfig);
    const ScenarioConfig sc = ScenarioConfig::from_config(raw);
    CHECK(sc.kind == ScenarioConfig::Kind::DualPilot);
    CHECK(sc.masters.size() == 1);
    CHECK(sc.masters[0].windows.size() == 1);
    CHECK(sc.copilot.windows.size() == 1);
    CHECK(sc.forward_channel.base_delay == 0.0);
    CHECK(sc.agent1.gamma == 0.99);
    CHECK(sc.agent2.action_hi == 1.0);

    // triple-pilot defaults: half-second channel each way
    const Config raw3 = Config::parse("scenario = triple-pilot-delay\n");
    const ScenarioConfig sc3 = ScenarioConfig::from_config(raw3);
    CHECK(sc3.masters.size() == 2);
    CHECK(sc3.forward_channel.base_delay == 0.5);
    CHECK(sc3.backward_channel.base_delay == 0.5);

    const Config raw_mo =
        Config::parse("scenario = triple-pilot-delay\narbitration.mode = master-oriented\n");
    CHECK(ScenarioConfig::from_config(raw_mo).agent2.action_hi == 0.5);
}

TEST_CASE("overlapping operator error windows fail config validation") {
    const Config raw = Config::parse(R"(
scenario = dual-pilot
master1.error1.start = 1.0
master1.error1.end = 3.0
master1.error2.start = 2.0
master1.error2.end = 4.0
)");
    CHECK_THROWS_AS(ScenarioConfig::from_config(raw), std::invalid_argument);
}

TEST_CASE("episode duration consistency is enforced") {
    const Config bad = Config::parse("steps = 2000\ndt = 0.01\nepisode_duration = 10\n");
    CHECK_THROWS_AS(ScenarioConfig::from_config(bad), std::invalid_argument);
    const Config good = Config::parse("steps = 2000\ndt = 0.01\nepisode_duration = 20\n");
    CHECK(ScenarioConfig::from_config(good).steps == 2000);
}

TEST_CASE("identical seeds produce byte-identical tick logs") {
    const Config raw = Config::parse(kDualConfig);
    ScenarioConfig sc = ScenarioConfig::from_config(raw);
    sc.episodes = 1;
    sc.steps = 200;

    auto run_once = [&sc](const std::string& dir) {
        DdpgAgent a1(sc.agent1), a2(sc.agent2);
        run_scenario(sc, a1, a2, nullptr, dir, "abc");
        return read_file(dir + "/ticks.csv");
    };
    const std::string d1 = temp_dir("det1"), d2 = temp_dir("det2");
    CHECK(run_once(d1) == run_once(d2));
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
}

TEST_CASE("the report recomputed from the CSV matches the run report") {
    const Config raw = Config::parse(kDualConfig);
    ScenarioConfig sc = ScenarioConfig::from_config(raw);
    sc.episodes = 1;
    sc.steps = 200;
    DdpgAgent a1(sc.agent1), a2(sc.agent2);
    const std::string dir = temp_dir("report");
    const RunReport rep = run_scenario(sc, a1, a2, nullptr, dir, "xyz");

    const RunReport again = report_from_log(dir + "/ticks.csv", sc.kind, sc.master_oriented);
    REQUIRE(again.values.size() == rep.values.size());
    for (std::size_t i = 0; i < rep.values.size(); ++i) {
        CHECK(again.values[i].first == rep.values[i].first);
        CHECK(again.values[i].second == rep.values[i].second);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("force dataset generation is reproducible and labeled per class") {
    ForceScenarioConfig fc;
    fc.trials = 4;
    fc.samples_per_trial = 40;
    fc.seed = 5;
    const ForceDataset a = generate_force_dataset(fc);
    const ForceDataset b = generate_force_dataset(fc);
    CHECK(a.states == b.states);
    CHECK(a.forces == b.forces);
    CHECK(a.labels == b.labels);
    CHECK(a.states.rows() == 3 * 4 * 40);

    // stiffer classes push back harder at comparable penetrations
    double mean_f[3] = {0.0, 0.0, 0.0};
    int count[3] = {0, 0, 0};
    for (int i = 0; i < a.forces.rows(); ++i) {
        mean_f[a.labels[i]] += std::abs(a.forces(i, 2));
        count[a.labels[i]]++;
    }
    for (int c = 0; c < 3; ++c) mean_f[c] /= count[c];
    CHECK(mean_f[0] < mean_f[1]);
    CHECK(mean_f[1] < mean_f[2]);
}

TEST_CASE("force split keeps the configured number of training trials per class") {
    ForceScenarioConfig fc;
    fc.trials = 6;
    fc.train_trials = 2;
    fc.samples_per_trial = 20;
    const ForceDataset all = generate_force_dataset(fc);
    ForceDataset train, test;
    split_force_dataset(fc, all, train, test);
    CHECK(train.states.rows() == 3 * 2 * 20);
    CHECK(test.states.rows() == 3 * 4 * 20);
    // disjoint trials
    std::set<int> train_ids(train.trial_ids.begin(), train.trial_ids.end());
    for (const int id : test.trial_ids) CHECK(train_ids.count(id) == 0);
}
