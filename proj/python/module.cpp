// Python bindings for the core operations: filtering, the delayed channel,
// the DDPG agent, the control-loop pieces, the fuzzy force estimator and the
// scenario harness.
#include "multipilot/channel.hpp"
#include "multipilot/config.hpp"
#include "multipilot/control.hpp"
#include "multipilot/ddpg.hpp"
#include "multipilot/fuzzy.hpp"
#include "multipilot/kalman.hpp"
#include "multipilot/metrics.hpp"
#include "multipilot/operators.hpp"
#include "multipilot/plant.hpp"
#include "multipilot/scenario.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace multipilot;

PYBIND11_MODULE(_multipilot, m) {
    m.doc() = "multi-pilot teleoperation simulator core";

    py::class_<CartesianState>(m, "CartesianState")
        .def(py::init<>())
        .def_readwrite("pos", &CartesianState::pos)
        .def_readwrite("vel", &CartesianState::vel)
        .def_readwrite("acc", &CartesianState::acc);

    // --- kalman ---
    py::class_<GaussianLinearModel>(m, "GaussianLinearModel")
        .def(py::init<>())
        .def_readwrite("A", &GaussianLinearModel::A)
        .def_readwrite("C", &GaussianLinearModel::C)
        .def_readwrite("W", &GaussianLinearModel::W)
        .def_readwrite("R", &GaussianLinearModel::R)
        .def("validate", &GaussianLinearModel::validate);
    m.def("constant_jerk_model", &constant_jerk_model, py::arg("dt"), py::arg("jerk_std") = 1.0,
          py::arg("r") = 1e-6);
    m.def("constant_jerk_transition", &constant_jerk_transition, py::arg("dt"));

    py::class_<KalmanFilter>(m, "KalmanFilter")
        .def(py::init<GaussianLinearModel, const Eigen::Vector3d&, const Eigen::Matrix3d&>(),
             py::arg("model"), py::arg("x0") = Eigen::Vector3d::Zero().eval(),
             py::arg("P0") = (1e15 * Eigen::Matrix3d::Identity()).eval())
        .def("predict", &KalmanFilter::predict)
        .def("correct", &KalmanFilter::correct, py::arg("z"))
        .def("fuse_dual", &KalmanFilter::fuse_dual, py::arg("z1"), py::arg("z2"))
        .def("coast", &KalmanFilter::coast)
        .def_property_readonly("state", &KalmanFilter::state)
        .def_property_readonly("covariance", &KalmanFilter::covariance)
        .def_property_readonly("gain", &KalmanFilter::gain);

    // --- channel ---
    py::class_<ChannelConfig>(m, "ChannelConfig")
        .def(py::init<>())
        .def_readwrite("base_delay", &ChannelConfig::base_delay)
        .def_readwrite("jitter_std", &ChannelConfig::jitter_std)
        .def_readwrite("loss_prob", &ChannelConfig::loss_prob)
        .def_readwrite("seed", &ChannelConfig::seed)
        .def_readwrite("hold_last_sample", &ChannelConfig::hold_last_sample);
    py::class_<DelayChannel>(m, "DelayChannel")
        .def(py::init<ChannelConfig>())
        .def("send", &DelayChannel::send, py::arg("msg"), py::arg("t"))
        .def("recv_latest", &DelayChannel::recv_latest, py::arg("t"))
        .def_property_readonly("pending", &DelayChannel::pending)
        .def_property_readonly("sent_count", &DelayChannel::sent_count)
        .def_property_readonly("dropped_count", &DelayChannel::dropped_count);

    // --- DDPG ---
    py::class_<Transition>(m, "Transition")
        .def(py::init<>())
        .def_readwrite("s", &Transition::s)
        .def_readwrite("a", &Transition::a)
        .def_readwrite("r", &Transition::r)
        .def_readwrite("s_next", &Transition::s_next);
    py::class_<DdpgConfig>(m, "DdpgConfig")
        .def(py::init<>())
        .def_readwrite("state_dim", &DdpgConfig::state_dim)
        .def_readwrite("action_dim", &DdpgConfig::action_dim)
        .def_readwrite("critic_hidden", &DdpgConfig::critic_hidden)
        .def_readwrite("actor_hidden", &DdpgConfig::actor_hidden)
        .def_readwrite("action_lo", &DdpgConfig::action_lo)
        .def_readwrite("action_hi", &DdpgConfig::action_hi)
        .def_readwrite("gamma", &DdpgConfig::gamma)
        .def_readwrite("minibatch", &DdpgConfig::minibatch)
        .def_readwrite("buffer_capacity", &DdpgConfig::buffer_capacity)
        .def_readwrite("noise_var", &DdpgConfig::noise_var)
        .def_readwrite("noise_decay", &DdpgConfig::noise_decay)
        .def_readwrite("tau", &DdpgConfig::tau)
        .def_readwrite("actor_lr", &DdpgConfig::actor_lr)
        .def_readwrite("critic_lr", &DdpgConfig::critic_lr)
        .def_readwrite("seed", &DdpgConfig::seed);
    py::class_<DdpgAgent>(m, "DdpgAgent")
        .def(py::init<DdpgConfig>())
        .def(
            "act",
            [](DdpgAgent& a, const std::vector<double>& s, bool explore) {
                return a.act(s, explore);
            },
            py::arg("s"), py::arg("explore") = false)
        .def("critic_value",
             [](const DdpgAgent& a, const std::vector<double>& s,
                const std::vector<double>& act) { return a.critic_value(s, act); })
        .def("push", &DdpgAgent::push)
        .def("sample", &DdpgAgent::sample)
        .def("train_step", py::overload_cast<>(&DdpgAgent::train_step))
        .def("buffer_size", &DdpgAgent::buffer_size)
        .def("noise_variance", &DdpgAgent::noise_variance)
        .def("save", py::overload_cast<const std::string&>(&DdpgAgent::save, py::const_))
        .def_static("load", &DdpgAgent::load_file);

    // --- control pieces ---
    m.def("tracking_reward", py::overload_cast<double>(&tracking_reward), py::arg("e"));
    m.def("tracking_reward_vec", py::overload_cast<const Eigen::Vector3d&>(&tracking_reward),
          py::arg("e"));
    py::class_<ArbitrationWeights>(m, "ArbitrationWeights")
        .def_static("balanced", &ArbitrationWeights::balanced)
        .def_static("master_oriented", &ArbitrationWeights::master_oriented)
        .def("set", &ArbitrationWeights::set)
        .def_readwrite("diag", &ArbitrationWeights::diag)
        .def_readonly("lo", &ArbitrationWeights::lo)
        .def_readonly("hi", &ArbitrationWeights::hi);
    m.def("arbitrate", &arbitrate, py::arg("weights"), py::arg("x_cpf"), py::arg("x_mf"));
    m.def("restore_state", &restore_state);
    m.def("apply_restore", [](const CartesianState& d, const std::vector<double>& a) {
        return apply_restore(d, a);
    });
    m.def("arbitration_state", &arbitration_state);

    // --- plant & operators ---
    py::class_<PidGains>(m, "PidGains")
        .def(py::init<>())
        .def_readwrite("kp", &PidGains::kp)
        .def_readwrite("ki", &PidGains::ki)
        .def_readwrite("kd", &PidGains::kd);
    py::class_<EnvironmentModel>(m, "EnvironmentModel")
        .def(py::init<>())
        .def_readwrite("stiffness", &EnvironmentModel::stiffness)
        .def_readwrite("damping", &EnvironmentModel::damping)
        .def_readwrite("normal", &EnvironmentModel::normal)
        .def_readwrite("plane_offset", &EnvironmentModel::plane_offset)
        .def("penetration", &EnvironmentModel::penetration);
    py::class_<SlavePlant>(m, "SlavePlant")
        .def(py::init<PidGains, EnvironmentModel, CartesianState>(), py::arg("gains"),
             py::arg("env"), py::arg("x0") = CartesianState{})
        .def("step", &SlavePlant::step, py::arg("cmd"), py::arg("dt"))
        .def("reset", &SlavePlant::reset)
        .def_property_readonly("state", &SlavePlant::state);

    py::class_<ErrorWindow>(m, "ErrorWindow")
        .def(py::init<>())
        .def_readwrite("start", &ErrorWindow::start)
        .def_readwrite("end", &ErrorWindow::end)
        .def_readwrite("magnitude", &ErrorWindow::magnitude);
    py::class_<OperatorProfile>(m, "OperatorProfile")
        .def(py::init<>())
        .def_readwrite("radius", &OperatorProfile::radius)
        .def_readwrite("period", &OperatorProfile::period)
        .def_readwrite("center", &OperatorProfile::center)
        .def_readwrite("phase", &OperatorProfile::phase)
        .def_readwrite("noise_std", &OperatorProfile::noise_std)
        .def_readwrite("seed", &OperatorProfile::seed)
        .def_readwrite("windows", &OperatorProfile::windows);
    py::class_<ScriptedOperator>(m, "ScriptedOperator")
        .def(py::init<OperatorProfile>())
        .def("sample", &ScriptedOperator::sample, py::arg("t"));
    m.def("circle_reference", &circle_reference, py::arg("profile"), py::arg("t"));

    // --- fuzzy force estimation ---
    py::class_<PreprocessModel>(m, "PreprocessModel")
        .def_readonly("mean", &PreprocessModel::mean)
        .def_readonly("stddev", &PreprocessModel::stddev)
        .def_readonly("projection", &PreprocessModel::projection)
        .def("zscore", &PreprocessModel::zscore)
        .def("apply", &PreprocessModel::apply);
    m.def("preprocess_fit", &preprocess_fit, py::arg("X"), py::arg("labels"),
          py::arg("max_dims") = -1);
    py::class_<SubtractiveOptions>(m, "SubtractiveOptions")
        .def(py::init<>())
        .def_readwrite("radius", &SubtractiveOptions::radius)
        .def_readwrite("squash", &SubtractiveOptions::squash)
        .def_readwrite("accept_ratio", &SubtractiveOptions::accept_ratio)
        .def_readwrite("reject_ratio", &SubtractiveOptions::reject_ratio);
    m.def("subtractive_cluster", &subtractive_cluster, py::arg("X"), py::arg("options"));
    py::class_<FcmResult>(m, "FcmResult")
        .def_readonly("centers", &FcmResult::centers)
        .def_readonly("memberships", &FcmResult::memberships)
        .def_readonly("objective_trace", &FcmResult::objective_trace)
        .def_readonly("iterations", &FcmResult::iterations);
    m.def(
        "fcm",
        [](const Eigen::MatrixXd& X, int p, double fuzzifier) { return fcm(X, p, fuzzifier); },
        py::arg("X"), py::arg("clusters"), py::arg("fuzzifier") = 2.0);
    py::class_<FuzzyModelConfig>(m, "FuzzyModelConfig")
        .def(py::init<>())
        .def_readwrite("m", &FuzzyModelConfig::m)
        .def_readwrite("fou_delta", &FuzzyModelConfig::fou_delta)
        .def_readwrite("b_lower", &FuzzyModelConfig::b_lower)
        .def_readwrite("b_upper", &FuzzyModelConfig::b_upper)
        .def_readwrite("sigma", &FuzzyModelConfig::sigma)
        .def_readwrite("cluster_radius", &FuzzyModelConfig::cluster_radius)
        .def_readwrite("update_gate", &FuzzyModelConfig::update_gate);
    py::class_<FuzzyModel>(m, "FuzzyModel")
        .def_static("fit", &FuzzyModel::fit, py::arg("states"), py::arg("forces"),
                    py::arg("labels"), py::arg("config") = FuzzyModelConfig{})
        .def("predict", &FuzzyModel::predict)
        .def("update", &FuzzyModel::update)
        .def("firing_interval", &FuzzyModel::firing_interval)
        .def("crisp_memberships", &FuzzyModel::crisp_memberships)
        .def("rule_count", &FuzzyModel::rule_count)
        .def_property_readonly("preprocess", &FuzzyModel::preprocess)
        .def("save", py::overload_cast<const std::string&>(&FuzzyModel::save, py::const_))
        .def_static("load", &FuzzyModel::load_file);

    // --- metrics & harness ---
    m.def("rmse", [](const std::vector<double>& a, const std::vector<double>& b) {
        return rmse(std::span<const double>(a), std::span<const double>(b));
    });
    py::class_<RunReport>(m, "RunReport")
        .def_readonly("values", &RunReport::values)
        .def_readonly("gate_lines", &RunReport::gate_lines)
        .def_readonly("gates_passed", &RunReport::gates_passed)
        .def("value", &RunReport::value)
        .def("summary", &RunReport::summary);
    m.def(
        "run_scenario_file",
        [](const std::string& config_path, const std::string& checkpoint_dir,
           const std::string& out_dir) {
            const Config raw = Config::parse_file(config_path);
            const ScenarioConfig sc = ScenarioConfig::from_config(raw);
            DdpgAgent a1 = DdpgAgent::load_file(checkpoint_dir + "/ddpg1.ckpt");
            DdpgAgent a2 = DdpgAgent::load_file(checkpoint_dir + "/ddpg2.ckpt");
            return run_scenario(sc, a1, a2, nullptr, out_dir, "");
        },
        py::arg("config_path"), py::arg("checkpoint_dir"), py::arg("out_dir") = "");
    m.def(
        "train_agents_file",
        [](const std::string& config_path, const std::string& out_dir) {
            const Config raw = Config::parse_file(config_path);
            const ScenarioConfig sc = ScenarioConfig::from_config(raw);
            DdpgAgent a1(sc.agent1), a2(sc.agent2);
            const TrainingCurves curves = train_agents(sc, a1, a2, out_dir);
            return py::make_tuple(curves.returns1, curves.returns2);
        },
        py::arg("config_path"), py::arg("out_dir"));

    m.attr("__version__") = "0.1.0";
}
