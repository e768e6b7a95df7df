#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridflow/baselines.hpp"
#include "gridflow/io.hpp"
#include "gridflow/network.hpp"
#include "gridflow/opf.hpp"
#include "gridflow/qp.hpp"
#include "gridflow/scenario.hpp"
#include "gridflow/sgf.hpp"
#include "gridflow/sim.hpp"

namespace py = pybind11;
using namespace gridflow;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Voltage-safe OPF pursuit: network models, controllers and the closed-loop simulator";

  py::register_exception<DisconnectedNetwork>(m, "DisconnectedNetwork");
  py::register_exception<SingularY>(m, "SingularY");
  py::register_exception<PowerFlowDiverged>(m, "PowerFlowDiverged");
  py::register_exception<QpInfeasible>(m, "QpInfeasible");
  py::register_exception<QpMaxIterExceeded>(m, "QpMaxIterExceeded");

  py::class_<Line>(m, "Line")
      .def(py::init([](int from, int to, double r_pu, double x_pu, double b_shunt_pu) {
             return Line{from, to, r_pu, x_pu, b_shunt_pu};
           }),
           py::arg("from_bus"), py::arg("to_bus"), py::arg("r_pu"), py::arg("x_pu"),
           py::arg("b_shunt_pu") = 0.0)
      .def_readwrite("from_bus", &Line::from)
      .def_readwrite("to_bus", &Line::to)
      .def_readwrite("r_pu", &Line::r_pu)
      .def_readwrite("x_pu", &Line::x_pu)
      .def_readwrite("b_shunt_pu", &Line::b_shunt_pu);

  py::class_<NetworkModel>(m, "NetworkModel")
      .def_readonly("n_buses", &NetworkModel::n_buses)
      .def_readonly("v0", &NetworkModel::v0)
      .def_readonly("y0", &NetworkModel::y0)
      .def_readonly("ybar", &NetworkModel::ybar)
      .def_readonly("Y", &NetworkModel::Y)
      .def_readonly("base_mva", &NetworkModel::base_mva)
      .def_readonly("base_kv", &NetworkModel::base_kv)
      .def("nominal_voltage", &NetworkModel::nominal_voltage);

  py::class_<PowerFlowSolution>(m, "PowerFlowSolution")
      .def_readonly("v", &PowerFlowSolution::v)
      .def_readonly("nu", &PowerFlowSolution::nu)
      .def_readonly("s0", &PowerFlowSolution::s0)
      .def_readonly("iterations", &PowerFlowSolution::iterations)
      .def_readonly("residual", &PowerFlowSolution::residual);

  py::class_<LinearVoltageModel>(m, "LinearVoltageModel")
      .def_readonly("vbar", &LinearVoltageModel::vbar)
      .def_readonly("rho_bar", &LinearVoltageModel::rho_bar)
      .def_readonly("a_bar", &LinearVoltageModel::a_bar)
      .def_readonly("b_bar", &LinearVoltageModel::b_bar)
      .def_readonly("R_bar", &LinearVoltageModel::R_bar)
      .def_readonly("B_bar", &LinearVoltageModel::B_bar)
      .def_readonly("Gamma_R", &LinearVoltageModel::Gamma_R)
      .def_readonly("Gamma_B", &LinearVoltageModel::Gamma_B)
      .def_readonly("monitored", &LinearVoltageModel::monitored)
      .def_readonly("J_hat", &LinearVoltageModel::J_hat);

  py::class_<DerDevice>(m, "DerDevice")
      .def(py::init([](int node, double s_n, double p_max, double q_frac, double c_p, double c_q) {
             return DerDevice{node, s_n, p_max, q_frac, c_p, c_q};
           }),
           py::arg("node"), py::arg("s_n"), py::arg("p_max") = 0.0, py::arg("q_frac") = 0.44,
           py::arg("c_p") = 3.0, py::arg("c_q") = 1.0)
      .def_readwrite("node", &DerDevice::node)
      .def_readwrite("s_n", &DerDevice::s_n)
      .def_readwrite("p_max", &DerDevice::p_max)
      .def_readwrite("q_frac", &DerDevice::q_frac)
      .def_readwrite("c_p", &DerDevice::c_p)
      .def_readwrite("c_q", &DerDevice::c_q);

  py::class_<DerFleet>(m, "DerFleet")
      .def(py::init<>())
      .def(py::init([](std::vector<DerDevice> devices) {
             DerFleet f;
             f.devices = std::move(devices);
             return f;
           }),
           py::arg("devices"))
      .def_readwrite("devices", &DerFleet::devices)
      .def("size", &DerFleet::size);

  py::class_<OpfProblem>(m, "OpfProblem")
      .def(py::init<>())
      .def(py::init([](DerFleet fleet, double v_lower, double v_upper, std::vector<int> monitored,
                       double cv_weight) {
             return OpfProblem{std::move(fleet), v_lower, v_upper, std::move(monitored), cv_weight};
           }),
           py::arg("fleet"), py::arg("v_lower") = 0.95, py::arg("v_upper") = 1.05,
           py::arg("monitored") = std::vector<int>{}, py::arg("cv_weight") = 0.0)
      .def_readwrite("fleet", &OpfProblem::fleet)
      .def_readwrite("v_lower", &OpfProblem::v_lower)
      .def_readwrite("v_upper", &OpfProblem::v_upper)
      .def_readwrite("monitored", &OpfProblem::monitored)
      .def_readwrite("cv_weight", &OpfProblem::cv_weight);

  py::class_<KktReport>(m, "KktReport")
      .def_readonly("stationarity_residual", &KktReport::stationarity_residual)
      .def_readonly("primal_infeasibility", &KktReport::primal_infeasibility)
      .def_readonly("complementarity_residual", &KktReport::complementarity_residual)
      .def_readonly("active_set", &KktReport::active_set)
      .def_readonly("degenerate", &KktReport::degenerate)
      .def("max_residual", &KktReport::max_residual);

  py::class_<QpProblem>(m, "QpProblem")
      .def(py::init([](Eigen::VectorXd g, Eigen::MatrixXd A, Eigen::VectorXd b) {
             return QpProblem{std::move(g), std::move(A), std::move(b)};
           }),
           py::arg("g"), py::arg("A"), py::arg("b"))
      .def_readwrite("g", &QpProblem::g)
      .def_readwrite("A", &QpProblem::A)
      .def_readwrite("b", &QpProblem::b);

  py::enum_<QpStatus>(m, "QpStatus")
      .value("solved", QpStatus::solved)
      .value("infeasible", QpStatus::infeasible);

  py::class_<QpSolution>(m, "QpSolution")
      .def_readonly("theta", &QpSolution::theta)
      .def_readonly("duals", &QpSolution::duals)
      .def_readonly("stationarity_residual", &QpSolution::stationarity_residual)
      .def_readonly("feasibility_residual", &QpSolution::feasibility_residual)
      .def_readonly("complementarity_residual", &QpSolution::complementarity_residual)
      .def_readonly("status", &QpSolution::status)
      .def_readonly("iterations", &QpSolution::iterations);

  py::class_<SgfConfig>(m, "SgfConfig")
      .def(py::init<>())
      .def_readwrite("beta", &SgfConfig::beta)
      .def_readwrite("eta", &SgfConfig::eta)
      .def_readwrite("tol_qp", &SgfConfig::tol_qp)
      .def_readwrite("qp_max_iter", &SgfConfig::qp_max_iter);

  py::class_<SgfDirection>(m, "SgfDirection")
      .def_readonly("theta", &SgfDirection::theta)
      .def_readonly("duals", &SgfDirection::duals);

  py::class_<VoltVarCurve>(m, "VoltVarCurve")
      .def(py::init<>())
      .def_readwrite("v_points", &VoltVarCurve::v_points)
      .def_readwrite("q_frac_points", &VoltVarCurve::q_frac_points);

  py::class_<BatchConfig>(m, "BatchConfig")
      .def(py::init<>())
      .def_readwrite("beta", &BatchConfig::beta)
      .def_readwrite("step", &BatchConfig::step)
      .def_readwrite("tol_flow", &BatchConfig::tol_flow)
      .def_readwrite("max_iter", &BatchConfig::max_iter);

  py::class_<BatchResult>(m, "BatchResult")
      .def_readonly("u", &BatchResult::u)
      .def_readonly("duals", &BatchResult::duals)
      .def_readonly("kkt", &BatchResult::kkt)
      .def_readonly("iterations", &BatchResult::iterations)
      .def_readonly("converged", &BatchResult::converged)
      .def_readonly("flow_norm", &BatchResult::flow_norm);

  py::class_<ScenarioTimeSeries>(m, "ScenarioTimeSeries")
      .def(py::init<>())
      .def_readwrite("sample_period_s", &ScenarioTimeSeries::sample_period_s)
      .def_readwrite("p_load", &ScenarioTimeSeries::p_load)
      .def_readwrite("q_load", &ScenarioTimeSeries::q_load)
      .def_readwrite("p_avail", &ScenarioTimeSeries::p_avail)
      .def("samples", &ScenarioTimeSeries::samples)
      .def("duration_s", &ScenarioTimeSeries::duration_s);

  py::class_<SyntheticScenarioConfig>(m, "SyntheticScenarioConfig")
      .def(py::init<>())
      .def_readwrite("duration_h", &SyntheticScenarioConfig::duration_h)
      .def_readwrite("sample_period_s", &SyntheticScenarioConfig::sample_period_s)
      .def_readwrite("load_peak_total_pu", &SyntheticScenarioConfig::load_peak_total_pu)
      .def_readwrite("power_factor", &SyntheticScenarioConfig::power_factor)
      .def_readwrite("wiggle_amp", &SyntheticScenarioConfig::wiggle_amp)
      .def_readwrite("seed", &SyntheticScenarioConfig::seed);

  py::enum_<ControllerKind>(m, "ControllerKind")
      .value("sgf", ControllerKind::sgf)
      .value("pdm", ControllerKind::pdm)
      .value("vvc", ControllerKind::vvc)
      .value("nc", ControllerKind::nc)
      .value("bo", ControllerKind::bo);

  py::class_<MeasurementModel>(m, "MeasurementModel")
      .def(py::init<>())
      .def_readwrite("noise_bound_pu", &MeasurementModel::noise_bound_pu)
      .def_readwrite("pseudo_nodes", &MeasurementModel::pseudo_nodes);

  py::class_<SimOptions>(m, "SimOptions")
      .def(py::init<>())
      .def_readwrite("controller", &SimOptions::controller)
      .def_readwrite("sgf", &SimOptions::sgf)
      .def_readwrite("exact_jacobian", &SimOptions::exact_jacobian)
      .def_readwrite("dt_control_s", &SimOptions::dt_control_s)
      .def_readwrite("clamp_tol", &SimOptions::clamp_tol)
      .def_readwrite("seed", &SimOptions::seed)
      .def_readwrite("u0", &SimOptions::u0);

  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("t", &StepRecord::t)
      .def_readonly("nu", &StepRecord::nu)
      .def_readonly("u", &StepRecord::u)
      .def_readonly("cost", &StepRecord::cost)
      .def_readonly("losses", &StepRecord::losses)
      .def_readonly("p0", &StepRecord::p0)
      .def_readonly("q0", &StepRecord::q0)
      .def_readonly("qp_ok", &StepRecord::qp_ok)
      .def_readonly("clamped", &StepRecord::clamped);

  py::class_<OvervoltageDurations>(m, "OvervoltageDurations")
      .def_readonly("max_run_per_node", &OvervoltageDurations::max_run_per_node)
      .def_readonly("mean_run_per_node", &OvervoltageDurations::mean_run_per_node)
      .def_readonly("max_t", &OvervoltageDurations::max_t)
      .def_readonly("mean_t", &OvervoltageDurations::mean_t);

  py::class_<SimulationMetrics>(m, "SimulationMetrics")
      .def_readonly("steps", &SimulationMetrics::steps)
      .def_readonly("cumulative_cost", &SimulationMetrics::cumulative_cost)
      .def_readonly("cumulative_losses_pu_h", &SimulationMetrics::cumulative_losses_pu_h)
      .def_readonly("max_voltage", &SimulationMetrics::max_voltage)
      .def_readonly("min_voltage", &SimulationMetrics::min_voltage)
      .def_readonly("overvoltage_samples_10s", &SimulationMetrics::overvoltage_samples_10s)
      .def_readonly("durations", &SimulationMetrics::durations)
      .def_readonly("clamp_count", &SimulationMetrics::clamp_count)
      .def_readonly("qp_infeasible_count", &SimulationMetrics::qp_infeasible_count)
      .def_readonly("disconnect_events", &SimulationMetrics::disconnect_events);

  m.def("build_admittance", &build_admittance, py::arg("lines"), py::arg("n_buses"),
        py::arg("v0") = std::complex<double>(1.0, 0.0), py::arg("base_mva") = 1.0,
        py::arg("base_kv") = 20.0);
  m.def(
      "solve_power_flow",
      [](const NetworkModel& model, const Eigen::VectorXcd& s_net,
         std::optional<Eigen::VectorXcd> warm, double tol, int max_iter) {
        return solve_power_flow(model, s_net, std::move(warm), tol, max_iter);
      },
      py::arg("model"), py::arg("s_net"), py::arg("warm_start") = std::nullopt,
      py::arg("tol_pf") = 1e-10, py::arg("max_iter") = 200);
  m.def("build_linear_model", &build_linear_model, py::arg("model"), py::arg("fleet"),
        py::arg("monitored"));
  m.def("predict_voltages", &predict_voltages, py::arg("lin"), py::arg("u"), py::arg("p_l"),
        py::arg("q_l"));
  m.def(
      "finite_difference_jacobian",
      [](const NetworkModel& model, const DerFleet& fleet, const std::vector<int>& monitored,
         const Eigen::VectorXd& u, const Eigen::VectorXd& p_l, const Eigen::VectorXd& q_l,
         double step) { return finite_difference_jacobian(model, fleet, monitored, u, p_l, q_l, step); },
      py::arg("model"), py::arg("fleet"), py::arg("monitored"), py::arg("u"), py::arg("p_l"),
      py::arg("q_l"), py::arg("step") = 1e-5);
  m.def("net_injections", &net_injections, py::arg("fleet"), py::arg("u"), py::arg("p_l"),
        py::arg("q_l"));
  m.def("qp_solve", &qp_solve, py::arg("qp"), py::arg("tol") = 1e-8, py::arg("max_iter") = 200);
  m.def("eval_constraints", &eval_constraints, py::arg("device"), py::arg("p"), py::arg("q"));
  m.def("constraint_jacobian", &constraint_jacobian, py::arg("device"), py::arg("p"),
        py::arg("q"));
  m.def("eval_cost", &eval_cost, py::arg("problem"), py::arg("u"));
  m.def("cost_gradient", &cost_gradient, py::arg("problem"), py::arg("u"));
  m.def("kkt_residual", &kkt_residual, py::arg("problem"), py::arg("jac"), py::arg("u"),
        py::arg("nu"), py::arg("duals"));
  m.def("build_sgf_qp", &build_sgf_qp, py::arg("problem"), py::arg("jac"), py::arg("u"),
        py::arg("nu_measured"), py::arg("beta"));
  m.def("sgf_direction", &sgf_direction, py::arg("problem"), py::arg("jac"), py::arg("u"),
        py::arg("nu_measured"), py::arg("config"));
  m.def("generic_safe_flow", &generic_safe_flow, py::arg("grad_f"), py::arg("g"),
        py::arg("jac_g"), py::arg("x"), py::arg("beta"), py::arg("tol_qp") = 1e-8,
        py::arg("qp_max_iter") = 200);
  m.def("voltvar_q", &voltvar_q, py::arg("curve"), py::arg("v_measured"), py::arg("s_n"));
  m.def("batch_reference", &batch_reference, py::arg("problem"), py::arg("model"),
        py::arg("p_l"), py::arg("q_l"), py::arg("u0"), py::arg("config") = BatchConfig{});
  m.def("make_summer_scenario", &make_summer_scenario, py::arg("n_nodes"), py::arg("fleet"),
        py::arg("config") = SyntheticScenarioConfig{},
        py::arg("load_share") = std::vector<double>{});
  m.def("run_simulation", &run_simulation, py::arg("model"), py::arg("problem"),
        py::arg("scenario"), py::arg("options"), py::arg("measurement") = MeasurementModel{});
  m.def("compute_overvoltage_durations", &compute_overvoltage_durations, py::arg("nu_traces"),
        py::arg("alpha"));
  m.def("compute_losses", &compute_losses, py::arg("pf"), py::arg("s_net"));
  m.def("load_network", &load_network, py::arg("path"));
  m.def("load_fleet", &load_fleet, py::arg("path"), py::arg("base_mva"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
