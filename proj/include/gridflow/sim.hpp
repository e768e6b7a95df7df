#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gridflow/baselines.hpp"
#include "gridflow/network.hpp"
#include "gridflow/opf.hpp"
#include "gridflow/scenario.hpp"
#include "gridflow/sgf.hpp"

namespace gridflow {

enum class ControllerKind { sgf, pdm, vvc, nc, bo };

ControllerKind controller_from_string(const std::string& name);
std::string to_string(ControllerKind kind);

/// Measurement layer: bounded uniform noise on [-bound, bound] per node, and
/// an optional set of nodes served by linear-model pseudo-measurements
/// instead of sensors.
struct MeasurementModel {
  double noise_bound_pu = 0.0;
  std::vector<int> pseudo_nodes;  // bus ids 1..N
};

struct SimOptions {
  ControllerKind controller = ControllerKind::sgf;
  SgfConfig sgf;
  PdmConfig pdm;
  VoltVarCurve vvc;
  ProtectionConfig protection;
  BatchConfig batch;
  bool exact_jacobian = false;  // recompute J_H by finite differences each tick
  double dt_control_s = 1.0;
  double clamp_tol = 1e-4;  // counted hardware-envelope violation threshold
  double pf_tol = 1e-10;
  int pf_max_iter = 200;
  uint64_t seed = 0;
  Eigen::VectorXd u0;  // initial setpoints; zeros if empty
};

struct StepRecord {
  double t = 0.0;
  Eigen::VectorXd nu;  // all buses 1..N
  Eigen::VectorXd u;   // implemented setpoints
  double cost = 0.0;
  double losses = 0.0;
  double p0 = 0.0;
  double q0 = 0.0;
  bool qp_ok = true;
  int clamped = 0;
};

struct OvervoltageDurations {
  Eigen::VectorXd max_run_per_node;   // in samples of the 10 s grid
  Eigen::VectorXd mean_run_per_node;  // mean run length per node (0 if none)
  double max_t = 0.0;                 // max over nodes of the max run
  double mean_t = 0.0;                // max over nodes of the mean run
};

struct SimulationMetrics {
  std::vector<StepRecord> steps;
  double dt_control_s = 1.0;
  double sample_period_s = 10.0;
  double cumulative_cost = 0.0;         // sum of C_p(u) * dt over the run
  double cumulative_losses_pu_h = 0.0;  // rectangle-rule energy losses
  double max_voltage = 0.0;
  double min_voltage = 0.0;
  long overvoltage_samples_10s = 0;  // node-samples above v_upper on the 10 s grid
  OvervoltageDurations durations;    // at alpha = v_upper on the 10 s grid
  long clamp_count = 0;
  int qp_infeasible_count = 0;
  int disconnect_events = 0;
  double v_upper = 1.05;
  double v_lower = 0.95;
};

/// Run-length statistics of samples strictly above alpha, per node.
/// nu_traces is T x N on the reporting (10 s) grid.
OvervoltageDurations compute_overvoltage_durations(const Eigen::MatrixXd& nu_traces, double alpha);

/// Total active-power loss from a converged solution: Re(s0) + sum Re(s_net).
double compute_losses(const PowerFlowSolution& pf, const Eigen::VectorXcd& s_net);

/// Closed-loop engine. Each control tick: hold loads from the scenario grid,
/// realize the commanded setpoints (hardware clamp counted, availability
/// curtailment not), solve the true power flow, form measurements, step the
/// selected controller, record metrics. Deterministic for a fixed seed.
SimulationMetrics run_simulation(const NetworkModel& model, const OpfProblem& problem,
                                 const ScenarioTimeSeries& scenario, const SimOptions& options,
                                 const MeasurementModel& measurement = {});

/// Voltage trace on the 10 s reporting grid (rows: scenario samples that fall
/// on recorded ticks).
Eigen::MatrixXd reporting_grid_voltages(const SimulationMetrics& metrics);

}  // namespace gridflow
