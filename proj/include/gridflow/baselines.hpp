#pragma once

#include <Eigen/Dense>
#include <deque>
#include <random>
#include <vector>

#include "gridflow/network.hpp"
#include "gridflow/opf.hpp"
#include "gridflow/sgf.hpp"

namespace gridflow {

/// Piecewise-linear Volt/Var droop, saturated outside the end points.
/// Defaults: full injection (+0.44) below 0.95 pu, deadband on [0.99, 1.01],
/// full absorption (-0.44) above 1.05 pu.
struct VoltVarCurve {
  std::array<double, 4> v_points{0.95, 0.99, 1.01, 1.05};
  std::array<double, 4> q_frac_points{0.44, 0.0, 0.0, -0.44};
};

/// Reactive setpoint q = s_n * interp(curve, v); active power is untouched.
double voltvar_q(const VoltVarCurve& curve, double v_measured, double s_n);

enum class DerStatus { running, idling, disconnected };

struct ProtectionConfig {
  double trip_instant_pu = 1.06;  // immediate disconnect threshold
  double trip_rms_pu = 1.05;      // 10-minute rms disconnect threshold
  double recover_pu = 1.05;       // must stay below this to leave disconnected
  double sample_period_s = 10.0;
  int rms_window_samples = 60;        // 10 minutes of 10 s samples
  int recover_samples = 6;            // 1 minute below recover_pu
  double reconnect_min_s = 60.0;      // uniform reconnect delay bounds
  double reconnect_max_s = 600.0;
};

/// Overvoltage disconnection automaton of one DER. Transitions:
///   running -> disconnected   v > 1.06, or full-window rms > 1.05
///   disconnected -> idling    v < 1.05 for 1 minute
///   idling -> running         after a uniform random delay in [1, 10] min
/// While idling or disconnected the DER injects nothing.
struct ProtectionState {
  DerStatus status = DerStatus::running;
  std::deque<double> window;      // rolling voltage samples, newest last
  int below_count = 0;            // consecutive samples below recover_pu
  double reconnect_delay_s = -1;  // drawn on entering idling
  double idle_elapsed_s = 0.0;
};

/// Advances one 10 s protection sample with the voltage at the point of
/// connection. The rng supplies the reconnect delay draw.
void protection_step(ProtectionState& state, double v_at_poc, std::mt19937_64& rng,
                     const ProtectionConfig& config = {});

struct PdmConfig {
  double alpha = 0.05;    // primal/dual step size
  double epsilon = 1e-3;  // dual regularization
  int proj_sweeps = 20;
};

struct PrimalDualState {
  Eigen::VectorXd u;         // 2G
  Eigen::VectorXd mu_upper;  // M, >= 0
  Eigen::VectorXd mu_lower;  // M, >= 0
};

/// Nearest-ish point of the capability set (disk ∩ [0,p_max] ∩ q-band) by
/// alternating box/disk projection; the final disk scaling guarantees exact
/// membership.
std::pair<double, double> project_capability(const DerDevice& device, double p, double q,
                                             int sweeps = 20);

/// Regularized online primal-dual update on the linear model: dual ascent on
/// the voltage limits, shrink by 1/(1+alpha*eps), then a projected primal
/// descent step on C_p + duals.
PrimalDualState primal_dual_step(const PrimalDualState& state, const Eigen::VectorXd& nu_measured,
                                 const Eigen::MatrixXd& jac, const OpfProblem& problem,
                                 const PdmConfig& config);

struct BatchConfig {
  double beta = 1.0;
  double step = 0.05;       // integration step of the error-free flow
  double tol_flow = 1e-8;   // stop when ||F_beta|| drops below this
  int max_iter = 20000;
  double fd_step = 1e-5;
  double tol_qp = 1e-10;
  int qp_max_iter = 400;
};

struct BatchResult {
  Eigen::VectorXd u;
  Eigen::VectorXd duals;  // QP multipliers at the final iterate
  KktReport kkt;
  int iterations = 0;
  bool converged = false;
  double flow_norm = 0.0;
};

/// Batch reference optimum: integrates the error-free safe flow (exact
/// voltages from the power flow, exact Jacobian by central differences)
/// until the flow direction vanishes; the limit is a KKT point of the OPF.
BatchResult batch_reference(const OpfProblem& problem, const NetworkModel& model,
                            const Eigen::VectorXd& p_l, const Eigen::VectorXd& q_l,
                            const Eigen::VectorXd& u0, const BatchConfig& config = {});

}  // namespace gridflow
