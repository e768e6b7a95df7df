#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>
#include <complex>
#include <optional>
#include <vector>

#include "gridflow/errors.hpp"
#include "gridflow/fleet.hpp"

namespace gridflow {

/// Pi-model distribution line. Impedances are series values in per-unit;
/// b_shunt_pu is the total line charging susceptance (half at each end).
struct Line {
  int from = 0;
  int to = 0;
  double r_pu = 0.0;
  double x_pu = 0.0;
  double b_shunt_pu = 0.0;
};

/// Bus-admittance partition of an (N+1)-bus network with bus 0 as the
/// substation:
///
///   [ i0 ]   [ y0    ybar^T ] [ v0 ]
///   [ i  ] = [ ybar  Y      ] [ v  ]
///
/// Y is kept factorized for repeated power-flow solves.
struct NetworkModel {
  int n_buses = 0;  // N+1
  std::vector<Line> lines;
  std::complex<double> v0{1.0, 0.0};
  std::complex<double> y0{0.0, 0.0};
  Eigen::VectorXcd ybar;  // N
  Eigen::MatrixXcd Y;     // N x N
  double base_mva = 1.0;
  double base_kv = 20.0;

  Eigen::PartialPivLU<Eigen::MatrixXcd> Y_lu;

  int n() const { return n_buses - 1; }

  /// Nominal (zero-injection) voltage profile vbar = -Y^-1 ybar v0.
  Eigen::VectorXcd nominal_voltage() const { return Y_lu.solve(Eigen::VectorXcd(-ybar * v0)); }
};

NetworkModel build_admittance(const std::vector<Line>& lines, int n_buses,
                              std::complex<double> v0 = {1.0, 0.0}, double base_mva = 1.0,
                              double base_kv = 20.0);

struct PowerFlowSolution {
  Eigen::VectorXcd v;        // bus voltage phasors, buses 1..N
  Eigen::VectorXd nu;        // magnitudes |v_i|
  std::complex<double> s0;   // substation injection
  int iterations = 0;
  double residual = 0.0;
};

/// Fixed-point (Z-bus) solve of s = diag(v) (ybar* v0* + Y* v*), seeded at the
/// nominal profile so the iteration lands on the practical high-voltage branch.
PowerFlowSolution solve_power_flow(const NetworkModel& model, const Eigen::VectorXcd& s_net,
                                   std::optional<Eigen::VectorXcd> warm_start = std::nullopt,
                                   double tol_pf = 1e-10, int max_iter = 200);

/// Constant-coefficient voltage-magnitude model
///   nu_hat = rho_bar + R_bar * p_net + B_bar * q_net
/// built from the admittance partition around vbar, with the DER injection
/// maps Gamma_R, Gamma_B and the sensitivity J_hat restricted to the
/// monitored nodes.
struct LinearVoltageModel {
  Eigen::VectorXcd vbar;
  Eigen::VectorXd rho_bar;  // |vbar|
  Eigen::VectorXd a_bar;    // cos(angle(vbar))
  Eigen::VectorXd b_bar;    // sin(angle(vbar))
  Eigen::MatrixXd R_bar;    // N x N
  Eigen::MatrixXd B_bar;    // N x N
  Eigen::MatrixXd Gamma_R;  // N x 2G
  Eigen::MatrixXd Gamma_B;  // N x 2G
  std::vector<int> monitored;  // bus ids (1..N), row order of J_hat
  Eigen::MatrixXd J_hat;    // M x 2G

  int n_der() const { return static_cast<int>(Gamma_R.cols()) / 2; }
};

LinearVoltageModel build_linear_model(const NetworkModel& model, const DerFleet& fleet,
                                      const std::vector<int>& monitored);

/// Predicted magnitudes at the monitored nodes for setpoints u and
/// consumption-positive loads (loads enter as negative injections).
Eigen::VectorXd predict_voltages(const LinearVoltageModel& lin, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& p_l, const Eigen::VectorXd& q_l);

/// Same prediction over all buses 1..N.
Eigen::VectorXd predict_voltages_full(const LinearVoltageModel& lin, const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& p_l, const Eigen::VectorXd& q_l);

/// Central-difference Jacobian d|v_M|/du of the nonlinear power flow at u.
Eigen::MatrixXd finite_difference_jacobian(const NetworkModel& model, const DerFleet& fleet,
                                           const std::vector<int>& monitored,
                                           const Eigen::VectorXd& u, const Eigen::VectorXd& p_l,
                                           const Eigen::VectorXd& q_l, double step = 1e-5,
                                           std::optional<Eigen::VectorXcd> warm_start = std::nullopt);

struct ModelErrorSweep {
  double e_h_inf = 0.0;   // max over samples and nodes of |H_hat - H|
  double e_h_l2 = 0.0;    // max over samples of ||H_hat - H||_2 across nodes
  double e_j = 0.0;       // max over samples of ||J_hat - J_H||_2 (spectral)
  int samples = 0;
};

/// Samples the DER capability box (scaled by der_scale) against the nonlinear
/// power flow at the given load points and records the worst model and
/// Jacobian errors.
ModelErrorSweep linear_model_error_sweep(const NetworkModel& model, const LinearVoltageModel& lin,
                                         const DerFleet& fleet,
                                         const std::vector<Eigen::VectorXd>& p_loads,
                                         const std::vector<Eigen::VectorXd>& q_loads,
                                         int n_samples = 100, double der_scale = 1.0,
                                         uint64_t seed = 1, bool with_jacobian = true);

}  // namespace gridflow
