#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gridflow/opf.hpp"
#include "gridflow/qp.hpp"

namespace gridflow {

struct SgfConfig {
  double beta = 1.0;    // barrier gain
  double eta = 0.05;    // controller gain
  double tol_qp = 1e-8;
  int qp_max_iter = 200;
};

struct SgfDirection {
  Eigen::VectorXd theta;  // filtered descent direction, length 2G
  Eigen::VectorXd duals;  // QP multipliers in constraint row order
};

/// Assembles the per-step safety-filter QP:
///   min ||theta + grad C_p(u) + jac^T grad C_v(nu)||^2
///   s.t. -jac_i theta <= -beta (v_lower - nu_i)   for each monitored node
///         jac_i theta <= -beta (nu_i - v_upper)
///         J_ell_i theta <= -beta ell_i(p_i, q_i)  for each DER
/// Row order matches kkt_residual / constraint_name.
QpProblem build_sgf_qp(const OpfProblem& problem, const Eigen::MatrixXd& jac,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& nu_measured, double beta);

/// Solves the safety-filter QP at (u, measured voltages). jac is the voltage
/// sensitivity used by the controller (constant J_hat in the deployed form,
/// or a finite-difference J_H in the error-free form). Throws QpInfeasible.
SgfDirection sgf_direction(const OpfProblem& problem, const Eigen::MatrixXd& jac,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& nu_measured,
                           const SgfConfig& config);

/// Forward-Euler setpoint update u + dt * eta * theta.
Eigen::VectorXd sgf_step(const Eigen::VectorXd& u, const SgfDirection& direction, double dt,
                         const SgfConfig& config);

using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ConstraintFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ConstraintJacFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// General safe flow for min f(x) s.t. g(x) <= 0:
///   F_beta(x) = argmin_theta 0.5 ||theta + grad f(x)||^2
///               s.t. (dg/dx) theta <= -beta g(x).
Eigen::VectorXd generic_safe_flow(const GradFn& grad_f, const ConstraintFn& g,
                                  const ConstraintJacFn& jac_g, const Eigen::VectorXd& x,
                                  double beta, double tol_qp = 1e-8, int qp_max_iter = 200);

}  // namespace gridflow
