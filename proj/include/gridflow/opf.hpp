#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gridflow/fleet.hpp"

namespace gridflow {

/// OPF problem data: fleet, voltage limits, monitored nodes, cost selector.
/// The cost is C_p(u) = sum_i c_p ((s_n,i - p_i)/s_n,i)^2 + c_q (q_i/s_n,i)^2
/// plus an optional quadratic voltage penalty cv_weight * sum_i (nu_i - 1)^2
/// (off by default).
struct OpfProblem {
  DerFleet fleet;
  double v_lower = 0.95;
  double v_upper = 1.05;
  std::vector<int> monitored;  // bus ids 1..N, ascending
  double cv_weight = 0.0;

  int n_der() const { return fleet.size(); }
  int n_monitored() const { return static_cast<int>(monitored.size()); }
  /// Constraint count of the QP/KKT system: 2M voltage rows + 5 rows per DER.
  int n_constraints() const { return 2 * n_monitored() + 5 * n_der(); }
};

/// Capability constraints of one DER, entry-wise <= 0 iff (p,q) is admissible:
/// [p^2+q^2-s_n^2, p-p_max, -p, -q_frac*s_n-q, q-q_frac*s_n].
Eigen::Matrix<double, 5, 1> eval_constraints(const DerDevice& device, double p, double q);

/// Jacobian of eval_constraints with respect to (p, q).
Eigen::Matrix<double, 5, 2> constraint_jacobian(const DerDevice& device, double p, double q);

double eval_cost(const OpfProblem& problem, const Eigen::VectorXd& u);
Eigen::VectorXd cost_gradient(const OpfProblem& problem, const Eigen::VectorXd& u);

/// Optional voltage cost C_v(nu) = cv_weight * sum (nu_i - 1)^2 and gradient.
double eval_voltage_cost(const OpfProblem& problem, const Eigen::VectorXd& nu);
Eigen::VectorXd voltage_cost_gradient(const OpfProblem& problem, const Eigen::VectorXd& nu);

struct KktReport {
  double stationarity_residual = 0.0;
  double primal_infeasibility = 0.0;
  double complementarity_residual = 0.0;
  std::vector<std::string> active_set;
  /// Constraints with both |g_k| and y_k below 1e-6 (near-degenerate).
  std::vector<std::string> degenerate;

  double max_residual() const {
    return std::max({stationarity_residual, primal_infeasibility, complementarity_residual});
  }
};

/// KKT residuals of the OPF at (u, duals) given voltages nu at the monitored
/// nodes and a voltage sensitivity jac = d nu / d u (M x 2G). Constraint order
/// matches the controller QP: voltage-lower by node, voltage-upper by node,
/// then the 5 capability rows per DER.
KktReport kkt_residual(const OpfProblem& problem, const Eigen::MatrixXd& jac,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& nu,
                       const Eigen::VectorXd& duals);

/// Constraint values g(u, nu) in the KKT/QP row order.
Eigen::VectorXd constraint_values(const OpfProblem& problem, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& nu);

/// Human-readable id of constraint row k in the KKT/QP row order.
std::string constraint_name(const OpfProblem& problem, int k);

}  // namespace gridflow
