#include "gridflow/opf.hpp"

#include <cmath>

namespace gridflow {

Eigen::Matrix<double, 5, 1> eval_constraints(const DerDevice& d, double p, double q) {
  Eigen::Matrix<double, 5, 1> ell;
  ell << p * p + q * q - d.s_n * d.s_n,  //
      p - d.p_max,                       //
      -p,                                //
      -d.q_frac * d.s_n - q,             //
      q - d.q_frac * d.s_n;
  return ell;
}

Eigen::Matrix<double, 5, 2> constraint_jacobian(const DerDevice&, double p, double q) {
  Eigen::Matrix<double, 5, 2> jac;
  jac << 2.0 * p, 2.0 * q,  //
      1.0, 0.0,             //
      -1.0, 0.0,            //
      0.0, -1.0,            //
      0.0, 1.0;
  return jac;
}

double eval_cost(const OpfProblem& problem, const Eigen::VectorXd& u) {
  const int g = problem.n_der();
  if (u.size() != 2 * g) throw DimensionMismatch("eval_cost: u size != 2G");
  double cost = 0.0;
  for (int i = 0; i < g; ++i) {
    const auto& d = problem.fleet.devices[i];
    const double cp = (d.s_n - u(i)) / d.s_n;
    const double cq = u(g + i) / d.s_n;
    cost += d.c_p * cp * cp + d.c_q * cq * cq;
  }
  return cost;
}

Eigen::VectorXd cost_gradient(const OpfProblem& problem, const Eigen::VectorXd& u) {
  const int g = problem.n_der();
  if (u.size() != 2 * g) throw DimensionMismatch("cost_gradient: u size != 2G");
  Eigen::VectorXd grad(2 * g);
  for (int i = 0; i < g; ++i) {
    const auto& d = problem.fleet.devices[i];
    grad(i) = -2.0 * d.c_p * (d.s_n - u(i)) / (d.s_n * d.s_n);
    grad(g + i) = 2.0 * d.c_q * u(g + i) / (d.s_n * d.s_n);
  }
  return grad;
}

double eval_voltage_cost(const OpfProblem& problem, const Eigen::VectorXd& nu) {
  return problem.cv_weight * (nu.array() - 1.0).square().sum();
}

Eigen::VectorXd voltage_cost_gradient(const OpfProblem& problem, const Eigen::VectorXd& nu) {
  return 2.0 * problem.cv_weight * (nu.array() - 1.0).matrix();
}

Eigen::VectorXd constraint_values(const OpfProblem& problem, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& nu) {
  const int g = problem.n_der();
  const int m = problem.n_monitored();
  if (u.size() != 2 * g) throw DimensionMismatch("constraint_values: u size != 2G");
  if (nu.size() != m) throw DimensionMismatch("constraint_values: nu size != M");
  Eigen::VectorXd vals(problem.n_constraints());
  for (int i = 0; i < m; ++i) vals(i) = problem.v_lower - nu(i);
  for (int i = 0; i < m; ++i) vals(m + i) = nu(i) - problem.v_upper;
  for (int i = 0; i < g; ++i)
    vals.segment<5>(2 * m + 5 * i) =
        eval_constraints(problem.fleet.devices[i], u(i), u(g + i));
  return vals;
}

std::string constraint_name(const OpfProblem& problem, int k) {
  const int m = problem.n_monitored();
  if (k < m) return "v_lo[" + std::to_string(problem.monitored[k]) + "]";
  if (k < 2 * m) return "v_up[" + std::to_string(problem.monitored[k - m]) + "]";
  const int i = (k - 2 * m) / 5;
  static const char* part[5] = {"cap", "pmax", "pmin", "qmin", "qmax"};
  return "der[" + std::to_string(i) + "]." + part[(k - 2 * m) % 5];
}

KktReport kkt_residual(const OpfProblem& problem, const Eigen::MatrixXd& jac,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& nu,
                       const Eigen::VectorXd& duals) {
  const int g = problem.n_der();
  const int m = problem.n_monitored();
  const int kc = problem.n_constraints();
  if (jac.rows() != m || jac.cols() != 2 * g)
    throw DimensionMismatch("kkt_residual: jac must be M x 2G");
  if (duals.size() != kc) throw DimensionMismatch("kkt_residual: duals size != constraint count");
  for (int i = 0; i < kc; ++i)
    if (duals(i) < 0.0) throw NegativeDual("kkt_residual: dual " + std::to_string(i) + " negative");

  const Eigen::VectorXd vals = constraint_values(problem, u, nu);

  Eigen::VectorXd stat = cost_gradient(problem, u);
  if (problem.cv_weight != 0.0) stat += jac.transpose() * voltage_cost_gradient(problem, nu);
  for (int i = 0; i < m; ++i) {
    stat -= duals(i) * jac.row(i).transpose();          // grad of (v_lower - nu_i)
    stat += duals(m + i) * jac.row(i).transpose();      // grad of (nu_i - v_upper)
  }
  for (int i = 0; i < g; ++i) {
    const Eigen::Matrix<double, 5, 2> jl =
        constraint_jacobian(problem.fleet.devices[i], u(i), u(g + i));
    for (int r = 0; r < 5; ++r) {
      const double y = duals(2 * m + 5 * i + r);
      stat(i) += y * jl(r, 0);
      stat(g + i) += y * jl(r, 1);
    }
  }

  KktReport rep;
  rep.stationarity_residual = stat.lpNorm<Eigen::Infinity>();
  rep.primal_infeasibility = std::max(0.0, vals.maxCoeff());
  rep.complementarity_residual = duals.cwiseProduct(vals).cwiseAbs().maxCoeff();
  for (int kidx = 0; kidx < kc; ++kidx) {
    if (vals(kidx) > -1e-6) rep.active_set.push_back(constraint_name(problem, kidx));
    if (std::abs(vals(kidx)) < 1e-6 && duals(kidx) < 1e-6)
      rep.degenerate.push_back(constraint_name(problem, kidx));
  }
  return rep;
}

}  // namespace gridflow
