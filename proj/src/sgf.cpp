#include "gridflow/sgf.hpp"

namespace gridflow {

QpProblem build_sgf_qp(const OpfProblem& problem, const Eigen::MatrixXd& jac,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& nu_measured, double beta) {
  const int g = problem.n_der();
  const int m = problem.n_monitored();
  if (u.size() != 2 * g) throw DimensionMismatch("build_sgf_qp: u size != 2G");
  if (nu_measured.size() != m) throw DimensionMismatch("build_sgf_qp: nu size != M");
  if (jac.rows() != m || jac.cols() != 2 * g)
    throw DimensionMismatch("build_sgf_qp: jac must be M x 2G");

  QpProblem qp;
  qp.g = cost_gradient(problem, u);
  if (problem.cv_weight != 0.0)
    qp.g += jac.transpose() * voltage_cost_gradient(problem, nu_measured);

  const int kc = problem.n_constraints();
  qp.A = Eigen::MatrixXd::Zero(kc, 2 * g);
  qp.b.resize(kc);
  for (int i = 0; i < m; ++i) {
    qp.A.row(i) = -jac.row(i);
    qp.b(i) = -beta * (problem.v_lower - nu_measured(i));
    qp.A.row(m + i) = jac.row(i);
    qp.b(m + i) = -beta * (nu_measured(i) - problem.v_upper);
  }
  for (int i = 0; i < g; ++i) {
    const auto& d = problem.fleet.devices[i];
    const Eigen::Matrix<double, 5, 2> jl = constraint_jacobian(d, u(i), u(g + i));
    const Eigen::Matrix<double, 5, 1> ell = eval_constraints(d, u(i), u(g + i));
    for (int r = 0; r < 5; ++r) {
      const int row = 2 * m + 5 * i + r;
      qp.A(row, i) = jl(r, 0);
      qp.A(row, g + i) = jl(r, 1);
      qp.b(row) = -beta * ell(r);
    }
  }
  return qp;
}

SgfDirection sgf_direction(const OpfProblem& problem, const Eigen::MatrixXd& jac,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& nu_measured,
                           const SgfConfig& config) {
  const QpProblem qp = build_sgf_qp(problem, jac, u, nu_measured, config.beta);
  const QpSolution sol = qp_solve(qp, config.tol_qp, config.qp_max_iter);
  if (sol.status == QpStatus::infeasible)
    throw QpInfeasible("sgf_direction: safety-filter QP infeasible");
  return {sol.theta, sol.duals};
}

Eigen::VectorXd sgf_step(const Eigen::VectorXd& u, const SgfDirection& direction, double dt,
                         const SgfConfig& config) {
  if (dt <= 0.0) throw ConfigError("sgf_step: dt must be positive");
  return u + dt * config.eta * direction.theta;
}

Eigen::VectorXd generic_safe_flow(const GradFn& grad_f, const ConstraintFn& g,
                                  const ConstraintJacFn& jac_g, const Eigen::VectorXd& x,
                                  double beta, double tol_qp, int qp_max_iter) {
  QpProblem qp;
  qp.g = grad_f(x);
  const Eigen::VectorXd gx = g(x);
  qp.A = jac_g(x);
  if (qp.A.rows() != gx.size() || (qp.A.rows() > 0 && qp.A.cols() != x.size()))
    throw DimensionMismatch("generic_safe_flow: constraint Jacobian shape mismatch");
  qp.b = -beta * gx;
  const QpSolution sol = qp_solve(qp, tol_qp, qp_max_iter);
  if (sol.status == QpStatus::infeasible)
    throw QpInfeasible("generic_safe_flow: QP infeasible");
  return sol.theta;
}

}  // namespace gridflow
