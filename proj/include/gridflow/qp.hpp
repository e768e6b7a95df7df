#pragma once

#include <Eigen/Dense>

#include "gridflow/errors.hpp"

namespace gridflow {

/// Least-distance program with inequality constraints:
///   minimize ||theta + g||^2   subject to   A theta <= b.
/// A must have g.size() columns (k = 0 rows is allowed).
struct QpProblem {
  Eigen::VectorXd g;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

enum class QpStatus { solved, infeasible };

struct QpSolution {
  Eigen::VectorXd theta;
  Eigen::VectorXd duals;  // multipliers for the objective ||theta+g||^2, >= 0
  double stationarity_residual = 0.0;    // ||2(theta+g) + A^T duals||_inf
  double feasibility_residual = 0.0;     // max(0, max(A theta - b))
  double complementarity_residual = 0.0; // max |duals_k (A theta - b)_k|
  QpStatus status = QpStatus::solved;
  int iterations = 0;
};

/// Dual active-set solve. Starts from the unconstrained minimizer theta = -g
/// and adds violated constraints one at a time; constraints whose multiplier
/// would turn negative are dropped along the way. Ties in constraint selection
/// break toward the lowest constraint index. Returns status = infeasible on a
/// Farkas certificate; throws QpMaxIterExceeded if the iteration budget runs
/// out before the KKT residuals reach tol.
QpSolution qp_solve(const QpProblem& qp, double tol = 1e-8, int max_iter = 200);

}  // namespace gridflow
