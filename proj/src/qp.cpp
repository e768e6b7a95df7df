#include "gridflow/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gridflow {

namespace {

constexpr double kBlockEps = 1e-12;

void fill_residuals(const QpProblem& qp, QpSolution& sol) {
  Eigen::VectorXd grad = 2.0 * (sol.theta + qp.g);
  if (qp.A.rows() > 0) grad += qp.A.transpose() * sol.duals;
  sol.stationarity_residual = grad.lpNorm<Eigen::Infinity>();
  sol.feasibility_residual = 0.0;
  sol.complementarity_residual = 0.0;
  if (qp.A.rows() > 0) {
    const Eigen::VectorXd slack = qp.A * sol.theta - qp.b;
    sol.feasibility_residual = std::max(0.0, slack.maxCoeff());
    sol.complementarity_residual = sol.duals.cwiseProduct(slack).cwiseAbs().maxCoeff();
  }
}

}  // namespace

QpSolution qp_solve(const QpProblem& qp, double tol, int max_iter) {
  const int n = static_cast<int>(qp.g.size());
  const int k = static_cast<int>(qp.A.rows());
  if (k > 0 && qp.A.cols() != n) throw DimensionMismatch("qp_solve: A has wrong column count");
  if (qp.b.size() != k) throw DimensionMismatch("qp_solve: b size != A rows");
  if (!qp.g.allFinite() || (k > 0 && (!qp.A.allFinite() || !qp.b.allFinite())))
    throw DimensionMismatch("qp_solve: non-finite problem data");

  Eigen::VectorXd theta = -qp.g;
  std::vector<int> active;        // constraint ids, in insertion order
  std::vector<double> lam;        // multipliers for 0.5*||theta+g||^2
  std::vector<char> in_active(k, 0);
  int iters = 0;
  const double pick_tol = 0.5 * tol;

  auto violation = [&](int i) { return qp.A.row(i).dot(theta) - qp.b(i); };

  auto build_active_rows = [&](Eigen::MatrixXd& nmat) {
    nmat.resize(static_cast<int>(active.size()), n);
    for (size_t j = 0; j < active.size(); ++j) nmat.row(static_cast<int>(j)) = qp.A.row(active[j]);
  };

  auto finish = [&](QpStatus status) {
    QpSolution sol;
    sol.status = status;
    sol.iterations = iters;
    if (status == QpStatus::solved && !active.empty()) {
      // Re-solve the equality-constrained problem on the final active set to
      // shed drift accumulated by the incremental updates.
      Eigen::MatrixXd nmat;
      build_active_rows(nmat);
      Eigen::VectorXd rhs = -(nmat * qp.g) - [&] {
        Eigen::VectorXd ba(static_cast<int>(active.size()));
        for (size_t j = 0; j < active.size(); ++j) ba(static_cast<int>(j)) = qp.b(active[j]);
        return ba;
      }();
      Eigen::VectorXd lam_star = (nmat * nmat.transpose()).ldlt().solve(rhs);
      for (int j = 0; j < lam_star.size(); ++j)
        if (lam_star(j) < 0.0 && lam_star(j) > -1e-10) lam_star(j) = 0.0;
      theta = -qp.g - nmat.transpose() * lam_star;
      sol.duals = Eigen::VectorXd::Zero(k);
      for (size_t j = 0; j < active.size(); ++j) sol.duals(active[j]) = 2.0 * lam_star(static_cast<int>(j));
    } else {
      sol.duals = Eigen::VectorXd::Zero(k);
      for (size_t j = 0; j < active.size(); ++j) sol.duals(active[j]) = 2.0 * lam[j];
    }
    sol.theta = theta;
    fill_residuals(qp, sol);
    return sol;
  };

  while (true) {
    if (++iters > max_iter)
      throw QpMaxIterExceeded("qp_solve: no convergence within " + std::to_string(max_iter) +
                              " iterations");

    // Most violated inactive constraint; strict comparison keeps the lowest
    // index on exact ties.
    int p = -1;
    double worst = pick_tol;
    for (int i = 0; i < k; ++i) {
      if (in_active[i]) continue;
      const double v = violation(i);
      if (v > worst) {
        worst = v;
        p = i;
      }
    }
    if (p < 0) return finish(QpStatus::solved);

    const Eigen::VectorXd a_p = qp.A.row(p).transpose();
    double lam_p = 0.0;

    while (true) {
      if (++iters > 50 * (max_iter + 1))
        throw QpMaxIterExceeded("qp_solve: inner iteration budget exhausted");

      const int m = static_cast<int>(active.size());
      Eigen::VectorXd r(m), z;
      if (m > 0) {
        Eigen::MatrixXd nmat;
        build_active_rows(nmat);
        r = (nmat * nmat.transpose()).ldlt().solve(nmat * a_p);
        z = a_p - nmat.transpose() * r;
      } else {
        z = a_p;
      }
      const double z2 = z.squaredNorm();
      const double s_p = violation(p);
      if (s_p <= pick_tol) break;  // resolved by partial steps

      // Dual blocking step: active multipliers move as lam_j - t r_j.
      double t_block = std::numeric_limits<double>::infinity();
      int blocker = -1;
      for (int j = 0; j < m; ++j) {
        if (r(j) > kBlockEps) {
          const double tj = lam[j] / r(j);
          if (tj < t_block || (tj == t_block && blocker >= 0 && active[j] < active[blocker])) {
            t_block = tj;
            blocker = j;
          }
        }
      }

      if (z2 > 1e-14 * std::max(1.0, a_p.squaredNorm())) {
        const double t_full = s_p / z2;
        const double t = std::min(t_full, t_block);
        theta -= t * z;
        for (int j = 0; j < m; ++j) lam[j] -= t * r(j);
        lam_p += t;
        if (t_block < t_full) {
          in_active[active[blocker]] = 0;
          active.erase(active.begin() + blocker);
          lam.erase(lam.begin() + blocker);
          continue;
        }
        active.push_back(p);
        lam.push_back(lam_p);
        in_active[p] = 1;
        break;
      }

      // a_p lies in the span of the active normals. If no active multiplier
      // blocks, the dual ray (lam - t r, lam_p + t) certifies infeasibility.
      if (blocker < 0) return finish(QpStatus::infeasible);
      for (int j = 0; j < m; ++j) lam[j] -= t_block * r(j);
      lam_p += t_block;
      in_active[active[blocker]] = 0;
      active.erase(active.begin() + blocker);
      lam.erase(lam.begin() + blocker);
    }
  }
}

}  // namespace gridflow
