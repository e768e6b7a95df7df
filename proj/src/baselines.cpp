#include "gridflow/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace gridflow {

double voltvar_q(const VoltVarCurve& curve, double v_measured, double s_n) {
  if (v_measured <= 0.0) throw ConfigError("voltvar_q: voltage must be positive");
  const auto& vp = curve.v_points;
  const auto& fp = curve.q_frac_points;
  double frac;
  if (v_measured <= vp.front()) {
    frac = fp.front();
  } else if (v_measured >= vp.back()) {
    frac = fp.back();
  } else {
    size_t seg = 0;
    while (v_measured > vp[seg + 1]) ++seg;
    const double w = (v_measured - vp[seg]) / (vp[seg + 1] - vp[seg]);
    frac = fp[seg] + w * (fp[seg + 1] - fp[seg]);
  }
  return s_n * frac;
}

void protection_step(ProtectionState& state, double v_at_poc, std::mt19937_64& rng,
                     const ProtectionConfig& cfg) {
  state.window.push_back(v_at_poc);
  while (static_cast<int>(state.window.size()) > cfg.rms_window_samples) state.window.pop_front();

  switch (state.status) {
    case DerStatus::running: {
      bool trip = v_at_poc > cfg.trip_instant_pu;
      if (!trip && static_cast<int>(state.window.size()) == cfg.rms_window_samples) {
        double sum_sq = 0.0;
        for (double v : state.window) sum_sq += v * v;
        trip = std::sqrt(sum_sq / state.window.size()) > cfg.trip_rms_pu;
      }
      if (trip) {
        state.status = DerStatus::disconnected;
        state.below_count = 0;
      }
      break;
    }
    case DerStatus::disconnected: {
      if (v_at_poc < cfg.recover_pu)
        ++state.below_count;
      else
        state.below_count = 0;
      if (state.below_count >= cfg.recover_samples) {
        state.status = DerStatus::idling;
        std::uniform_real_distribution<double> delay(cfg.reconnect_min_s, cfg.reconnect_max_s);
        state.reconnect_delay_s = delay(rng);
        state.idle_elapsed_s = 0.0;
      }
      break;
    }
    case DerStatus::idling: {
      state.idle_elapsed_s += cfg.sample_period_s;
      if (state.idle_elapsed_s >= state.reconnect_delay_s) {
        state.status = DerStatus::running;
        state.reconnect_delay_s = -1.0;
      }
      break;
    }
  }
}

std::pair<double, double> project_capability(const DerDevice& d, double p, double q, int sweeps) {
  const double q_lim = d.q_frac * d.s_n;
  for (int s = 0; s < sweeps; ++s) {
    p = std::clamp(p, 0.0, d.p_max);
    q = std::clamp(q, -q_lim, q_lim);
    const double mag = std::hypot(p, q);
    if (mag <= d.s_n) break;
    const double scale = d.s_n / mag;
    p *= scale;
    q *= scale;
  }
  // One closing pass: box first, then the disk scaling, which preserves the
  // box constraints (all are sign/half-bounds through the origin).
  p = std::clamp(p, 0.0, d.p_max);
  q = std::clamp(q, -q_lim, q_lim);
  const double mag = std::hypot(p, q);
  if (mag > d.s_n) {
    const double scale = d.s_n / mag;
    p *= scale;
    q *= scale;
  }
  return {p, q};
}

PrimalDualState primal_dual_step(const PrimalDualState& state, const Eigen::VectorXd& nu_measured,
                                 const Eigen::MatrixXd& jac, const OpfProblem& problem,
                                 const PdmConfig& cfg) {
  const int g = problem.n_der();
  const int m = problem.n_monitored();
  if (nu_measured.size() != m) throw DimensionMismatch("primal_dual_step: nu size != M");
  if (state.u.size() != 2 * g) throw DimensionMismatch("primal_dual_step: u size != 2G");

  PrimalDualState next = state;
  next.mu_upper = (state.mu_upper + cfg.alpha * (nu_measured.array() - problem.v_upper).matrix())
                      .cwiseMax(0.0) / (1.0 + cfg.alpha * cfg.epsilon);
  next.mu_lower = (state.mu_lower + cfg.alpha * (problem.v_lower - nu_measured.array()).matrix())
                      .cwiseMax(0.0) / (1.0 + cfg.alpha * cfg.epsilon);

  const Eigen::VectorXd grad =
      cost_gradient(problem, state.u) + jac.transpose() * (next.mu_upper - next.mu_lower);
  Eigen::VectorXd u = state.u - cfg.alpha * grad;
  for (int i = 0; i < g; ++i) {
    auto [p, q] = project_capability(problem.fleet.devices[i], u(i), u(g + i), cfg.proj_sweeps);
    u(i) = p;
    u(g + i) = q;
  }
  next.u = u;
  return next;
}

BatchResult batch_reference(const OpfProblem& problem, const NetworkModel& model,
                            const Eigen::VectorXd& p_l, const Eigen::VectorXd& q_l,
                            const Eigen::VectorXd& u0, const BatchConfig& cfg) {
  const int g = problem.n_der();
  if (u0.size() != 2 * g) throw DimensionMismatch("batch_reference: u0 size != 2G");
  if (cfg.max_iter < 1) throw ConfigError("batch_reference: max_iter must be >= 1");

  SgfConfig sgf_cfg;
  sgf_cfg.beta = cfg.beta;
  sgf_cfg.tol_qp = cfg.tol_qp;
  sgf_cfg.qp_max_iter = cfg.qp_max_iter;

  BatchResult out;
  Eigen::VectorXd u = u0;
  Eigen::VectorXcd warm = model.nominal_voltage();
  SgfDirection dir;
  Eigen::VectorXd nu_m(problem.n_monitored());
  Eigen::MatrixXd jac;
  for (int it = 0; it < cfg.max_iter; ++it) {
    const auto pf = solve_power_flow(model, net_injections(problem.fleet, u, p_l, q_l), warm);
    warm = pf.v;
    for (int r = 0; r < problem.n_monitored(); ++r) nu_m(r) = pf.nu(problem.monitored[r] - 1);
    jac = finite_difference_jacobian(model, problem.fleet, problem.monitored, u, p_l, q_l,
                                     cfg.fd_step, pf.v);
    dir = sgf_direction(problem, jac, u, nu_m, sgf_cfg);
    out.flow_norm = dir.theta.norm();
    out.iterations = it + 1;
    if (out.flow_norm <= cfg.tol_flow) {
      out.converged = true;
      break;
    }
    u += cfg.step * dir.theta;
  }
  out.u = u;
  out.duals = 0.5 * dir.duals;  // OPF multipliers; the QP stationarity carries a factor 2
  out.kkt = kkt_residual(problem, jac, u, nu_m, out.duals);
  return out;
}

}  // namespace gridflow
