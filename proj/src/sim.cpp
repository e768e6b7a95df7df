#include "gridflow/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gridflow {

ControllerKind controller_from_string(const std::string& name) {
  if (name == "sgf") return ControllerKind::sgf;
  if (name == "pdm") return ControllerKind::pdm;
  if (name == "vvc") return ControllerKind::vvc;
  if (name == "nc") return ControllerKind::nc;
  if (name == "bo") return ControllerKind::bo;
  throw ConfigError("unknown controller '" + name + "' (expected sgf|pdm|vvc|nc|bo)");
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::sgf: return "sgf";
    case ControllerKind::pdm: return "pdm";
    case ControllerKind::vvc: return "vvc";
    case ControllerKind::nc: return "nc";
    case ControllerKind::bo: return "bo";
  }
  return "?";
}

OvervoltageDurations compute_overvoltage_durations(const Eigen::MatrixXd& nu_traces, double alpha) {
  const int t = static_cast<int>(nu_traces.rows());
  const int n = static_cast<int>(nu_traces.cols());
  OvervoltageDurations out;
  out.max_run_per_node = Eigen::VectorXd::Zero(n);
  out.mean_run_per_node = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    int run = 0;
    long total = 0;
    int runs = 0;
    int max_run = 0;
    for (int k = 0; k < t; ++k) {
      if (nu_traces(k, j) > alpha) {
        ++run;
      } else if (run > 0) {
        max_run = std::max(max_run, run);
        total += run;
        ++runs;
        run = 0;
      }
    }
    if (run > 0) {
      max_run = std::max(max_run, run);
      total += run;
      ++runs;
    }
    out.max_run_per_node(j) = max_run;
    out.mean_run_per_node(j) = runs > 0 ? static_cast<double>(total) / runs : 0.0;
  }
  out.max_t = n > 0 ? out.max_run_per_node.maxCoeff() : 0.0;
  out.mean_t = n > 0 ? out.mean_run_per_node.maxCoeff() : 0.0;
  return out;
}

double compute_losses(const PowerFlowSolution& pf, const Eigen::VectorXcd& s_net) {
  return pf.s0.real() + s_net.real().sum();
}

namespace {

/// Realizes a commanded setpoint on the inverter. The static hardware
/// envelope (p >= 0, |q| <= q_frac s_n, apparent power disk) is clamped and
/// counted beyond tol; the availability limit p <= p_max is curtailment the
/// inverter applies for free.
std::pair<Eigen::VectorXd, int> realize_setpoints(const DerFleet& fleet,
                                                  const Eigen::VectorXd& u_cmd, double tol) {
  const int g = fleet.size();
  Eigen::VectorXd u = u_cmd;
  int counted = 0;
  for (int i = 0; i < g; ++i) {
    const auto& d = fleet.devices[i];
    double p = u(i), q = u(g + i);
    const double q_lim = d.q_frac * d.s_n;
    const double viol = std::max({-p, std::abs(q) - q_lim, std::hypot(p, q) - d.s_n});
    if (viol > tol) ++counted;
    p = std::max(p, 0.0);
    q = std::clamp(q, -q_lim, q_lim);
    const double mag = std::hypot(p, q);
    if (mag > d.s_n) {
      p *= d.s_n / mag;
      q *= d.s_n / mag;
    }
    p = std::min(p, d.p_max);
    u(i) = p;
    u(g + i) = q;
  }
  return {u, counted};
}

}  // namespace

SimulationMetrics run_simulation(const NetworkModel& model, const OpfProblem& problem_in,
                                 const ScenarioTimeSeries& scenario, const SimOptions& opt,
                                 const MeasurementModel& meas) {
  const int n = model.n();
  const int g = problem_in.n_der();
  const int m = problem_in.n_monitored();
  if (scenario.n_nodes() != n) throw ConfigError("run_simulation: scenario nodes != network N");
  if (scenario.n_der() != g) throw ConfigError("run_simulation: scenario DER count != fleet");
  if (opt.dt_control_s <= 0.0) throw ConfigError("run_simulation: dt_control_s must be positive");
  const double ratio = scenario.sample_period_s / opt.dt_control_s;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9)
    throw ConfigError("run_simulation: control period must divide the scenario sample period");

  OpfProblem problem = problem_in;
  LinearVoltageModel lin = build_linear_model(model, problem.fleet, problem.monitored);

  const int ticks = static_cast<int>(std::lround(scenario.duration_s() / opt.dt_control_s));
  std::mt19937_64 noise_rng(opt.seed * 0x9e3779b97f4a7c15ULL + 1);
  std::mt19937_64 protection_rng(opt.seed * 0xbf58476d1ce4e5b9ULL + 2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SimulationMetrics metrics;
  metrics.dt_control_s = opt.dt_control_s;
  metrics.sample_period_s = scenario.sample_period_s;
  metrics.v_upper = problem.v_upper;
  metrics.v_lower = problem.v_lower;
  metrics.steps.reserve(ticks);
  metrics.max_voltage = -1e30;
  metrics.min_voltage = 1e30;

  Eigen::VectorXd u_cmd = opt.u0.size() == 2 * g ? opt.u0 : Eigen::VectorXd::Zero(2 * g);
  if (opt.u0.size() != 0 && opt.u0.size() != 2 * g)
    throw ConfigError("run_simulation: u0 size != 2G");

  PrimalDualState pdm_state{u_cmd, Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
  std::vector<ProtectionState> protection(g);
  Eigen::VectorXd bo_warm = u_cmd;
  bool bo_warm_valid = false;

  std::optional<Eigen::VectorXcd> warm;
  Eigen::VectorXd p_l(n), q_l(n), nu_meas_m(m);

  for (int tick = 0; tick < ticks; ++tick) {
    const double t = tick * opt.dt_control_s;
    const int sk = scenario.index_at(t);
    p_l = scenario.p_load.row(sk).transpose();
    q_l = scenario.q_load.row(sk).transpose();
    for (int i = 0; i < g; ++i) problem.fleet.devices[i].p_max = scenario.p_avail(sk, i);

    // Inverter realization of the current command, then the true grid state.
    auto [u_impl, counted] = realize_setpoints(problem.fleet, u_cmd, opt.clamp_tol);
    metrics.clamp_count += counted;

    PowerFlowSolution pf;
    const Eigen::VectorXcd s_net = net_injections(problem.fleet, u_impl, p_l, q_l);
    try {
      pf = solve_power_flow(model, s_net, warm, opt.pf_tol, opt.pf_max_iter);
    } catch (const PowerFlowDiverged& e) {
      throw PowerFlowDiverged("power flow diverged at t=" + std::to_string(t) +
                                  " s (controller " + to_string(opt.controller) +
                                  ", max |u|=" + std::to_string(u_impl.cwiseAbs().maxCoeff()) +
                                  "): " + e.what(),
                              e.residual, e.iterations);
    }
    warm = pf.v;

    // Measurements: bounded uniform noise everywhere (drawn every tick to keep
    // the stream independent of the controller), pseudo-measurements from the
    // linear model where configured.
    Eigen::VectorXd nu_meas(n);
    for (int i = 0; i < n; ++i) nu_meas(i) = pf.nu(i) + meas.noise_bound_pu * unit(noise_rng);
    if (!meas.pseudo_nodes.empty()) {
      const Eigen::VectorXd nu_hat = predict_voltages_full(lin, u_impl, p_l, q_l);
      for (int node : meas.pseudo_nodes) nu_meas(node - 1) = nu_hat(node - 1);
    }
    for (int r = 0; r < m; ++r) nu_meas_m(r) = nu_meas(problem.monitored[r] - 1);

    bool qp_ok = true;
    switch (opt.controller) {
      case ControllerKind::sgf: {
        Eigen::MatrixXd jac =
            opt.exact_jacobian
                ? finite_difference_jacobian(model, problem.fleet, problem.monitored, u_impl, p_l,
                                             q_l, 1e-5, pf.v)
                : lin.J_hat;
        try {
          const SgfDirection dir = sgf_direction(problem, jac, u_impl, nu_meas_m, opt.sgf);
          u_cmd = sgf_step(u_impl, dir, opt.dt_control_s, opt.sgf);
        } catch (const QpInfeasible&) {
          qp_ok = false;
          ++metrics.qp_infeasible_count;
          u_cmd = u_impl;  // hold
        }
        break;
      }
      case ControllerKind::pdm: {
        pdm_state.u = u_impl;
        pdm_state = primal_dual_step(pdm_state, nu_meas_m, lin.J_hat, problem, opt.pdm);
        u_cmd = pdm_state.u;
        break;
      }
      case ControllerKind::vvc: {
        for (int i = 0; i < g; ++i) {
          const auto& d = problem.fleet.devices[i];
          u_cmd(i) = d.p_max;
          u_cmd(g + i) = voltvar_q(opt.vvc, nu_meas(d.node - 1), d.s_n);
        }
        break;
      }
      case ControllerKind::nc: {
        const bool protection_tick =
            std::fmod(t, scenario.sample_period_s) < 0.5 * opt.dt_control_s;
        for (int i = 0; i < g; ++i) {
          const auto& d = problem.fleet.devices[i];
          if (protection_tick) {
            const DerStatus before = protection[i].status;
            protection_step(protection[i], nu_meas(d.node - 1), protection_rng, opt.protection);
            if (before == DerStatus::running && protection[i].status == DerStatus::disconnected)
              ++metrics.disconnect_events;
          }
          const bool on = protection[i].status == DerStatus::running;
          u_cmd(i) = on ? d.p_max : 0.0;
          u_cmd(g + i) = 0.0;
        }
        break;
      }
      case ControllerKind::bo: {
        if (std::fmod(t, scenario.sample_period_s) < 0.5 * opt.dt_control_s || !bo_warm_valid) {
          const Eigen::VectorXd start = bo_warm_valid ? bo_warm : u_cmd;
          const BatchResult ref = batch_reference(problem, model, p_l, q_l, start, opt.batch);
          bo_warm = ref.u;
          bo_warm_valid = true;
        }
        u_cmd = bo_warm;
        break;
      }
    }

    StepRecord rec;
    rec.t = t;
    rec.nu = pf.nu;
    rec.u = u_impl;
    rec.cost = eval_cost(problem, u_impl);
    rec.losses = compute_losses(pf, s_net);
    rec.p0 = pf.s0.real();
    rec.q0 = pf.s0.imag();
    rec.qp_ok = qp_ok;
    rec.clamped = counted;
    metrics.cumulative_cost += rec.cost * opt.dt_control_s;
    metrics.cumulative_losses_pu_h += rec.losses * opt.dt_control_s / 3600.0;
    metrics.max_voltage = std::max(metrics.max_voltage, pf.nu.maxCoeff());
    metrics.min_voltage = std::min(metrics.min_voltage, pf.nu.minCoeff());
    metrics.steps.push_back(std::move(rec));
  }

  const Eigen::MatrixXd grid = reporting_grid_voltages(metrics);
  metrics.durations = compute_overvoltage_durations(grid, problem.v_upper);
  metrics.overvoltage_samples_10s = (grid.array() > problem.v_upper).count();
  return metrics;
}

Eigen::MatrixXd reporting_grid_voltages(const SimulationMetrics& metrics) {
  if (metrics.steps.empty()) return {};
  const int stride = std::max(1, static_cast<int>(std::lround(metrics.sample_period_s /
                                                              metrics.dt_control_s)));
  const int n = static_cast<int>(metrics.steps.front().nu.size());
  const int rows = (static_cast<int>(metrics.steps.size()) + stride - 1) / stride;
  Eigen::MatrixXd grid(rows, n);
  int r = 0;
  for (size_t k = 0; k < metrics.steps.size(); k += stride) grid.row(r++) = metrics.steps[k].nu;
  return grid;
}

}  // namespace gridflow
