#include "gridflow/network.hpp"

#include <cmath>
#include <queue>
#include <random>

namespace gridflow {

namespace {

void check_connected(const std::vector<Line>& lines, int n_buses) {
  std::vector<std::vector<int>> adj(n_buses);
  for (const auto& l : lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::vector<char> seen(n_buses, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    int b = q.front();
    q.pop();
    for (int nb : adj[b])
      if (!seen[nb]) {
        seen[nb] = 1;
        q.push(nb);
      }
  }
  for (int b = 0; b < n_buses; ++b)
    if (!seen[b])
      throw DisconnectedNetwork("bus " + std::to_string(b) + " unreachable from substation");
}

}  // namespace

NetworkModel build_admittance(const std::vector<Line>& lines, int n_buses, std::complex<double> v0,
                              double base_mva, double base_kv) {
  if (n_buses < 2) throw ConfigError("build_admittance: need at least 2 buses");
  for (const auto& l : lines) {
    if (l.from < 0 || l.from >= n_buses || l.to < 0 || l.to >= n_buses || l.from == l.to)
      throw ConfigError("build_admittance: line endpoints out of range");
    if (l.r_pu == 0.0 && l.x_pu == 0.0)
      throw SingularY("line " + std::to_string(l.from) + "-" + std::to_string(l.to) +
                      " has zero series impedance");
  }
  check_connected(lines, n_buses);

  const int n = n_buses - 1;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(n_buses, n_buses);
  for (const auto& l : lines) {
    const std::complex<double> ys = 1.0 / std::complex<double>(l.r_pu, l.x_pu);
    const std::complex<double> ysh(0.0, l.b_shunt_pu / 2.0);
    full(l.from, l.from) += ys + ysh;
    full(l.to, l.to) += ys + ysh;
    full(l.from, l.to) -= ys;
    full(l.to, l.from) -= ys;
  }

  NetworkModel m;
  m.n_buses = n_buses;
  m.lines = lines;
  m.v0 = v0;
  m.base_mva = base_mva;
  m.base_kv = base_kv;
  m.y0 = full(0, 0);
  m.ybar = full.block(1, 0, n, 1);
  m.Y = full.block(1, 1, n, n);

  Eigen::FullPivLU<Eigen::MatrixXcd> rank_check(m.Y);
  rank_check.setThreshold(1e-12);
  if (!rank_check.isInvertible()) throw SingularY("bus admittance block Y is singular");
  m.Y_lu = Eigen::PartialPivLU<Eigen::MatrixXcd>(m.Y);
  return m;
}

PowerFlowSolution solve_power_flow(const NetworkModel& model, const Eigen::VectorXcd& s_net,
                                   std::optional<Eigen::VectorXcd> warm_start, double tol_pf,
                                   int max_iter) {
  const int n = model.n();
  if (s_net.size() != n) throw DimensionMismatch("solve_power_flow: s_net size != N");
  if (!s_net.allFinite()) throw DimensionMismatch("solve_power_flow: s_net not finite");

  const Eigen::VectorXcd rhs0 = -model.ybar * model.v0;
  Eigen::VectorXcd v = warm_start ? *warm_start : Eigen::VectorXcd(model.Y_lu.solve(rhs0));
  if (v.size() != n) throw DimensionMismatch("solve_power_flow: warm_start size != N");

  auto residual_of = [&](const Eigen::VectorXcd& vv) {
    Eigen::VectorXcd inj = (model.ybar * model.v0 + model.Y * vv).conjugate();
    return (s_net - vv.cwiseProduct(inj)).cwiseAbs().maxCoeff();
  };

  double res = residual_of(v);
  int it = 0;
  while (res > tol_pf && it < max_iter) {
    for (int i = 0; i < n; ++i)
      if (std::abs(v(i)) < 0.3)
        throw PowerFlowDiverged("voltage collapsed below 0.3 pu at bus " + std::to_string(i + 1),
                                res, it);
    Eigen::VectorXcd w = s_net.cwiseQuotient(v).conjugate() + rhs0;
    v = model.Y_lu.solve(w);
    if (!v.allFinite()) throw PowerFlowDiverged("iterate not finite", res, it);
    res = residual_of(v);
    ++it;
  }
  if (res > tol_pf)
    throw PowerFlowDiverged("residual " + std::to_string(res) + " above tolerance after " +
                                std::to_string(it) + " iterations",
                            res, it);

  PowerFlowSolution sol;
  sol.v = v;
  sol.nu = v.cwiseAbs();
  sol.s0 = model.v0 * std::conj(model.y0 * model.v0 + model.ybar.dot(v.conjugate()));
  sol.iterations = it;
  sol.residual = res;
  return sol;
}

LinearVoltageModel build_linear_model(const NetworkModel& model, const DerFleet& fleet,
                                      const std::vector<int>& monitored) {
  const int n = model.n();
  const int g = fleet.size();
  if (monitored.empty()) throw ConfigError("build_linear_model: monitored set empty");
  for (int node : monitored)
    if (node < 1 || node > n) throw ConfigError("build_linear_model: monitored node out of range");
  for (const auto& d : fleet.devices)
    if (d.node < 1 || d.node > n) throw ConfigError("build_linear_model: DER node out of range");

  LinearVoltageModel lin;
  lin.vbar = model.nominal_voltage();
  lin.rho_bar = lin.vbar.cwiseAbs();
  lin.a_bar.resize(n);
  lin.b_bar.resize(n);
  for (int i = 0; i < n; ++i) {
    const double th = std::arg(lin.vbar(i));
    lin.a_bar(i) = std::cos(th);
    lin.b_bar(i) = std::sin(th);
  }

  const Eigen::MatrixXcd W = model.Y_lu.solve(Eigen::MatrixXcd::Identity(n, n));
  const Eigen::MatrixXd z_r = W.real();
  const Eigen::MatrixXd z_i = W.imag();
  const Eigen::VectorXd inv_rho = lin.rho_bar.cwiseInverse();
  const Eigen::VectorXd da = lin.a_bar.cwiseProduct(inv_rho);
  const Eigen::VectorXd db = lin.b_bar.cwiseProduct(inv_rho);
  lin.R_bar = z_r * da.asDiagonal() - z_i * db.asDiagonal();
  lin.B_bar = z_i * da.asDiagonal() + z_r * db.asDiagonal();

  lin.Gamma_R = Eigen::MatrixXd::Zero(n, 2 * g);
  lin.Gamma_B = Eigen::MatrixXd::Zero(n, 2 * g);
  for (int i = 0; i < g; ++i) {
    lin.Gamma_R(fleet.devices[i].node - 1, i) = 1.0;
    lin.Gamma_B(fleet.devices[i].node - 1, g + i) = 1.0;
  }

  const Eigen::MatrixXd j_full = lin.R_bar * lin.Gamma_R + lin.B_bar * lin.Gamma_B;
  lin.monitored = monitored;
  lin.J_hat.resize(static_cast<int>(monitored.size()), 2 * g);
  for (size_t r = 0; r < monitored.size(); ++r) lin.J_hat.row(static_cast<int>(r)) = j_full.row(monitored[r] - 1);
  return lin;
}

Eigen::VectorXd predict_voltages_full(const LinearVoltageModel& lin, const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& p_l, const Eigen::VectorXd& q_l) {
  const int n = static_cast<int>(lin.rho_bar.size());
  if (u.size() != lin.Gamma_R.cols()) throw DimensionMismatch("predict_voltages: u size != 2G");
  if (p_l.size() != n || q_l.size() != n)
    throw DimensionMismatch("predict_voltages: load vectors size != N");
  const Eigen::VectorXd p_net = lin.Gamma_R * u - p_l;
  const Eigen::VectorXd q_net = lin.Gamma_B * u - q_l;
  return lin.rho_bar + lin.R_bar * p_net + lin.B_bar * q_net;
}

Eigen::VectorXd predict_voltages(const LinearVoltageModel& lin, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& p_l, const Eigen::VectorXd& q_l) {
  const Eigen::VectorXd full = predict_voltages_full(lin, u, p_l, q_l);
  Eigen::VectorXd out(static_cast<int>(lin.monitored.size()));
  for (size_t r = 0; r < lin.monitored.size(); ++r) out(static_cast<int>(r)) = full(lin.monitored[r] - 1);
  return out;
}

Eigen::MatrixXd finite_difference_jacobian(const NetworkModel& model, const DerFleet& fleet,
                                           const std::vector<int>& monitored,
                                           const Eigen::VectorXd& u, const Eigen::VectorXd& p_l,
                                           const Eigen::VectorXd& q_l, double step,
                                           std::optional<Eigen::VectorXcd> warm_start) {
  const int g = fleet.size();
  const int m = static_cast<int>(monitored.size());
  Eigen::MatrixXd jac(m, 2 * g);
  Eigen::VectorXcd warm =
      warm_start ? *warm_start
                 : solve_power_flow(model, net_injections(fleet, u, p_l, q_l)).v;
  Eigen::VectorXd up = u, um = u;
  for (int j = 0; j < 2 * g; ++j) {
    up(j) += step;
    um(j) -= step;
    const auto sp = solve_power_flow(model, net_injections(fleet, up, p_l, q_l), warm);
    const auto sm = solve_power_flow(model, net_injections(fleet, um, p_l, q_l), warm);
    for (int r = 0; r < m; ++r)
      jac(r, j) = (sp.nu(monitored[r] - 1) - sm.nu(monitored[r] - 1)) / (2.0 * step);
    up(j) = u(j);
    um(j) = u(j);
  }
  return jac;
}

ModelErrorSweep linear_model_error_sweep(const NetworkModel& model, const LinearVoltageModel& lin,
                                         const DerFleet& fleet,
                                         const std::vector<Eigen::VectorXd>& p_loads,
                                         const std::vector<Eigen::VectorXd>& q_loads,
                                         int n_samples, double der_scale, uint64_t seed,
                                         bool with_jacobian) {
  if (p_loads.size() != q_loads.size() || p_loads.empty())
    throw DimensionMismatch("linear_model_error_sweep: load point lists inconsistent");
  const int g = fleet.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ModelErrorSweep sweep;
  for (size_t lp = 0; lp < p_loads.size(); ++lp) {
    for (int s = 0; s < n_samples; ++s) {
      Eigen::VectorXd u(2 * g);
      for (int i = 0; i < g; ++i) {
        const auto& d = fleet.devices[i];
        u(i) = der_scale * d.s_n * unit(rng);
        u(g + i) = d.q_frac * d.s_n * (2.0 * unit(rng) - 1.0) * der_scale;
      }
      const auto pf = solve_power_flow(model, net_injections(fleet, u, p_loads[lp], q_loads[lp]));
      const Eigen::VectorXd nu_hat = predict_voltages(lin, u, p_loads[lp], q_loads[lp]);
      Eigen::VectorXd err(static_cast<int>(lin.monitored.size()));
      for (size_t r = 0; r < lin.monitored.size(); ++r)
        err(static_cast<int>(r)) = nu_hat(static_cast<int>(r)) - pf.nu(lin.monitored[r] - 1);
      sweep.e_h_inf = std::max(sweep.e_h_inf, err.cwiseAbs().maxCoeff());
      sweep.e_h_l2 = std::max(sweep.e_h_l2, err.norm());
      if (with_jacobian) {
        const Eigen::MatrixXd j_fd = finite_difference_jacobian(model, fleet, lin.monitored, u,
                                                                p_loads[lp], q_loads[lp], 1e-5, pf.v);
        const Eigen::MatrixXd diff = lin.J_hat - j_fd;
        sweep.e_j = std::max(sweep.e_j, diff.jacobiSvd().singularValues()(0));
      }
      ++sweep.samples;
    }
  }
  return sweep;
}

}  // namespace gridflow
