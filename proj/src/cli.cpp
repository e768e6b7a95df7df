#include "gridflow/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "gridflow/io.hpp"

namespace gridflow {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t resolve_seed(bool seed_given, uint64_t seed_value) {
  if (seed_given) return seed_value;
  if (const char* env = std::getenv("GRIDFLOW_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

namespace {

struct LoadedCase {
  NetworkModel model;
  OpfProblem problem;
  ScenarioTimeSeries scenario;
};

LoadedCase load_case(const RunConfig& cfg) {
  LoadedCase c{load_network(cfg.network_path), {}, {}};
  c.problem.fleet = load_fleet(cfg.fleet_path, c.model.base_mva);
  c.problem.v_lower = cfg.v_lower;
  c.problem.v_upper = cfg.v_upper;
  c.problem.cv_weight = cfg.cv_weight;
  if (cfg.v_lower >= cfg.v_upper) throw ConfigError("v_lower must be below v_upper");
  for (int node = 1; node <= c.model.n(); ++node) c.problem.monitored.push_back(node);
  for (const auto& d : c.problem.fleet.devices)
    if (d.node < 1 || d.node > c.model.n())
      throw ConfigError(cfg.fleet_path + ": DER node " + std::to_string(d.node) +
                        " not in network");
  c.scenario = load_scenario(cfg.scenario_path);
  if (c.scenario.n_nodes() != c.model.n())
    throw ConfigError(cfg.scenario_path + ": node count " + std::to_string(c.scenario.n_nodes()) +
                      " != network N " + std::to_string(c.model.n()));
  if (c.scenario.n_der() != c.problem.fleet.size())
    throw ConfigError(cfg.scenario_path + ": DER count != fleet size");
  return c;
}

SimOptions sim_options(const RunConfig& cfg, ControllerKind kind) {
  SimOptions opt;
  opt.controller = kind;
  opt.sgf.beta = cfg.beta;
  opt.sgf.eta = cfg.eta;
  opt.sgf.tol_qp = cfg.tol_qp;
  opt.sgf.qp_max_iter = cfg.qp_max_iter;
  opt.batch.beta = cfg.beta;
  opt.dt_control_s = cfg.dt_control_s;
  opt.exact_jacobian = cfg.exact_jacobian;
  opt.seed = cfg.seed;
  return opt;
}

MeasurementModel measurement_model(const RunConfig& cfg) {
  MeasurementModel m;
  m.noise_bound_pu = cfg.noise_bound_pu;
  m.pseudo_nodes = cfg.pseudo_nodes;
  return m;
}

void write_run_artifacts(const SimulationMetrics& metrics, const std::string& controller,
                         uint64_t seed, const std::string& out_dir) {
  fs::create_directories(out_dir);
  write_steps_csv(metrics, (fs::path(out_dir) / "steps.csv").string());
  write_summary_json(metrics, controller, seed, (fs::path(out_dir) / "summary.json").string());
  write_plot_data(metrics, out_dir);
}

}  // namespace

int cmd_run(const RunConfig& cfg) {
  LoadedCase c;
  ControllerKind kind;
  try {
    kind = controller_from_string(cfg.controller);
    c = load_case(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const SimulationMetrics metrics =
        run_simulation(c.model, c.problem, c.scenario, sim_options(cfg, kind),
                       measurement_model(cfg));
    write_run_artifacts(metrics, cfg.controller, cfg.seed, cfg.out_dir);
    std::cout << "run complete: controller=" << cfg.controller
              << " cumulative_cost=" << format_double(metrics.cumulative_cost)
              << " max_voltage=" << format_double(metrics.max_voltage)
              << " overvoltage_samples=" << metrics.overvoltage_samples_10s << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "simulation aborted: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_validate(const std::string& network_path, const std::string& fleet_path,
                 const std::string& scenario_path) {
  std::vector<std::string> violations;
  NetworkModel model;
  try {
    model = load_network(network_path);
  } catch (const std::exception& e) {
    std::cerr << "validate: " << e.what() << "\n";
    return kExitConfig;
  }

  // Admittance invariants.
  const int nb = model.n_buses;
  Eigen::MatrixXcd full(nb, nb);
  full(0, 0) = model.y0;
  full.block(0, 1, 1, nb - 1) = model.ybar.transpose();
  full.block(1, 0, nb - 1, 1) = model.ybar;
  full.block(1, 1, nb - 1, nb - 1) = model.Y;
  if ((full - full.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    violations.push_back("admittance matrix not symmetric");
  Eigen::VectorXcd shunt = Eigen::VectorXcd::Zero(nb);
  for (const auto& l : model.lines) {
    shunt(l.from) += std::complex<double>(0.0, l.b_shunt_pu / 2.0);
    shunt(l.to) += std::complex<double>(0.0, l.b_shunt_pu / 2.0);
  }
  if ((full.rowwise().sum() - shunt).cwiseAbs().maxCoeff() > 1e-9)
    violations.push_back("row sums do not match shunt admittances");

  DerFleet fleet;
  try {
    fleet = load_fleet(fleet_path, model.base_mva);
    for (const auto& d : fleet.devices)
      if (d.node < 1 || d.node > model.n())
        violations.push_back("DER at node " + std::to_string(d.node) + " not in network");
  } catch (const std::exception& e) {
    std::cerr << "validate: " << e.what() << "\n";
    return kExitConfig;
  }

  ScenarioTimeSeries scen;
  bool have_scenario = false;
  if (!scenario_path.empty()) {
    try {
      scen = load_scenario(scenario_path);
      have_scenario = true;
    } catch (const std::exception& e) {
      std::cerr << "validate: " << e.what() << "\n";
      return kExitConfig;
    }
    if (scen.n_nodes() != model.n())
      violations.push_back("scenario node count != network N");
    if (scen.n_der() != fleet.size()) violations.push_back("scenario DER count != fleet size");
    if (scen.n_der() == fleet.size()) {
      for (int k = 0; k < scen.samples(); ++k)
        for (int i = 0; i < scen.n_der(); ++i) {
          const double pm = scen.p_avail(k, i);
          if (pm < 0.0 || pm > fleet.devices[i].s_n + 1e-12) {
            violations.push_back("scenario sample " + std::to_string(k) + " DER " +
                                 std::to_string(i) + ": p_max_pu=" + format_double(pm) +
                                 " outside [0, s_n=" + format_double(fleet.devices[i].s_n) + "]");
            k = scen.samples();  // one representative row is enough
            break;
          }
        }
    }
  }

  // Linear-model quality sweep at representative load points.
  std::vector<int> monitored;
  for (int node = 1; node <= model.n(); ++node) monitored.push_back(node);
  const LinearVoltageModel lin = build_linear_model(model, fleet, monitored);
  std::vector<Eigen::VectorXd> p_pts, q_pts;
  if (have_scenario && scen.n_nodes() == model.n()) {
    Eigen::Index k_min, k_max;
    scen.p_load.rowwise().sum().minCoeff(&k_min);
    scen.p_load.rowwise().sum().maxCoeff(&k_max);
    for (Eigen::Index k : {k_min, k_max}) {
      p_pts.push_back(scen.p_load.row(k).transpose());
      q_pts.push_back(scen.q_load.row(k).transpose());
    }
  } else {
    p_pts.push_back(Eigen::VectorXd::Zero(model.n()));
    q_pts.push_back(Eigen::VectorXd::Zero(model.n()));
  }
  for (auto& d : fleet.devices) d.p_max = d.s_n;
  const ModelErrorSweep sweep =
      linear_model_error_sweep(model, lin, fleet, p_pts, q_pts, 50, 1.0, 1, true);

  std::cout << "E_H_inf=" << format_double(sweep.e_h_inf)
            << " E_H_l2=" << format_double(sweep.e_h_l2) << " E_J=" << format_double(sweep.e_j)
            << " samples=" << sweep.samples << "\n";

  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
    return kExitConfig;
  }
  std::cout << "validate: ok\n";
  return kExitOk;
}

int cmd_compare(const RunConfig& cfg, const std::vector<std::string>& controllers) {
  LoadedCase c;
  std::vector<ControllerKind> kinds;
  try {
    for (const auto& name : controllers) kinds.push_back(controller_from_string(name));
    c = load_case(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<std::future<SimulationMetrics>> futures;
  for (ControllerKind kind : kinds)
    futures.push_back(std::async(std::launch::async, [&, kind] {
      return run_simulation(c.model, c.problem, c.scenario, sim_options(cfg, kind),
                            measurement_model(cfg));
    }));

  json table = json::array();
  std::ostringstream csv;
  csv << "controller,overvoltage_samples_10s,max_T_samples,mean_T_samples,cumulative_cost,"
         "cumulative_losses_pu_h,max_voltage_pu,qp_infeasible,clamp_count,disconnect_events\n";
  try {
    for (size_t i = 0; i < kinds.size(); ++i) {
      const SimulationMetrics m = futures[i].get();
      const std::string name = to_string(kinds[i]);
      write_run_artifacts(m, name, cfg.seed, (fs::path(cfg.out_dir) / name).string());
      csv << name << ',' << m.overvoltage_samples_10s << ',' << format_double(m.durations.max_t)
          << ',' << format_double(m.durations.mean_t) << ',' << format_double(m.cumulative_cost)
          << ',' << format_double(m.cumulative_losses_pu_h) << ','
          << format_double(m.max_voltage) << ',' << m.qp_infeasible_count << ',' << m.clamp_count
          << ',' << m.disconnect_events << "\n";
      table.push_back({{"controller", name},
                       {"overvoltage_samples_10s", m.overvoltage_samples_10s},
                       {"max_T_samples", m.durations.max_t},
                       {"mean_T_samples", m.durations.mean_t},
                       {"cumulative_cost", m.cumulative_cost},
                       {"cumulative_losses_pu_h", m.cumulative_losses_pu_h},
                       {"max_voltage_pu", m.max_voltage},
                       {"qp_infeasible", m.qp_infeasible_count},
                       {"clamp_count", m.clamp_count},
                       {"disconnect_events", m.disconnect_events}});
    }
  } catch (const std::exception& e) {
    std::cerr << "simulation aborted: " << e.what() << "\n";
    return kExitRuntime;
  }

  fs::create_directories(cfg.out_dir);
  std::ofstream csv_out(fs::path(cfg.out_dir) / "compare_summary.csv");
  csv_out << csv.str();
  std::ofstream json_out(fs::path(cfg.out_dir) / "compare_summary.json");
  json_out << table.dump(2) << "\n";
  std::cout << csv.str();
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& betas,
              const std::vector<double>& etas, const std::vector<double>& noises) {
  LoadedCase c;
  try {
    c = load_case(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  struct Combo { double beta, eta, noise; };
  std::vector<Combo> combos;
  for (double b : betas)
    for (double e : etas)
      for (double nz : noises) combos.push_back({b, e, nz});

  std::vector<std::future<SimulationMetrics>> futures;
  for (const auto& combo : combos)
    futures.push_back(std::async(std::launch::async, [&, combo] {
      RunConfig local = cfg;
      local.beta = combo.beta;
      local.eta = combo.eta;
      local.noise_bound_pu = combo.noise;
      return run_simulation(c.model, c.problem, c.scenario,
                            sim_options(local, ControllerKind::sgf), measurement_model(local));
    }));

  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / "sweep.csv");
  out << "beta,eta,noise_bound_pu,overvoltage_samples_10s,max_voltage_pu,cumulative_cost,"
         "cumulative_losses_pu_h,qp_infeasible\n";
  try {
    for (size_t i = 0; i < combos.size(); ++i) {
      const SimulationMetrics m = futures[i].get();
      out << format_double(combos[i].beta) << ',' << format_double(combos[i].eta) << ','
          << format_double(combos[i].noise) << ',' << m.overvoltage_samples_10s << ','
          << format_double(m.max_voltage) << ',' << format_double(m.cumulative_cost) << ','
          << format_double(m.cumulative_losses_pu_h) << ',' << m.qp_infeasible_count << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "simulation aborted: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cout << "sweep complete: " << combos.size() << " runs -> "
            << (fs::path(cfg.out_dir) / "sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_scenario(const std::string& network_path, const std::string& fleet_path,
                 const std::string& out_path, double duration_h, uint64_t seed) {
  try {
    const NetworkModel model = load_network(network_path);
    const DerFleet fleet = load_fleet(fleet_path, model.base_mva);
    SyntheticScenarioConfig cfg;
    cfg.duration_h = duration_h;
    cfg.seed = seed;
    const ScenarioTimeSeries scen = make_summer_scenario(model.n(), fleet, cfg);
    save_scenario(scen, out_path);
    std::cout << "wrote " << out_path << " (" << scen.samples() << " samples, "
              << scen.n_nodes() << " nodes, " << scen.n_der() << " DERs)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace gridflow
