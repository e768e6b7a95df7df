#include <CLI11.hpp>
#include <string>
#include <vector>

#include "gridflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gridflow: real-time voltage-safe OPF pursuit on distribution feeders"};
  app.require_subcommand(1);

  gridflow::RunConfig cfg;
  bool seed_given = false;
  uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* cmd, bool with_controller) {
    cmd->add_option("--network", cfg.network_path, "network JSON file")->required();
    cmd->add_option("--fleet", cfg.fleet_path, "DER fleet JSON file")->required();
    cmd->add_option("--scenario", cfg.scenario_path, "scenario CSV file")->required();
    cmd->add_option("--out", cfg.out_dir, "output directory");
    if (with_controller)
      cmd->add_option("--controller", cfg.controller, "sgf|pdm|vvc|nc|bo")
          ->check(CLI::IsMember({"sgf", "pdm", "vvc", "nc", "bo"}));
    cmd->add_option("--vmin", cfg.v_lower, "lower voltage limit, pu");
    cmd->add_option("--vmax", cfg.v_upper, "upper voltage limit, pu");
    cmd->add_option("--beta", cfg.beta, "barrier gain");
    cmd->add_option("--eta", cfg.eta, "controller gain");
    cmd->add_option("--dt-control-s", cfg.dt_control_s, "control period, s");
    cmd->add_option("--tol-qp", cfg.tol_qp, "QP KKT tolerance");
    cmd->add_option("--qp-max-iter", cfg.qp_max_iter, "QP iteration cap");
    cmd->add_option("--noise", cfg.noise_bound_pu, "measurement noise bound, pu");
    cmd->add_option("--pseudo-nodes", cfg.pseudo_nodes,
                    "nodes served by linear-model pseudo-measurements");
    cmd->add_flag("--exact-jacobian", cfg.exact_jacobian,
                  "recompute the power-flow Jacobian by finite differences each tick");
    cmd->add_option("--cv-weight", cfg.cv_weight, "voltage cost weight (0 disables C_v)");
    cmd->add_option("--seed", seed_value, "PRNG seed (falls back to GRIDFLOW_SEED)")
        ->each([&](const std::string&) { seed_given = true; });
  };

  auto* run = app.add_subcommand("run", "simulate one controller on a scenario");
  add_common(run, true);

  auto* compare = app.add_subcommand("compare", "run several controllers on the same scenario");
  std::vector<std::string> controllers{"nc", "vvc", "pdm", "sgf", "bo"};
  add_common(compare, false);
  compare->add_option("--controllers", controllers, "controllers to compare");

  auto* validate = app.add_subcommand("validate", "check model files and report map errors");
  std::string v_network, v_fleet, v_scenario;
  validate->add_option("--network", v_network, "network JSON file")->required();
  validate->add_option("--fleet", v_fleet, "DER fleet JSON file")->required();
  validate->add_option("--scenario", v_scenario, "scenario CSV file (optional)");

  auto* sweep = app.add_subcommand("sweep", "grid sweep over beta, eta and noise");
  std::vector<double> betas{1.0}, etas{0.05}, noises{0.0};
  add_common(sweep, false);
  sweep->add_option("--beta-list", betas, "barrier gains to sweep");
  sweep->add_option("--eta-list", etas, "controller gains to sweep");
  sweep->add_option("--noise-list", noises, "noise bounds to sweep");

  auto* scenario = app.add_subcommand("scenario", "write the bundled synthetic day as CSV");
  std::string s_network, s_fleet, s_out = "scenario.csv";
  double s_duration_h = 24.0;
  uint64_t s_seed = 20260613ULL;
  scenario->add_option("--network", s_network, "network JSON file")->required();
  scenario->add_option("--fleet", s_fleet, "DER fleet JSON file")->required();
  scenario->add_option("--out", s_out, "output CSV path");
  scenario->add_option("--duration-h", s_duration_h, "scenario length, hours");
  scenario->add_option("--seed", s_seed, "profile wiggle seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gridflow::kExitConfig;
  }

  cfg.seed = gridflow::resolve_seed(seed_given, seed_value);

  if (run->parsed()) return gridflow::cmd_run(cfg);
  if (compare->parsed()) return gridflow::cmd_compare(cfg, controllers);
  if (validate->parsed()) return gridflow::cmd_validate(v_network, v_fleet, v_scenario);
  if (sweep->parsed()) return gridflow::cmd_sweep(cfg, betas, etas, noises);
  if (scenario->parsed())
    return gridflow::cmd_scenario(s_network, s_fleet, s_out, s_duration_h, s_seed);
  return gridflow::kExitConfig;
}
