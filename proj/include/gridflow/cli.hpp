#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridflow/sim.hpp"

namespace gridflow {

/// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct RunConfig {
  std::string network_path;
  std::string fleet_path;
  std::string scenario_path;
  std::string out_dir = "out";
  std::string controller = "sgf";
  double v_lower = 0.95;
  double v_upper = 1.05;
  double beta = 1.0;
  double eta = 0.05;
  double dt_control_s = 1.0;
  double tol_qp = 1e-8;
  int qp_max_iter = 200;
  double noise_bound_pu = 0.0;
  std::vector<int> pseudo_nodes;
  bool exact_jacobian = false;
  double cv_weight = 0.0;
  uint64_t seed = 0;
};

/// Seed resolution order: explicit value, then GRIDFLOW_SEED, then 0.
uint64_t resolve_seed(bool seed_given, uint64_t seed_value);

int cmd_run(const RunConfig& config);
int cmd_validate(const std::string& network_path, const std::string& fleet_path,
                 const std::string& scenario_path);
int cmd_compare(const RunConfig& config, const std::vector<std::string>& controllers);
int cmd_sweep(const RunConfig& config, const std::vector<double>& betas,
              const std::vector<double>& etas, const std::vector<double>& noises);
int cmd_scenario(const std::string& network_path, const std::string& fleet_path,
                 const std::string& out_path, double duration_h, uint64_t seed);

}  // namespace gridflow
