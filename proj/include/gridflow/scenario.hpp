#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gridflow/fleet.hpp"

namespace gridflow {

/// Zero-order-hold time series of non-controllable loads (consumption
/// positive) and per-DER available active power, on a fixed sample grid.
struct ScenarioTimeSeries {
  double sample_period_s = 10.0;
  Eigen::MatrixXd p_load;   // T x N
  Eigen::MatrixXd q_load;   // T x N
  Eigen::MatrixXd p_avail;  // T x G

  int samples() const { return static_cast<int>(p_load.rows()); }
  int n_nodes() const { return static_cast<int>(p_load.cols()); }
  int n_der() const { return static_cast<int>(p_avail.cols()); }
  double duration_s() const { return samples() * sample_period_s; }

  /// Sample index holding at time t (zero-order hold).
  int index_at(double t_s) const {
    int i = static_cast<int>(t_s / sample_period_s);
    return std::min(std::max(i, 0), samples() - 1);
  }
};

/// Parameters of the bundled synthetic summer day: a double-hump load shape
/// with 0.9 lagging power factor and a clear-sky PV bell. The multiplicative
/// wiggle is AR(1)-smoothed so consecutive 10 s samples stay close.
struct SyntheticScenarioConfig {
  double duration_h = 24.0;
  double sample_period_s = 10.0;
  double load_peak_total_pu = 1.05;  // total feeder load at the evening peak
  double load_base_frac = 0.46;
  double morning_peak_h = 8.0, morning_amp = 0.22, morning_width_h = 2.2;
  double evening_peak_h = 19.5, evening_amp = 0.55, evening_width_h = 2.6;
  double power_factor = 0.9;  // lagging
  double pv_sunrise_h = 5.5, pv_sunset_h = 20.5, pv_exponent = 1.25;
  double wiggle_amp = 0.01;
  double wiggle_rho = 0.995;
  uint64_t seed = 20260613;
};

/// Builds the synthetic day for n_nodes load buses (uniform shares unless
/// load_share is given) and the fleet's nameplate ratings. Deterministic for
/// a fixed config.
ScenarioTimeSeries make_summer_scenario(int n_nodes, const DerFleet& fleet,
                                        const SyntheticScenarioConfig& config = {},
                                        const std::vector<double>& load_share = {});

}  // namespace gridflow
