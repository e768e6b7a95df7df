#include "gridflow/scenario.hpp"

#include <cmath>
#include <random>

namespace gridflow {

namespace {

double gauss_bump(double t_h, double center_h, double width_h) {
  const double x = (t_h - center_h) / width_h;
  return std::exp(-x * x);
}

/// AR(1) multiplicative wiggle around 1, clamped to stay positive.
struct Wiggle {
  std::mt19937_64 rng;
  std::normal_distribution<double> gauss{0.0, 1.0};
  double state = 0.0;
  double rho, amp;

  Wiggle(uint64_t seed, double rho, double amp) : rng(seed), rho(rho), amp(amp) {}

  double next() {
    state = rho * state + std::sqrt(1.0 - rho * rho) * gauss(rng);
    return std::max(0.0, 1.0 + amp * state);
  }
};

}  // namespace

ScenarioTimeSeries make_summer_scenario(int n_nodes, const DerFleet& fleet,
                                        const SyntheticScenarioConfig& cfg,
                                        const std::vector<double>& load_share) {
  if (n_nodes < 1) throw ConfigError("make_summer_scenario: need at least one node");
  std::vector<double> share = load_share;
  if (share.empty()) share.assign(n_nodes, 1.0 / n_nodes);
  if (static_cast<int>(share.size()) != n_nodes)
    throw DimensionMismatch("make_summer_scenario: load_share size != n_nodes");

  const int g = fleet.size();
  const int samples = static_cast<int>(std::lround(cfg.duration_h * 3600.0 / cfg.sample_period_s));
  const double tan_phi = std::tan(std::acos(cfg.power_factor));

  // Normalize the load shape so its daily maximum maps to load_peak_total_pu.
  double shape_max = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t_h = k * cfg.sample_period_s / 3600.0;
    const double s = cfg.load_base_frac +
                     cfg.morning_amp * gauss_bump(t_h, cfg.morning_peak_h, cfg.morning_width_h) +
                     cfg.evening_amp * gauss_bump(t_h, cfg.evening_peak_h, cfg.evening_width_h);
    shape_max = std::max(shape_max, s);
  }

  ScenarioTimeSeries scen;
  scen.sample_period_s = cfg.sample_period_s;
  scen.p_load.resize(samples, n_nodes);
  scen.q_load.resize(samples, n_nodes);
  scen.p_avail.resize(samples, g);

  Wiggle load_wiggle(cfg.seed, cfg.wiggle_rho, cfg.wiggle_amp);
  Wiggle pv_wiggle(cfg.seed ^ 0x9e3779b97f4a7c15ULL, cfg.wiggle_rho, cfg.wiggle_amp);

  for (int k = 0; k < samples; ++k) {
    const double t_h = k * cfg.sample_period_s / 3600.0;
    const double shape = (cfg.load_base_frac +
                          cfg.morning_amp * gauss_bump(t_h, cfg.morning_peak_h, cfg.morning_width_h) +
                          cfg.evening_amp * gauss_bump(t_h, cfg.evening_peak_h, cfg.evening_width_h)) /
                         shape_max;
    const double total = cfg.load_peak_total_pu * shape * load_wiggle.next();
    for (int nn = 0; nn < n_nodes; ++nn) {
      scen.p_load(k, nn) = total * share[nn];
      scen.q_load(k, nn) = scen.p_load(k, nn) * tan_phi;
    }

    double sun = 0.0;
    if (t_h > cfg.pv_sunrise_h && t_h < cfg.pv_sunset_h) {
      const double phase = M_PI * (t_h - cfg.pv_sunrise_h) / (cfg.pv_sunset_h - cfg.pv_sunrise_h);
      sun = std::pow(std::max(0.0, std::sin(phase)), cfg.pv_exponent);
    }
    const double pv = sun * pv_wiggle.next();
    for (int i = 0; i < g; ++i)
      scen.p_avail(k, i) = std::min(fleet.devices[i].s_n, fleet.devices[i].s_n * pv);
  }
  return scen;
}

}  // namespace gridflow
