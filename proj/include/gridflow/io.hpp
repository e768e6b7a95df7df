#pragma once

#include <string>
#include <vector>

#include "gridflow/network.hpp"
#include "gridflow/opf.hpp"
#include "gridflow/scenario.hpp"
#include "gridflow/sim.hpp"

namespace gridflow {

/// Network file: JSON {base_mva, base_kv, v0:{mag, angle_deg}, buses:[id],
/// lines:[{from, to, r_pu, x_pu, b_shunt_pu}]}. Bus ids are 0..N with 0 the
/// substation. Throws ConfigError naming the offending field.
NetworkModel load_network(const std::string& path);
void save_network(const NetworkModel& model, const std::string& path);

/// Fleet file: JSON {ders:[{node, s_n_kva, q_frac, c_p, c_q}]}; ratings are
/// converted to per-unit on the network base at ingestion.
DerFleet load_fleet(const std::string& path, double base_mva);

/// Scenario CSV: a "t_s,node,p_l_pu,q_l_pu" section followed by a
/// "t_s,der,p_max_pu" section, both on the same uniform time grid.
ScenarioTimeSeries load_scenario(const std::string& path);
void save_scenario(const ScenarioTimeSeries& scenario, const std::string& path);

void write_steps_csv(const SimulationMetrics& metrics, const std::string& path);
void write_summary_json(const SimulationMetrics& metrics, const std::string& controller,
                        uint64_t seed, const std::string& path);
/// Plot-data series: max-voltage trace, impacted-node counts, cumulative cost
/// and cumulative losses, one CSV each under out_dir.
void write_plot_data(const SimulationMetrics& metrics, const std::string& out_dir);

std::string format_double(double x);

}  // namespace gridflow
