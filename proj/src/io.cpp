#include "gridflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace gridflow {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

double require_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(path + ": missing or non-numeric field '" + key + "'");
  return j[key].get<double>();
}

}  // namespace

NetworkModel load_network(const std::string& path) {
  const json j = read_json_file(path);
  const double base_mva = require_number(j, "base_mva", path);
  const double base_kv = require_number(j, "base_kv", path);
  if (!j.contains("v0") || !j["v0"].is_object())
    throw ConfigError(path + ": missing object field 'v0'");
  const double v0_mag = require_number(j["v0"], "mag", path + ".v0");
  const double v0_ang = j["v0"].value("angle_deg", 0.0) * M_PI / 180.0;
  if (!j.contains("buses") || !j["buses"].is_array())
    throw ConfigError(path + ": missing array field 'buses'");
  if (!j.contains("lines") || !j["lines"].is_array())
    throw ConfigError(path + ": missing array field 'lines'");

  std::vector<int> buses = j["buses"].get<std::vector<int>>();
  std::sort(buses.begin(), buses.end());
  const int n_buses = static_cast<int>(buses.size());
  for (int i = 0; i < n_buses; ++i)
    if (buses[i] != i)
      throw ConfigError(path + ": bus ids must be 0..N (0 = substation); got id " +
                        std::to_string(buses[i]));

  std::vector<Line> lines;
  for (const auto& lj : j["lines"]) {
    Line l;
    l.from = static_cast<int>(require_number(lj, "from", path + ".lines[]"));
    l.to = static_cast<int>(require_number(lj, "to", path + ".lines[]"));
    l.r_pu = require_number(lj, "r_pu", path + ".lines[]");
    l.x_pu = require_number(lj, "x_pu", path + ".lines[]");
    l.b_shunt_pu = lj.value("b_shunt_pu", 0.0);
    lines.push_back(l);
  }
  return build_admittance(lines, n_buses, std::polar(v0_mag, v0_ang), base_mva, base_kv);
}

void save_network(const NetworkModel& model, const std::string& path) {
  json j;
  j["base_mva"] = model.base_mva;
  j["base_kv"] = model.base_kv;
  j["v0"] = {{"mag", std::abs(model.v0)}, {"angle_deg", std::arg(model.v0) * 180.0 / M_PI}};
  std::vector<int> buses(model.n_buses);
  for (int i = 0; i < model.n_buses; ++i) buses[i] = i;
  j["buses"] = buses;
  j["lines"] = json::array();
  for (const auto& l : model.lines)
    j["lines"].push_back({{"from", l.from},
                          {"to", l.to},
                          {"r_pu", l.r_pu},
                          {"x_pu", l.x_pu},
                          {"b_shunt_pu", l.b_shunt_pu}});
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

DerFleet load_fleet(const std::string& path, double base_mva) {
  const json j = read_json_file(path);
  if (!j.contains("ders") || !j["ders"].is_array())
    throw ConfigError(path + ": missing array field 'ders'");
  DerFleet fleet;
  for (const auto& dj : j["ders"]) {
    DerDevice d;
    d.node = static_cast<int>(require_number(dj, "node", path + ".ders[]"));
    d.s_n = require_number(dj, "s_n_kva", path + ".ders[]") / 1000.0 / base_mva;
    d.q_frac = dj.value("q_frac", 0.44);
    d.c_p = dj.value("c_p", 3.0);
    d.c_q = dj.value("c_q", 1.0);
    d.p_max = 0.0;
    if (d.s_n <= 0.0) throw ConfigError(path + ": s_n_kva must be positive");
    if (d.q_frac < 0.0 || d.q_frac > 1.0) throw ConfigError(path + ": q_frac must be in [0,1]");
    fleet.devices.push_back(d);
  }
  if (fleet.devices.empty()) throw ConfigError(path + ": fleet has no DERs");
  return fleet;
}

namespace {

constexpr const char* kLoadHeader = "t_s,node,p_l_pu,q_l_pu";
constexpr const char* kDerHeader = "t_s,der,p_max_pu";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

ScenarioTimeSeries load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kLoadHeader)
    throw ConfigError(path + ": expected header '" + std::string(kLoadHeader) + "'");

  struct LoadRow { double t; int node; double p, q; };
  struct DerRow { double t; int der; double p_max; };
  std::vector<LoadRow> load_rows;
  std::vector<DerRow> der_rows;
  bool in_der_section = false;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line == kDerHeader) {
      in_der_section = true;
      continue;
    }
    const auto f = split_csv(line);
    try {
      if (!in_der_section) {
        if (f.size() != 4) throw std::invalid_argument("need 4 fields");
        load_rows.push_back({std::stod(f[0]), std::stoi(f[1]), std::stod(f[2]), std::stod(f[3])});
      } else {
        if (f.size() != 3) throw std::invalid_argument("need 3 fields");
        der_rows.push_back({std::stod(f[0]), std::stoi(f[1]), std::stod(f[2])});
      }
    } catch (const std::exception& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": bad row (" + e.what() + ")");
    }
  }
  if (load_rows.empty()) throw ConfigError(path + ": no load rows");
  if (der_rows.empty()) throw ConfigError(path + ": no DER availability rows");

  std::vector<double> times;
  for (const auto& r : load_rows)
    if (times.empty() || r.t != times.back()) times.push_back(r.t);
  const int samples = static_cast<int>(times.size());
  if (samples < 2) throw ConfigError(path + ": need at least two samples");
  const double period = times[1] - times[0];
  for (int k = 0; k < samples; ++k)
    if (std::abs(times[k] - k * period) > 1e-6)
      throw ConfigError(path + ": time grid not uniform at t=" + format_double(times[k]));

  int n_nodes = 0;
  for (const auto& r : load_rows) n_nodes = std::max(n_nodes, r.node);
  int n_der = 0;
  for (const auto& r : der_rows) n_der = std::max(n_der, r.der + 1);

  ScenarioTimeSeries scen;
  scen.sample_period_s = period;
  scen.p_load = Eigen::MatrixXd::Constant(samples, n_nodes, std::nan(""));
  scen.q_load = Eigen::MatrixXd::Constant(samples, n_nodes, std::nan(""));
  scen.p_avail = Eigen::MatrixXd::Constant(samples, n_der, std::nan(""));
  for (const auto& r : load_rows) {
    const int k = static_cast<int>(std::lround(r.t / period));
    if (k < 0 || k >= samples || r.node < 1 || r.node > n_nodes)
      throw ConfigError(path + ": load row out of range at t=" + format_double(r.t));
    scen.p_load(k, r.node - 1) = r.p;
    scen.q_load(k, r.node - 1) = r.q;
  }
  for (const auto& r : der_rows) {
    const int k = static_cast<int>(std::lround(r.t / period));
    if (k < 0 || k >= samples || r.der < 0 || r.der >= n_der)
      throw ConfigError(path + ": DER row out of range at t=" + format_double(r.t));
    scen.p_avail(k, r.der) = r.p_max;
  }
  if (!scen.p_load.allFinite() || !scen.q_load.allFinite())
    throw ConfigError(path + ": missing load entries (every node needs every sample)");
  if (!scen.p_avail.allFinite())
    throw ConfigError(path + ": missing DER availability entries");
  return scen;
}

void save_scenario(const ScenarioTimeSeries& scen, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << kLoadHeader << "\n";
  for (int k = 0; k < scen.samples(); ++k) {
    const double t = k * scen.sample_period_s;
    for (int n = 0; n < scen.n_nodes(); ++n)
      out << format_double(t) << ',' << (n + 1) << ',' << format_double(scen.p_load(k, n)) << ','
          << format_double(scen.q_load(k, n)) << "\n";
  }
  out << kDerHeader << "\n";
  for (int k = 0; k < scen.samples(); ++k) {
    const double t = k * scen.sample_period_s;
    for (int i = 0; i < scen.n_der(); ++i)
      out << format_double(t) << ',' << i << ',' << format_double(scen.p_avail(k, i)) << "\n";
  }
}

void write_steps_csv(const SimulationMetrics& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  if (metrics.steps.empty()) return;
  const int n = static_cast<int>(metrics.steps.front().nu.size());
  const int g2 = static_cast<int>(metrics.steps.front().u.size());
  out << "t_s";
  for (int i = 1; i <= n; ++i) out << ",nu_" << i;
  for (int i = 0; i < g2 / 2; ++i) out << ",p_" << i;
  for (int i = 0; i < g2 / 2; ++i) out << ",q_" << i;
  out << ",cost,losses_pu,p0_pu,q0_pu,qp_ok,clamped\n";
  for (const auto& s : metrics.steps) {
    out << format_double(s.t);
    for (int i = 0; i < n; ++i) out << ',' << format_double(s.nu(i));
    for (int i = 0; i < g2; ++i) out << ',' << format_double(s.u(i));
    out << ',' << format_double(s.cost) << ',' << format_double(s.losses) << ','
        << format_double(s.p0) << ',' << format_double(s.q0) << ',' << (s.qp_ok ? 1 : 0) << ','
        << s.clamped << "\n";
  }
}

void write_summary_json(const SimulationMetrics& metrics, const std::string& controller,
                        uint64_t seed, const std::string& path) {
  json j;
  j["controller"] = controller;
  j["seed"] = seed;
  j["dt_control_s"] = metrics.dt_control_s;
  j["sample_period_s"] = metrics.sample_period_s;
  j["duration_s"] = metrics.steps.empty() ? 0.0
                                          : metrics.steps.back().t + metrics.dt_control_s;
  j["v_lower"] = metrics.v_lower;
  j["v_upper"] = metrics.v_upper;
  j["cumulative_cost"] = metrics.cumulative_cost;
  j["cumulative_losses_pu_h"] = metrics.cumulative_losses_pu_h;
  j["max_voltage_pu"] = metrics.max_voltage;
  j["min_voltage_pu"] = metrics.min_voltage;
  j["overvoltage"] = {{"alpha", metrics.v_upper},
                      {"node_samples_10s", metrics.overvoltage_samples_10s},
                      {"max_T_samples", metrics.durations.max_t},
                      {"mean_T_samples", metrics.durations.mean_t},
                      {"max_T_s", metrics.durations.max_t * metrics.sample_period_s},
                      {"mean_T_s", metrics.durations.mean_t * metrics.sample_period_s}};
  j["clamp_count"] = metrics.clamp_count;
  j["qp_infeasible_count"] = metrics.qp_infeasible_count;
  j["disconnect_events"] = metrics.disconnect_events;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

void write_plot_data(const SimulationMetrics& metrics, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "plot_max_voltage.csv");
    out << "t_s,max_nu_pu\n";
    for (const auto& s : metrics.steps)
      out << format_double(s.t) << ',' << format_double(s.nu.maxCoeff()) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "plot_impacted_nodes.csv");
    out << "t_s,nodes_above_v_upper\n";
    for (const auto& s : metrics.steps)
      out << format_double(s.t) << ',' << (s.nu.array() > metrics.v_upper).count() << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "plot_cumulative_cost.csv");
    out << "t_s,cumulative_cost\n";
    double acc = 0.0;
    for (const auto& s : metrics.steps) {
      acc += s.cost * metrics.dt_control_s;
      out << format_double(s.t) << ',' << format_double(acc) << "\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "plot_cumulative_losses.csv");
    out << "t_s,cumulative_losses_pu_h\n";
    double acc = 0.0;
    for (const auto& s : metrics.steps) {
      acc += s.losses * metrics.dt_control_s / 3600.0;
      out << format_double(s.t) << ',' << format_double(acc) << "\n";
    }
  }
}

}  // namespace gridflow
