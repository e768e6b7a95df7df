#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "gridflow/errors.hpp"

namespace gridflow {

/// Inverter-interfaced DER connected at a network node. Powers are in per-unit
/// on the system base; p_max is the currently available active power and is
/// updated by the scenario as conditions change.
struct DerDevice {
  int node = 1;          // bus index m(i), 1..N
  double s_n = 1.0;      // rated apparent power, pu
  double p_max = 0.0;    // available active power, pu (0 <= p_max <= s_n)
  double q_frac = 0.44;  // reactive fraction limit
  double c_p = 3.0;      // curtailment cost weight
  double c_q = 1.0;      // reactive usage cost weight
};

struct DerFleet {
  std::vector<DerDevice> devices;

  int size() const { return static_cast<int>(devices.size()); }

  // Setpoint vector layout is u = [p_1..p_G, q_1..q_G] throughout.
  double p_of(const Eigen::VectorXd& u, int i) const { return u(i); }
  double q_of(const Eigen::VectorXd& u, int i) const { return u(size() + i); }
};

/// Net complex injections at buses 1..N for setpoints u and consumption-positive
/// loads: s_n = sum_{i: m(i)=n} (p_i + j q_i) - (p_l,n + j q_l,n).
inline Eigen::VectorXcd net_injections(const DerFleet& fleet, const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& p_l, const Eigen::VectorXd& q_l) {
  const int n_nodes = static_cast<int>(p_l.size());
  if (q_l.size() != n_nodes) throw DimensionMismatch("net_injections: p_l/q_l size mismatch");
  if (u.size() != 2 * fleet.size()) throw DimensionMismatch("net_injections: u size != 2G");
  Eigen::VectorXcd s(n_nodes);
  for (int n = 0; n < n_nodes; ++n) s(n) = std::complex<double>(-p_l(n), -q_l(n));
  for (int i = 0; i < fleet.size(); ++i) {
    const int n = fleet.devices[i].node - 1;
    if (n < 0 || n >= n_nodes) throw DimensionMismatch("net_injections: DER node out of range");
    s(n) += std::complex<double>(fleet.p_of(u, i), fleet.q_of(u, i));
  }
  return s;
}

}  // namespace gridflow
