#pragma once

#include <stdexcept>
#include <string>

namespace gridflow {

struct DisconnectedNetwork : std::runtime_error {
  explicit DisconnectedNetwork(const std::string& what) : std::runtime_error(what) {}
};

struct SingularY : std::runtime_error {
  explicit SingularY(const std::string& what) : std::runtime_error(what) {}
};

struct PowerFlowDiverged : std::runtime_error {
  PowerFlowDiverged(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct NegativeDual : std::invalid_argument {
  explicit NegativeDual(const std::string& what) : std::invalid_argument(what) {}
};

struct QpInfeasible : std::runtime_error {
  explicit QpInfeasible(const std::string& what) : std::runtime_error(what) {}
};

struct QpMaxIterExceeded : std::runtime_error {
  explicit QpMaxIterExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gridflow
