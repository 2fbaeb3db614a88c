#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cspin {

// Base of every error thrown by the library. kind() is a stable,
// machine-readable tag used by the CLI's JSON error reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view kind() const noexcept = 0;
};

class DimensionError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "dimension"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "config"; }
};

class PreconditionError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "precondition"; }
};

// A configuration on (or numerically indistinguishable from) the collision set.
class CollisionError : public Error {
 public:
  CollisionError(int i, int j, double distance)
      : Error("collision between bodies " + std::to_string(i) + " and " +
              std::to_string(j) + " (r = " + std::to_string(distance) + ")"),
        i_(i), j_(j) {}
  std::string_view kind() const noexcept override { return "collision"; }
  std::pair<int, int> pair() const noexcept { return {i_, j_}; }

 private:
  int i_;
  int j_;
};

// The affine shape chart is undefined (last reduced coordinate vanishes)
// or an orbit/solver left the region where the chart is usable.
class ChartError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "chart"; }
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  std::string_view kind() const noexcept override { return "divergence"; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "integration"; }
};

}  // namespace cspin
