#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hermite_cfm/harness.hpp"
#include "hermite_cfm/solver.hpp"

namespace hcfm::cli {

struct DomainConfig {
  std::string type;                      ///< interval | rectangle | cross
  std::array<double, 4> bounds{0, 1, 0, 1};
  double arm_lo = 1.0 / 3.0, arm_hi = 2.0 / 3.0;
};

struct ProblemConfig {
  std::string name;
  double omega = 0.0;
  double sigma = 0.035;
  std::array<double, 2> center{0.5, 0.5};
};

struct MaterialConfig {
  std::string type = "constant";  ///< constant | varcoef
  double mu = 1.0, eps = 1.0;
};

struct SweepConfig {
  std::string parameter;  ///< h | cfl | c_h (empty: none)
  std::vector<double> values;
};

/// Where a setting came from, echoed in every CSV header.
struct Provenance {
  std::string key, value, origin;  ///< origin: literature | project default | config
};

struct Config {
  int dimension = 2;
  DomainConfig domain;
  int m = 1;
  int k = 2;
  double c_h = 1.0;
  double beta = 1.5;
  double cfl = 0.9;
  int quad_points = 5;
  int q = 3;
  ProblemConfig problem;
  MaterialConfig material;
  BcKind bc = BcKind::PEC;
  double t0 = 0.0, tf = 1.0;
  std::vector<int> meshes;
  int reference = 0;       ///< self-convergence reference resolution
  std::uint64_t seed = 1;
  std::string output = ".";
  std::size_t steps = 10000;      ///< long-run step count
  std::size_t record_every = 1;   ///< long-run history stride
  SweepConfig sweep;
  std::vector<Provenance> provenance;

  /// The test problem with the configured domain, material, bc and window.
  ProblemSpec make_problem() const;
  /// Zero initial data on the configured domain and bc.
  ProblemSpec make_homogeneous() const;
  SolverParams solver_params() const;
};

/// Parses JSON text (comments allowed). Throws ConfigError.
Config parse_config_text(const std::string& text);
/// Reads and parses a file. Throws ConfigError.
Config parse_config(const std::string& path);

}  // namespace hcfm::cli
