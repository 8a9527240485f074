#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smom/estimators.hpp"
#include "smom/noise.hpp"

namespace smom {

/// Named theoretical schedule to build from problem constants, or nothing
/// when the method carries explicit (lr, clip) numbers.
struct ScheduleConfig {
  std::string type;  // "sgd_convex" | "sgd_strongly_convex" | "sstm_convex"
  double R = 1.0;
  double sigma = 0.0;
  double b = 0.0;
  double delta = 0.1;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct MethodConfig {
  std::string name;
  std::string kind = "sgd";  // "sgd" | "sstm"
  AggregatorSpec aggregator;
  std::optional<double> lr;
  std::optional<double> clip;
  std::optional<double> sstm_a;  // explicit accelerated stepsize parameter
  std::optional<ScheduleConfig> schedule;

  void validate() const;

  friend bool operator==(const MethodConfig&, const MethodConfig&) = default;
};

struct ProblemConfig {
  int d = 10;
  double mu = 1.0;
  double L = 10.0;
  std::uint64_t matrix_seed = 0;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct GridSpec {
  std::vector<double> lr_grid;
  std::vector<double> clip_grid;
  long long tuning_budget = 0;
  int tuning_runs = 1;

  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct ExperimentConfig {
  ProblemConfig problem;
  double x0_scale = 8.0;  // x0 = x0_scale / sqrt(d) * ones
  NoiseSpec noise;
  std::vector<MethodConfig> methods;
  long long budget = 1;
  int runs = 1;
  std::uint64_t base_seed = 0;
  std::string output;
  int record_stride = 0;  // 0 = choose automatically
  std::optional<GridSpec> grid;

  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// FNV-1a hash of the canonical serialized form, for reproducibility stamps.
std::string config_hash(const ExperimentConfig& config);

}  // namespace smom
