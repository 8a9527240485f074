#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smom/config.hpp"
#include "smom/optimizers.hpp"

namespace smom {

/// Grid search found no cell that finished without diverging.
struct NoViableCellError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Locale-independent decimal formatting used for every CSV cell.
std::string format_double(double v);

/// Filesystem-safe method slug (lowercase, non-alphanumerics collapsed to _).
std::string method_slug(const std::string& name);

/// The six reference baselines: mean/median/median-of-means aggregation with
/// batch size 5 (or m = n = 2 for the smoothed median of means, 10 calls per
/// iteration), in their unclipped and clipped variants.
std::vector<MethodConfig> build_baselines(double theta = 0.1);

/// Tuned (lr, clip) presets per noise family for the reference baselines.
/// Returns the subset of `methods` names found in the preset table.
std::map<std::string, std::pair<double, std::optional<double>>> tuned_defaults(
    NoiseSpec::Kind kind);

struct RunResult {
  Trajectory trajectory;
  bool diverged = false;
};

struct ExperimentResult {
  std::vector<std::string> method_names;
  std::vector<std::vector<RunResult>> runs;  // [method][run]
  std::vector<std::string> summary_files;
  std::vector<std::string> raw_files;
  std::string meta_file;
};

/// Executes every method x run with the per-task stream (base_seed, method,
/// run), writes one raw per-run CSV and one across-run summary CSV per method
/// (mean / p5 / p95 / std of the gap at shared oracle-call checkpoints), plus
/// a metadata file with the full config echo, its hash, and wall time.
/// Diverged runs are flagged and scored as worst case; the batch never aborts.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

struct GridCellScore {
  std::string method;
  double lr = 0.0;
  std::optional<double> clip;
  double mean_final_gap = 0.0;
  int diverged_runs = 0;
};

struct GridSearchResult {
  std::map<std::string, std::pair<double, std::optional<double>>> best;  // method -> (lr, clip)
  std::vector<GridCellScore> scores;
  std::string scores_file;
};

/// Exhaustive (lr, clip) search per method with `tuning_runs` short runs per
/// cell; unclipped methods search the lr grid only. Selection is the argmin
/// of the mean final gap, ties toward smaller lr then smaller clip.
GridSearchResult grid_search(const ExperimentConfig& config, const GridSpec& grid,
                             int threads = 1);

struct MethodComparison {
  std::string method;
  double final_mean_gap = 0.0;
  double plateau_ratio = 0.0;  // gap at full budget over gap at 40% budget
  bool plateau = false;
};

struct ComparisonReport {
  std::vector<MethodComparison> methods;
  std::vector<std::string> orderings;  // "A < B" style lines
  std::string summary_csv;
  std::string summary_txt;
};

/// Reads per-method summary CSVs from `result_dir` and emits final-error
/// orderings and plateau flags (ratio > 0.5 between the errors at 100% and
/// 40% of the budget marks a plateau).
ComparisonReport compare_report(const std::string& result_dir,
                                const std::vector<std::string>& method_names);

}  // namespace smom
