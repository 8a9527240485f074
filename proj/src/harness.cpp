#include "smom/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace smom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void parallel_tasks(int n_tasks, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, n_tasks));
  if (workers == 1) {
    for (int i = 0; i < n_tasks; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
}

int auto_stride(long long iterations) {
  if (iterations <= 512) {
    return 1;
  }
  return static_cast<int>((iterations + 511) / 512);
}

Schedule build_method_schedule(const MethodConfig& m, const ProblemConfig& p,
                               long long iterations) {
  const int K = static_cast<int>(iterations);
  if (m.schedule.has_value()) {
    const ScheduleConfig& sc = *m.schedule;
    if (sc.type == "sgd_convex") {
      return schedule_sgd_convex(p.L, sc.R, sc.sigma, sc.b, K, sc.delta);
    }
    if (sc.type == "sgd_strongly_convex") {
      return schedule_sgd_strongly_convex(p.L, p.mu, sc.R, sc.sigma, sc.b, K, sc.delta);
    }
    return schedule_sstm_convex(p.L, sc.R, sc.sigma, sc.b, K, sc.delta);
  }
  const double lr = m.lr.value_or(1.0);
  const double clip = m.clip.value_or(1.0);
  Schedule s = Schedule::constant(K, lr, clip);
  if (m.kind == "sstm") {
    s.sstm_a = m.sstm_a.value_or(0.0);
    s.smoothness = p.L;
  }
  return s;
}

RunResult execute_run(const Objective& problem, const StochasticGradient& oracle,
                      const Vector& x0, const MethodConfig& m, const Schedule& schedule,
                      RngStream rng, int stride) {
  RunResult out;
  try {
    if (m.kind == "sstm") {
      out.trajectory = clipped_sstm(problem, oracle, x0, schedule, m.aggregator,
                                    std::move(rng), stride);
    } else {
      out.trajectory = clipped_sgd(problem, oracle, x0, schedule, m.aggregator,
                                   std::move(rng), stride);
    }
  } catch (const DivergedError& e) {
    out.trajectory = e.trajectory;
    out.diverged = true;
  }
  return out;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  bool first = true;
  for (const std::string& c : cells) {
    if (!first) {
      row += ',';
    }
    row += c;
    first = false;
  }
  row += '\n';
  return row;
}

double final_gap_or_worst(const RunResult& r) {
  if (r.diverged || r.trajectory.records.empty()) {
    return kInf;
  }
  return r.trajectory.records.back().f_gap;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string method_slug(const std::string& name) {
  std::string slug;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      slug += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!slug.empty() && slug.back() != '_') {
      slug += '_';
    }
  }
  while (!slug.empty() && slug.back() == '_') {
    slug.pop_back();
  }
  return slug.empty() ? "method" : slug;
}

std::vector<MethodConfig> build_baselines(double theta) {
  const auto with = [](const std::string& name, AggregatorSpec agg) {
    MethodConfig m;
    m.name = name;
    m.aggregator = agg;
    m.lr = 0.01;  // placeholder until tuned values are applied
    m.clip = agg.uses_clipping() ? std::optional<double>(1.0) : std::nullopt;
    return m;
  };
  std::vector<MethodConfig> out;
  out.push_back(with("clipped-MB-SGD",
                     AggregatorSpec::mean_of(5).clipped(AggregatorSpec::ClipMode::clip_after)));
  out.push_back(with("MB-clipped-SGD",
                     AggregatorSpec::mean_of(5).clipped(
                         AggregatorSpec::ClipMode::clip_each_then_mean)));
  out.push_back(with("Med-MB-SGD", AggregatorSpec::median_of(2)));
  out.push_back(with("clipped-Med-MB-SGD",
                     AggregatorSpec::median_of(2).clipped(AggregatorSpec::ClipMode::clip_after)));
  out.push_back(with("SMoM-MB-SGD", AggregatorSpec::smom_of(2, 2, theta)));
  out.push_back(with("clipped-SMoM-MB-SGD",
                     AggregatorSpec::smom_of(2, 2, theta)
                         .clipped(AggregatorSpec::ClipMode::clip_after)));
  return out;
}

std::map<std::string, std::pair<double, std::optional<double>>> tuned_defaults(
    NoiseSpec::Kind kind) {
  using Entry = std::pair<double, std::optional<double>>;
  std::map<std::string, Entry> out;
  switch (kind) {
    case NoiseSpec::Kind::cauchy:
    case NoiseSpec::Kind::stable_sym:
      out["clipped-MB-SGD"] = Entry{0.004, 4.0};
      out["Med-MB-SGD"] = Entry{0.002, std::nullopt};
      out["MB-clipped-SGD"] = Entry{0.01, 4.0};
      out["clipped-Med-MB-SGD"] = Entry{0.002, 2.0};
      out["SMoM-MB-SGD"] = Entry{0.002, std::nullopt};
      out["clipped-SMoM-MB-SGD"] = Entry{0.008, 1.0};
      break;
    case NoiseSpec::Kind::cauchy_exp_mix:
      out["clipped-MB-SGD"] = Entry{0.008, 1.5};
      out["Med-MB-SGD"] = Entry{0.002, std::nullopt};
      out["MB-clipped-SGD"] = Entry{0.04, 4.0};
      out["clipped-Med-MB-SGD"] = Entry{0.002, 8.0};
      out["SMoM-MB-SGD"] = Entry{0.002, std::nullopt};
      out["clipped-SMoM-MB-SGD"] = Entry{0.002, 8.0};
      break;
    case NoiseSpec::Kind::cauchy_pareto_mix:
      out["clipped-MB-SGD"] = Entry{0.008, 1.5};
      out["Med-MB-SGD"] = Entry{0.002, std::nullopt};
      out["MB-clipped-SGD"] = Entry{0.02, 0.75};
      out["clipped-Med-MB-SGD"] = Entry{0.002, 8.0};
      out["SMoM-MB-SGD"] = Entry{0.002, std::nullopt};
      out["clipped-SMoM-MB-SGD"] = Entry{0.008, 1.0};
      break;
    case NoiseSpec::Kind::gaussian:
      break;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const QuadraticProblem problem =
      generate_spd(config.problem.d, config.problem.mu, config.problem.L,
                   RngStream(config.problem.matrix_seed));
  const Vector x0 = Vector::Constant(
      config.problem.d, config.x0_scale / std::sqrt(static_cast<double>(config.problem.d)));

  const int n_methods = static_cast<int>(config.methods.size());
  ExperimentResult result;
  result.runs.assign(static_cast<std::size_t>(n_methods), {});

  struct Task {
    int method;
    int run;
  };
  std::vector<Task> tasks;
  std::vector<Schedule> schedules;
  std::vector<int> strides;
  for (int mi = 0; mi < n_methods; ++mi) {
    const MethodConfig& m = config.methods[static_cast<std::size_t>(mi)];
    result.method_names.push_back(m.name);
    const long long iterations = config.budget / m.aggregator.oracle_cost();
    schedules.push_back(build_method_schedule(m, config.problem, iterations));
    strides.push_back(config.record_stride > 0 ? config.record_stride
                                               : auto_stride(iterations));
    result.runs[static_cast<std::size_t>(mi)].resize(static_cast<std::size_t>(config.runs));
    for (int ri = 0; ri < config.runs; ++ri) {
      tasks.push_back(Task{mi, ri});
    }
  }

  RngStream root(config.base_seed);
  parallel_tasks(static_cast<int>(tasks.size()), threads, [&](int ti) {
    const Task& t = tasks[static_cast<std::size_t>(ti)];
    const MethodConfig& m = config.methods[static_cast<std::size_t>(t.method)];
    StochasticGradient oracle = make_additive_noise_oracle(problem, config.noise);
    RngStream run_rng = root.child(static_cast<std::uint64_t>(t.method))
                            .child(static_cast<std::uint64_t>(t.run));
    result.runs[static_cast<std::size_t>(t.method)][static_cast<std::size_t>(t.run)] =
        execute_run(problem, oracle, x0, m, schedules[static_cast<std::size_t>(t.method)],
                    std::move(run_rng), strides[static_cast<std::size_t>(t.method)]);
  });

  // Single collector past this point; output is identical for any thread count.
  namespace fs = std::filesystem;
  fs::create_directories(config.output);

  for (int mi = 0; mi < n_methods; ++mi) {
    const MethodConfig& m = config.methods[static_cast<std::size_t>(mi)];
    const std::string slug = method_slug(m.name);
    const std::vector<RunResult>& runs = result.runs[static_cast<std::size_t>(mi)];

    const std::string raw_path = (fs::path(config.output) / (slug + "_runs.csv")).string();
    {
      std::ofstream raw(raw_path);
      raw << "run,iteration,oracle_calls,f_gap,dist2,diverged\n";
      for (int ri = 0; ri < config.runs; ++ri) {
        const RunResult& r = runs[static_cast<std::size_t>(ri)];
        for (const TrajectoryRecord& rec : r.trajectory.records) {
          raw << csv_row({std::to_string(ri), std::to_string(rec.iteration),
                          std::to_string(rec.oracle_calls), format_double(rec.f_gap),
                          format_double(rec.dist2), r.diverged ? "1" : "0"});
        }
      }
    }
    result.raw_files.push_back(raw_path);

    // Shared checkpoints: all runs of a method record the same iteration set;
    // diverged runs are carried forward at +inf (worst case) past their end.
    std::size_t max_len = 0;
    int longest = 0;
    for (int ri = 0; ri < config.runs; ++ri) {
      const auto len = runs[static_cast<std::size_t>(ri)].trajectory.records.size();
      if (len > max_len) {
        max_len = len;
        longest = ri;
      }
    }
    const std::string summary_path =
        (fs::path(config.output) / (slug + "_summary.csv")).string();
    {
      std::ofstream sum(summary_path);
      sum << "oracle_calls,mean_f_gap,p5_f_gap,p95_f_gap,std_f_gap\n";
      const auto& anchor = runs[static_cast<std::size_t>(longest)].trajectory.records;
      for (std::size_t ci = 0; ci < max_len; ++ci) {
        std::vector<double> vals;
        vals.reserve(static_cast<std::size_t>(config.runs));
        for (int ri = 0; ri < config.runs; ++ri) {
          const auto& recs = runs[static_cast<std::size_t>(ri)].trajectory.records;
          if (ci < recs.size()) {
            vals.push_back(recs[ci].f_gap);
          } else {
            vals.push_back(kInf);
          }
        }
        double mean_v = 0.0;
        for (double v : vals) {
          mean_v += v;
        }
        mean_v /= static_cast<double>(vals.size());
        double std_v = 0.0;
        if (vals.size() > 1 && std::isfinite(mean_v)) {
          for (double v : vals) {
            std_v += (v - mean_v) * (v - mean_v);
          }
          std_v = std::sqrt(std_v / static_cast<double>(vals.size() - 1));
        }
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        sum << csv_row({std::to_string(anchor[ci].oracle_calls), format_double(mean_v),
                        format_double(percentile_sorted(sorted, 5.0)),
                        format_double(percentile_sorted(sorted, 95.0)),
                        format_double(std_v)});
      }
    }
    result.summary_files.push_back(summary_path);
  }

  const auto t_end = std::chrono::steady_clock::now();
  nlohmann::json meta;
  meta["config"] = nlohmann::json::parse(serialize_config(config));
  meta["config_hash"] = config_hash(config);
  meta["base_seed"] = config.base_seed;
  meta["wall_time_s"] =
      std::chrono::duration<double>(t_end - t_start).count();
  meta["version"] = "0.1.0";
  const std::string meta_path = (fs::path(config.output) / "meta.json").string();
  std::ofstream(meta_path) << meta.dump(2) << "\n";
  result.meta_file = meta_path;
  return result;
}

GridSearchResult grid_search(const ExperimentConfig& config, const GridSpec& grid,
                             int threads) {
  config.validate();
  grid.validate();

  const QuadraticProblem problem =
      generate_spd(config.problem.d, config.problem.mu, config.problem.L,
                   RngStream(config.problem.matrix_seed));
  const Vector x0 = Vector::Constant(
      config.problem.d, config.x0_scale / std::sqrt(static_cast<double>(config.problem.d)));

  struct Cell {
    int method;
    double lr;
    std::optional<double> clip;
  };
  std::vector<Cell> cells;
  for (int mi = 0; mi < static_cast<int>(config.methods.size()); ++mi) {
    const bool clipped = config.methods[static_cast<std::size_t>(mi)].aggregator.uses_clipping();
    for (double lr : grid.lr_grid) {
      if (clipped) {
        for (double cl : grid.clip_grid) {
          cells.push_back(Cell{mi, lr, cl});
        }
      } else {
        cells.push_back(Cell{mi, lr, std::nullopt});
      }
    }
  }

  std::vector<std::vector<double>> cell_scores(cells.size());
  std::vector<int> cell_diverged(cells.size(), 0);
  for (auto& cs : cell_scores) {
    cs.assign(static_cast<std::size_t>(grid.tuning_runs), 0.0);
  }

  struct Task {
    int cell;
    int run;
  };
  std::vector<Task> tasks;
  for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
    for (int ri = 0; ri < grid.tuning_runs; ++ri) {
      tasks.push_back(Task{ci, ri});
    }
  }

  RngStream root(config.base_seed);
  std::vector<std::atomic<int>> diverged_counters(cells.size());
  parallel_tasks(static_cast<int>(tasks.size()), threads, [&](int ti) {
    const Task& t = tasks[static_cast<std::size_t>(ti)];
    const Cell& cell = cells[static_cast<std::size_t>(t.cell)];
    MethodConfig m = config.methods[static_cast<std::size_t>(cell.method)];
    m.lr = cell.lr;
    m.clip = cell.clip;
    m.schedule.reset();
    const long long iterations = grid.tuning_budget / m.aggregator.oracle_cost();
    const Schedule schedule = build_method_schedule(m, config.problem, iterations);
    StochasticGradient oracle = make_additive_noise_oracle(problem, config.noise);
    RngStream run_rng = root.child(static_cast<std::uint64_t>(cell.method))
                            .child(static_cast<std::uint64_t>(t.cell))
                            .child(static_cast<std::uint64_t>(t.run));
    const RunResult r = execute_run(problem, oracle, x0, m, schedule, std::move(run_rng),
                                    static_cast<int>(std::max(1ll, iterations)));
    cell_scores[static_cast<std::size_t>(t.cell)][static_cast<std::size_t>(t.run)] =
        final_gap_or_worst(r);
    if (r.diverged) {
      diverged_counters[static_cast<std::size_t>(t.cell)].fetch_add(1);
    }
  });

  GridSearchResult result;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    double mean_gap = 0.0;
    for (double v : cell_scores[ci]) {
      mean_gap += v;
    }
    mean_gap /= static_cast<double>(grid.tuning_runs);
    GridCellScore score;
    score.method = config.methods[static_cast<std::size_t>(cells[ci].method)].name;
    score.lr = cells[ci].lr;
    score.clip = cells[ci].clip;
    score.mean_final_gap = mean_gap;
    score.diverged_runs = diverged_counters[ci].load();
    result.scores.push_back(score);
  }

  for (int mi = 0; mi < static_cast<int>(config.methods.size()); ++mi) {
    const std::string& name = config.methods[static_cast<std::size_t>(mi)].name;
    const GridCellScore* best = nullptr;
    for (const GridCellScore& s : result.scores) {
      if (s.method != name || !std::isfinite(s.mean_final_gap)) {
        continue;
      }
      if (best == nullptr || s.mean_final_gap < best->mean_final_gap ||
          (s.mean_final_gap == best->mean_final_gap &&
           (s.lr < best->lr ||
            (s.lr == best->lr && s.clip.value_or(0.0) < best->clip.value_or(0.0))))) {
        best = &s;
      }
    }
    if (best == nullptr) {
      throw NoViableCellError("grid_search: every cell diverged for method " + name);
    }
    result.best[name] = {best->lr, best->clip};
  }

  namespace fs = std::filesystem;
  fs::create_directories(config.output);
  const std::string path = (fs::path(config.output) / "grid_scores.csv").string();
  std::ofstream out(path);
  out << "method,lr,clip,mean_final_f_gap,diverged_runs\n";
  for (const GridCellScore& s : result.scores) {
    out << csv_row({s.method, format_double(s.lr),
                    s.clip ? format_double(*s.clip) : std::string("-"),
                    format_double(s.mean_final_gap), std::to_string(s.diverged_runs)});
  }
  result.scores_file = path;
  return result;
}

namespace {

struct SummaryRow {
  long long oracle_calls;
  double mean_f_gap;
};

std::vector<SummaryRow> read_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("compare_report: missing result file " + path);
  }
  std::string line;
  std::getline(in, line);  // header
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    SummaryRow row{};
    std::getline(ss, cell, ',');
    row.oracle_calls = std::stoll(cell);
    std::getline(ss, cell, ',');
    row.mean_f_gap = std::stod(cell);
    rows.push_back(row);
  }
  if (rows.empty()) {
    throw std::runtime_error("compare_report: empty summary " + path);
  }
  return rows;
}

}  // namespace

ComparisonReport compare_report(const std::string& result_dir,
                                const std::vector<std::string>& method_names) {
  namespace fs = std::filesystem;
  ComparisonReport report;
  for (const std::string& name : method_names) {
    const std::string path =
        (fs::path(result_dir) / (method_slug(name) + "_summary.csv")).string();
    const std::vector<SummaryRow> rows = read_summary(path);
    MethodComparison cmp;
    cmp.method = name;
    cmp.final_mean_gap = rows.back().mean_f_gap;
    const long long budget = rows.back().oracle_calls;
    const long long target = static_cast<long long>(0.4 * static_cast<double>(budget));
    double gap40 = rows.front().mean_f_gap;
    for (const SummaryRow& r : rows) {
      if (r.oracle_calls <= target) {
        gap40 = r.mean_f_gap;
      }
    }
    cmp.plateau_ratio = gap40 != 0.0 ? cmp.final_mean_gap / gap40 : 1.0;
    cmp.plateau = cmp.plateau_ratio > 0.5;
    report.methods.push_back(cmp);
  }

  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < report.methods.size(); ++j) {
      const MethodComparison& a = report.methods[i];
      const MethodComparison& b = report.methods[j];
      if (a.final_mean_gap < b.final_mean_gap) {
        report.orderings.push_back(a.method + " < " + b.method);
      } else if (b.final_mean_gap < a.final_mean_gap) {
        report.orderings.push_back(b.method + " < " + a.method);
      } else {
        report.orderings.push_back(a.method + " = " + b.method);
      }
    }
  }

  const std::string csv_path = (fs::path(result_dir) / "comparison.csv").string();
  {
    std::ofstream out(csv_path);
    out << "method,final_mean_f_gap,plateau_ratio,plateau\n";
    for (const MethodComparison& m : report.methods) {
      out << csv_row({m.method, format_double(m.final_mean_gap),
                      format_double(m.plateau_ratio), m.plateau ? "1" : "0"});
    }
  }
  const std::string txt_path = (fs::path(result_dir) / "comparison.txt").string();
  {
    std::ofstream out(txt_path);
    out << "final mean error orderings:\n";
    for (const std::string& line : report.orderings) {
      out << "  " << line << "\n";
    }
  }
  report.summary_csv = csv_path;
  report.summary_txt = txt_path;
  return report;
}

}  // namespace smom
