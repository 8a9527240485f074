#include "smom/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace smom {

using nlohmann::json;

void MethodConfig::validate() const {
  if (name.empty()) {
    throw std::invalid_argument("method: name must be non-empty");
  }
  if (kind != "sgd" && kind != "sstm") {
    throw std::invalid_argument("method '" + name + "': kind must be sgd or sstm");
  }
  aggregator.validate();
  const bool explicit_lr = lr.has_value();
  if (schedule.has_value() == explicit_lr && kind == "sgd") {
    throw std::invalid_argument("method '" + name +
                                "': give either lr/clip or a schedule, not both");
  }
  if (kind == "sstm" && !schedule.has_value() && !sstm_a.has_value()) {
    throw std::invalid_argument("method '" + name +
                                "': sstm needs a schedule or an explicit sstm_a");
  }
  if (explicit_lr && !(*lr > 0.0)) {
    throw std::invalid_argument("method '" + name + "': lr must be positive");
  }
  if (clip.has_value() && !(*clip > 0.0)) {
    throw std::invalid_argument("method '" + name + "': clip must be positive");
  }
  if (aggregator.uses_clipping() && !schedule.has_value() && !clip.has_value()) {
    throw std::invalid_argument("method '" + name +
                                "': clipping aggregator needs a clip level");
  }
  if (schedule.has_value()) {
    const std::string& t = schedule->type;
    if (t != "sgd_convex" && t != "sgd_strongly_convex" && t != "sstm_convex") {
      throw std::invalid_argument("method '" + name + "': unknown schedule type " + t);
    }
  }
}

void GridSpec::validate() const {
  if (lr_grid.empty() || clip_grid.empty()) {
    throw std::invalid_argument("grid: lr_grid and clip_grid must be non-empty");
  }
  if (tuning_budget < 1 || tuning_runs < 1) {
    throw std::invalid_argument("grid: tuning_budget and tuning_runs must be >= 1");
  }
}

void ExperimentConfig::validate() const {
  if (problem.d < 1 || !(problem.mu > 0.0) || problem.L < problem.mu) {
    throw std::invalid_argument("problem: need d >= 1 and 0 < mu <= L");
  }
  noise.validate();
  if (noise.dimension != problem.d) {
    throw std::invalid_argument("noise dimension must match problem dimension");
  }
  if (budget < 1 || runs < 1) {
    throw std::invalid_argument("budget and runs must be >= 1");
  }
  if (record_stride < 0) {
    throw std::invalid_argument("record_stride must be >= 0");
  }
  if (methods.empty()) {
    throw std::invalid_argument("at least one method is required");
  }
  for (const MethodConfig& m : methods) {
    m.validate();
    if (m.aggregator.oracle_cost() > budget) {
      throw std::invalid_argument("method '" + m.name +
                                  "': per-iteration cost exceeds the budget");
    }
  }
  if (grid.has_value()) {
    grid->validate();
  }
}

namespace {

json noise_to_json(const NoiseSpec& n) {
  json j;
  j["kind"] = to_string(n.kind);
  j["d"] = n.dimension;
  switch (n.kind) {
    case NoiseSpec::Kind::cauchy:
      j["scale"] = n.scale;
      break;
    case NoiseSpec::Kind::stable_sym:
      j["alpha"] = n.alpha;
      j["scale"] = n.scale;
      break;
    case NoiseSpec::Kind::cauchy_exp_mix:
    case NoiseSpec::Kind::cauchy_pareto_mix:
      j["weight"] = n.weight;
      break;
    case NoiseSpec::Kind::gaussian:
      j["std"] = n.std_dev;
      break;
  }
  return j;
}

NoiseSpec noise_from_json(const json& j) {
  NoiseSpec n;
  n.kind = noise_kind_from_string(j.at("kind").get<std::string>());
  n.dimension = j.at("d").get<int>();
  n.scale = j.value("scale", 1.0);
  n.alpha = j.value("alpha", 1.0);
  n.weight = j.value("weight", 0.7);
  n.std_dev = j.value("std", 1.0);
  n.validate();
  return n;
}

json aggregator_to_json(const AggregatorSpec& a) {
  json j;
  j["rule"] = to_string(a.rule);
  j["m"] = a.m;
  j["n"] = a.n;
  j["theta"] = a.theta;
  j["clip_mode"] = to_string(a.clip_mode);
  return j;
}

AggregatorSpec aggregator_from_json(const json& j) {
  AggregatorSpec a;
  a.rule = aggregator_rule_from_string(j.at("rule").get<std::string>());
  a.m = j.value("m", 0);
  a.n = j.value("n", 1);
  a.theta = j.value("theta", 0.0);
  a.clip_mode = clip_mode_from_string(j.value("clip_mode", std::string("none")));
  a.validate();
  return a;
}

json schedule_to_json(const ScheduleConfig& s) {
  return json{{"type", s.type}, {"R", s.R}, {"sigma", s.sigma}, {"b", s.b},
              {"delta", s.delta}};
}

ScheduleConfig schedule_from_json(const json& j) {
  ScheduleConfig s;
  s.type = j.at("type").get<std::string>();
  s.R = j.value("R", 1.0);
  s.sigma = j.value("sigma", 0.0);
  s.b = j.value("b", 0.0);
  s.delta = j.value("delta", 0.1);
  return s;
}

json method_to_json(const MethodConfig& m) {
  json j;
  j["name"] = m.name;
  j["kind"] = m.kind;
  j["aggregator"] = aggregator_to_json(m.aggregator);
  if (m.lr) j["lr"] = *m.lr;
  if (m.clip) j["clip"] = *m.clip;
  if (m.sstm_a) j["sstm_a"] = *m.sstm_a;
  if (m.schedule) j["schedule"] = schedule_to_json(*m.schedule);
  return j;
}

MethodConfig method_from_json(const json& j) {
  MethodConfig m;
  m.name = j.at("name").get<std::string>();
  m.kind = j.value("kind", std::string("sgd"));
  m.aggregator = aggregator_from_json(j.at("aggregator"));
  if (j.contains("lr")) m.lr = j.at("lr").get<double>();
  if (j.contains("clip")) m.clip = j.at("clip").get<double>();
  if (j.contains("sstm_a")) m.sstm_a = j.at("sstm_a").get<double>();
  if (j.contains("schedule")) m.schedule = schedule_from_json(j.at("schedule"));
  m.validate();
  return m;
}

json grid_to_json(const GridSpec& g) {
  return json{{"lr_grid", g.lr_grid},
              {"clip_grid", g.clip_grid},
              {"tuning_budget", g.tuning_budget},
              {"tuning_runs", g.tuning_runs}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.lr_grid = j.at("lr_grid").get<std::vector<double>>();
  g.clip_grid = j.at("clip_grid").get<std::vector<double>>();
  g.tuning_budget = j.at("tuning_budget").get<long long>();
  g.tuning_runs = j.value("tuning_runs", 1);
  g.validate();
  return g;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["problem"] = json{{"d", c.problem.d},
                      {"mu", c.problem.mu},
                      {"L", c.problem.L},
                      {"matrix_seed", c.problem.matrix_seed}};
  j["x0_rule"] = json{{"scale", c.x0_scale}};
  j["noise"] = noise_to_json(c.noise);
  json methods = json::array();
  for (const MethodConfig& m : c.methods) {
    methods.push_back(method_to_json(m));
  }
  j["methods"] = methods;
  j["budget"] = c.budget;
  j["runs"] = c.runs;
  j["base_seed"] = c.base_seed;
  j["output"] = c.output;
  j["record_stride"] = c.record_stride;
  if (c.grid) {
    j["grid"] = grid_to_json(*c.grid);
  }
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  const json& p = j.at("problem");
  c.problem.d = p.at("d").get<int>();
  c.problem.mu = p.at("mu").get<double>();
  c.problem.L = p.at("L").get<double>();
  c.problem.matrix_seed = p.value("matrix_seed", 0ull);
  if (j.contains("x0_rule")) {
    c.x0_scale = j.at("x0_rule").value("scale", 8.0);
  }
  c.noise = noise_from_json(j.at("noise"));
  for (const json& mj : j.at("methods")) {
    c.methods.push_back(method_from_json(mj));
  }
  c.budget = j.at("budget").get<long long>();
  c.runs = j.value("runs", 1);
  c.base_seed = j.value("base_seed", 0ull);
  c.output = j.value("output", std::string("results"));
  c.record_stride = j.value("record_stride", 0);
  if (j.contains("grid")) {
    c.grid = grid_from_json(j.at("grid"));
  }
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string s = serialize_config(config);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace smom
