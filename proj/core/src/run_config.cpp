#include "renyikey/run_config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace renyikey {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, "config: " + msg); }

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) config_error("'" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  // Accept 1e5-style literals when they are integral.
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  config_error("'" + key + "' must be an integer");
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) config_error("'" + key + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) config_error("'" + key + "' must be true or false");
  return v.get<bool>();
}

using Setter = std::function<void(RunConfig&, const json&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"protocol", [](RunConfig& c, const json& v) { c.protocol = as_string(v, "protocol"); }},
      {"depol_p", [](RunConfig& c, const json& v) { c.depol_p = as_number(v, "depol_p"); }},
      {"loss", [](RunConfig& c, const json& v) { c.loss = as_number(v, "loss"); }},
      {"N", [](RunConfig& c, const json& v) { c.n_total = as_integer(v, "N"); }},
      {"p_gen", [](RunConfig& c, const json& v) { c.p_gen = as_number(v, "p_gen"); }},
      {"eps_PA", [](RunConfig& c, const json& v) { c.eps_pa = as_number(v, "eps_PA"); }},
      {"eps_EV", [](RunConfig& c, const json& v) { c.eps_ev = as_number(v, "eps_EV"); }},
      {"eps_PE", [](RunConfig& c, const json& v) { c.eps_pe = as_number(v, "eps_PE"); }},
      {"f_EC", [](RunConfig& c, const json& v) { c.f_ec = as_number(v, "f_EC"); }},
      {"alpha",
       [](RunConfig& c, const json& v) {
         if (v.is_string()) {
           if (v.get<std::string>() != "scan") config_error("'alpha' must be a number or \"scan\"");
           c.alpha.reset();
         } else {
           c.alpha = as_number(v, "alpha");
         }
       }},
      {"alpha_grid",
       [](RunConfig& c, const json& v) {
         if (!v.is_array()) config_error("'alpha_grid' must be an array of numbers");
         c.alpha_grid.clear();
         for (const auto& e : v) c.alpha_grid.push_back(as_number(e, "alpha_grid"));
       }},
      {"alpha_grid_points",
       [](RunConfig& c, const json& v) { c.alpha_grid_points = static_cast<int>(as_integer(v, "alpha_grid_points")); }},
      {"alpha_grid_min", [](RunConfig& c, const json& v) { c.alpha_grid_min = as_number(v, "alpha_grid_min"); }},
      {"alpha_grid_max", [](RunConfig& c, const json& v) { c.alpha_grid_max = as_number(v, "alpha_grid_max"); }},
      {"eps_perturb", [](RunConfig& c, const json& v) { c.eps_perturb = as_number(v, "eps_perturb"); }},
      {"gap_tol", [](RunConfig& c, const json& v) { c.gap_tol = as_number(v, "gap_tol"); }},
      {"max_iters", [](RunConfig& c, const json& v) { c.max_iters = static_cast<int>(as_integer(v, "max_iters")); }},
      {"t_ball", [](RunConfig& c, const json& v) { c.t_ball = as_number(v, "t_ball"); }},
      {"statistics", [](RunConfig& c, const json& v) { c.statistics = as_string(v, "statistics"); }},
      {"alice_z_prob", [](RunConfig& c, const json& v) { c.alice_z_prob = as_number(v, "alice_z_prob"); }},
      {"bob_z_prob", [](RunConfig& c, const json& v) { c.bob_z_prob = as_number(v, "bob_z_prob"); }},
      {"warm_start", [](RunConfig& c, const json& v) { c.warm_start = as_bool(v, "warm_start"); }},
      {"output_path", [](RunConfig& c, const json& v) { c.output_path = as_string(v, "output_path"); }},
      {"run_log_path", [](RunConfig& c, const json& v) { c.run_log_path = as_string(v, "run_log_path"); }},
  };
  return table;
}

void set_key(RunConfig& cfg, const std::string& key, const json& value) {
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(cfg, value);
      return;
    }
  }
  config_error("unknown key '" + key + "'");
}

void require_range(bool ok, const std::string& msg) {
  if (!ok) config_error(msg);
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void RunConfig::validate() const {
  require_range(protocol == "bb84-pm", "'protocol' must be \"bb84-pm\"");
  require_range(depol_p >= 0.0 && depol_p <= 1.0, "'depol_p' must lie in [0, 1]");
  require_range(loss >= 0.0 && loss < 1.0, "'loss' must lie in [0, 1)");
  require_range(n_total >= 1, "'N' must be positive");
  require_range(p_gen > 0.0 && p_gen < 1.0, "'p_gen' must lie in (0, 1)");
  require_range(eps_pa > 0.0 && eps_pa < 1.0, "'eps_PA' must lie in (0, 1)");
  require_range(eps_ev > 0.0 && eps_ev < 1.0, "'eps_EV' must lie in (0, 1)");
  require_range(eps_pe > 0.0 && eps_pe < 1.0, "'eps_PE' must lie in (0, 1)");
  require_range(f_ec >= 1.0, "'f_EC' must be at least 1");
  if (alpha) require_range(*alpha > 1.0 && *alpha <= 2.0, "'alpha' must lie in (1, 2]");
  for (double a : alpha_grid) require_range(a > 1.0 && a <= 2.0, "'alpha_grid' entries must lie in (1, 2]");
  require_range(alpha_grid_points >= 1, "'alpha_grid_points' must be at least 1");
  require_range(alpha_grid_min > 1.0 && alpha_grid_max <= 2.0 && alpha_grid_min <= alpha_grid_max,
                "alpha grid bounds must satisfy 1 < alpha_grid_min <= alpha_grid_max <= 2");
  require_range(eps_perturb > 0.0 && eps_perturb < 1.0, "'eps_perturb' must lie in (0, 1)");
  require_range(gap_tol > 0.0, "'gap_tol' must be positive");
  require_range(max_iters >= 1, "'max_iters' must be at least 1");
  require_range(t_ball >= 0.0, "'t_ball' must be non-negative");
  require_range(statistics == "full" || statistics == "coarse", "'statistics' must be \"full\" or \"coarse\"");
  require_range(alice_z_prob > 0.0 && alice_z_prob < 1.0, "'alice_z_prob' must lie in (0, 1)");
  require_range(bob_z_prob > 0.0 && bob_z_prob < 1.0, "'bob_z_prob' must lie in (0, 1)");
  require_range(std::llround((1.0 - p_gen) * static_cast<double>(n_total)) >= 1,
                "'N' and 'p_gen' leave no parameter-estimation rounds");
}

FiniteSizeParams RunConfig::finite_size() const { return {n_total, p_gen, f_ec}; }

SecurityParams RunConfig::security() const { return {eps_pa, eps_ev, eps_pe}; }

PipelineOptions RunConfig::pipeline_options() const {
  PipelineOptions o;
  o.fw.gap_tol = gap_tol;
  o.fw.max_iters = max_iters;
  o.eps_perturb = eps_perturb;
  o.t_ball = t_ball;
  o.warm_start = warm_start;
  return o;
}

Bb84Options RunConfig::protocol_options() const {
  Bb84Options o;
  o.alice_z_prob = alice_z_prob;
  o.bob_z_prob = bob_z_prob;
  o.statistics = statistics == "coarse" ? StatisticsMode::Coarse : StatisticsMode::Full;
  return o;
}

std::vector<double> RunConfig::grid() const {
  if (!alpha_grid.empty()) return alpha_grid;
  return default_alpha_grid(alpha_grid_points, alpha_grid_min, alpha_grid_max);
}

ProtocolInstance RunConfig::instance() const { return bb84_pm_instance(depol_p, loss, protocol_options()); }

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("top level must be an object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) set_key(cfg, key, value);
  cfg.validate();
  return cfg;
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;
  }
  set_key(cfg, key, v);
}

std::string run_config_to_json(const RunConfig& cfg, int indent) {
  json doc = json::object();
  doc["protocol"] = cfg.protocol;
  doc["depol_p"] = cfg.depol_p;
  doc["loss"] = cfg.loss;
  doc["N"] = cfg.n_total;
  doc["p_gen"] = cfg.p_gen;
  doc["eps_PA"] = cfg.eps_pa;
  doc["eps_EV"] = cfg.eps_ev;
  doc["eps_PE"] = cfg.eps_pe;
  doc["f_EC"] = cfg.f_ec;
  if (cfg.alpha) {
    doc["alpha"] = *cfg.alpha;
  } else {
    doc["alpha"] = "scan";
  }
  if (!cfg.alpha_grid.empty()) doc["alpha_grid"] = cfg.alpha_grid;
  doc["alpha_grid_points"] = cfg.alpha_grid_points;
  doc["alpha_grid_min"] = cfg.alpha_grid_min;
  doc["alpha_grid_max"] = cfg.alpha_grid_max;
  doc["eps_perturb"] = cfg.eps_perturb;
  doc["gap_tol"] = cfg.gap_tol;
  doc["max_iters"] = cfg.max_iters;
  doc["t_ball"] = cfg.t_ball;
  doc["statistics"] = cfg.statistics;
  doc["alice_z_prob"] = cfg.alice_z_prob;
  doc["bob_z_prob"] = cfg.bob_z_prob;
  doc["warm_start"] = cfg.warm_start;
  doc["output_path"] = cfg.output_path;
  doc["run_log_path"] = cfg.run_log_path;
  return doc.dump(indent);
}

}  // namespace renyikey
