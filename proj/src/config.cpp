#include "sgalm/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace sgalm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const double parsed = std::stod(value, &consumed);
    if (trim(value.substr(consumed)).empty()) return parsed;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: key '" + key + "' has malformed numeric value '" +
                    value + "'");
}

long parse_long(const std::string& key, const std::string& value) {
  const double parsed = parse_double(key, value);
  const long rounded = static_cast<long>(parsed);
  if (static_cast<double>(rounded) != parsed) {
    throw ConfigError("config: key '" + key + "' must be an integer");
  }
  return rounded;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key '" + key + "' must be a boolean");
}

VectorXd parse_list(const std::string& key, std::string value) {
  for (char& c : value) {
    if (c == ',') c = ' ';
  }
  std::istringstream stream(value);
  std::vector<double> items;
  std::string token;
  while (stream >> token) items.push_back(parse_double(key, token));
  if (items.empty()) {
    throw ConfigError("config: key '" + key + "' has an empty value");
  }
  return Eigen::Map<VectorXd>(items.data(), items.size());
}

class KeyMap {
 public:
  explicit KeyMap(std::map<std::string, std::string> entries)
      : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
      throw ConfigError("config: missing required key '" + key + "'");
    }
    used_.insert(key);
    return it->second;
  }

  std::string take_or(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return take(key);
  }

  /// Value in watts from either `key` or `key_dbm`.
  double take_watts(const std::string& key) {
    if (has(key + "_dbm") && has(key)) {
      throw ConfigError("config: keys '" + key + "' and '" + key +
                        "_dbm' are mutually exclusive");
    }
    if (has(key + "_dbm")) {
      return dbm_to_watts(parse_double(key + "_dbm", take(key + "_dbm")));
    }
    return parse_double(key, take(key));
  }

  VectorXd take_watts_list(const std::string& key) {
    if (has(key + "_dbm")) {
      VectorXd values = parse_list(key + "_dbm", take(key + "_dbm"));
      for (Eigen::Index i = 0; i < values.size(); ++i) {
        values[i] = dbm_to_watts(values[i]);
      }
      return values;
    }
    return parse_list(key, take(key));
  }

  void reject_unknown() const {
    for (const auto& [key, value] : entries_) {
      if (!used_.count(key)) {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string> entries_;
  std::set<std::string> used_;
};

}  // namespace

ParsedConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_number) +
                        " is not a key = value pair");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config: line " + std::to_string(line_number) +
                        " has an empty key or value");
    }
    if (!entries.emplace(key, value).second) {
      throw ConfigError("config: duplicate key '" + key + "'");
    }
  }

  KeyMap keys(std::move(entries));
  ParsedConfig out;
  ScenarioConfig& sc = out.scenario;

  sc.carrier_frequency =
      parse_double("carrier_frequency", keys.take("carrier_frequency"));
  sc.num_antennas =
      static_cast<int>(parse_long("num_antennas", keys.take("num_antennas")));
  sc.num_users =
      static_cast<int>(parse_long("num_users", keys.take("num_users")));
  sc.num_targets =
      static_cast<int>(parse_long("num_targets", keys.take("num_targets")));
  sc.noise_power = keys.take_watts("noise_power");
  sc.max_power = keys.take_watts("max_power");
  sc.beampattern_thresholds = keys.take_watts_list("beampattern_thresholds");
  sc.rate_thresholds =
      parse_list("rate_thresholds", keys.take("rate_thresholds"));

  const VectorXd region = parse_list("user_region", keys.take("user_region"));
  if (region.size() != 3) {
    throw ConfigError("config: key 'user_region' needs 3 values (x y radius)");
  }
  sc.user_region = {region[0], region[1], region[2]};

  sc.target_angles = parse_list("target_angles", keys.take("target_angles"));
  const VectorXd interval =
      parse_list("target_range_interval", keys.take("target_range_interval"));
  if (interval.size() != 2) {
    throw ConfigError(
        "config: key 'target_range_interval' needs 2 values (min max)");
  }
  sc.target_range_min = interval[0];
  sc.target_range_max = interval[1];
  sc.rng_seed = static_cast<std::uint64_t>(
      parse_long("rng_seed", keys.take_or("rng_seed", "1")));

  SolverOptions& opts = out.solver;
  const std::string method = keys.take_or("method", "sgd");
  const auto parsed_method = parse_method(method);
  if (!parsed_method) {
    throw ConfigError("config: key 'method' must be one of sgd, sd, cg");
  }
  opts.method = *parsed_method;
  opts.alpha0 = parse_double("alpha0", keys.take_or("alpha0", "1.0"));
  opts.decay = parse_double("decay", keys.take_or("decay", "0.1"));
  opts.batch_fraction =
      parse_double("batch_fraction", keys.take_or("batch_fraction", "0.5"));
  opts.max_inner_iterations = static_cast<int>(parse_long(
      "max_inner_iterations", keys.take_or("max_inner_iterations", "400")));
  opts.max_fp_iterations = static_cast<int>(parse_long(
      "max_fp_iterations", keys.take_or("max_fp_iterations", "30")));
  opts.max_alm_rounds = static_cast<int>(
      parse_long("max_alm_rounds", keys.take_or("max_alm_rounds", "6")));
  opts.eps_initial =
      parse_double("eps_initial", keys.take_or("eps_initial", "1e-2"));
  opts.eps_final = parse_double("eps_final", keys.take_or("eps_final", "1e-6"));
  opts.feasibility_tolerance = parse_double(
      "feasibility_tolerance", keys.take_or("feasibility_tolerance", "1e-3"));
  opts.sum_rate_tolerance = parse_double(
      "sum_rate_tolerance", keys.take_or("sum_rate_tolerance", "1e-4"));
  opts.displacement_cap = parse_double(
      "displacement_cap", keys.take_or("displacement_cap", "0.5"));
  opts.grad_check_interval = static_cast<int>(parse_long(
      "grad_check_interval", keys.take_or("grad_check_interval", "10")));
  opts.warm_start =
      parse_bool("warm_start", keys.take_or("warm_start", "false"));
  opts.entrywise_projection = parse_bool(
      "entrywise_projection", keys.take_or("entrywise_projection", "false"));
  opts.scale_constraints = parse_bool(
      "scale_constraints", keys.take_or("scale_constraints", "true"));
  opts.rng_seed = static_cast<std::uint64_t>(parse_long(
      "solver_seed", keys.take_or("solver_seed",
                                  std::to_string(sc.rng_seed))));

  keys.reject_unknown();
  sc.validate();
  opts.validate();
  return out;
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw ConfigError("config: cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " [" + path + "]");
  }
}

nlohmann::json config_to_json(const ParsedConfig& cfg) {
  const ScenarioConfig& sc = cfg.scenario;
  const SolverOptions& opts = cfg.solver;
  nlohmann::json j;
  j["scenario"] = {
      {"carrier_frequency", sc.carrier_frequency},
      {"num_antennas", sc.num_antennas},
      {"num_users", sc.num_users},
      {"num_targets", sc.num_targets},
      {"noise_power", sc.noise_power},
      {"noise_power_dbm", watts_to_dbm(sc.noise_power)},
      {"max_power", sc.max_power},
      {"max_power_dbm", watts_to_dbm(sc.max_power)},
      {"beampattern_thresholds",
       std::vector<double>(sc.beampattern_thresholds.begin(),
                           sc.beampattern_thresholds.end())},
      {"rate_thresholds", std::vector<double>(sc.rate_thresholds.begin(),
                                              sc.rate_thresholds.end())},
      {"user_region",
       {sc.user_region.x, sc.user_region.y, sc.user_region.radius}},
      {"target_angles",
       std::vector<double>(sc.target_angles.begin(), sc.target_angles.end())},
      {"target_range_interval", {sc.target_range_min, sc.target_range_max}},
      {"rng_seed", sc.rng_seed},
  };
  std::vector<double> thresholds_dbm;
  for (Eigen::Index n = 0; n < sc.beampattern_thresholds.size(); ++n) {
    thresholds_dbm.push_back(watts_to_dbm(sc.beampattern_thresholds[n]));
  }
  j["scenario"]["beampattern_thresholds_dbm"] = thresholds_dbm;
  j["solver"] = {
      {"method", method_name(opts.method)},
      {"alpha0", opts.alpha0},
      {"decay", opts.decay},
      {"batch_fraction", opts.batch_fraction},
      {"max_inner_iterations", opts.max_inner_iterations},
      {"max_fp_iterations", opts.max_fp_iterations},
      {"max_alm_rounds", opts.max_alm_rounds},
      {"eps_initial", opts.eps_initial},
      {"eps_final", opts.eps_final},
      {"feasibility_tolerance", opts.feasibility_tolerance},
      {"sum_rate_tolerance", opts.sum_rate_tolerance},
      {"displacement_cap", opts.displacement_cap},
      {"grad_check_interval", opts.grad_check_interval},
      {"warm_start", opts.warm_start},
      {"entrywise_projection", opts.entrywise_projection},
      {"scale_constraints", opts.scale_constraints},
      {"solver_seed", opts.rng_seed},
  };
  return j;
}

}  // namespace sgalm
