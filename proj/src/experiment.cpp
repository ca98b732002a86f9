#include "sgalm/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sgalm/metrics.hpp"

namespace sgalm {

namespace {

// Locale-independent numeric formatting for CSV payloads.
std::string fmt(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

std::vector<double> to_vector(const VectorXd& v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace

SolveRun run_solve(const ParsedConfig& cfg) {
  SolveRun run;
  run.scenario = generate_scenario(cfg.scenario);
  run.result = solve(run.scenario.channels, cfg.scenario, cfg.solver);
  return run;
}

nlohmann::json solve_summary(const ParsedConfig& cfg,
                             const SolveResult& result) {
  nlohmann::json j;
  j["artifact"] = "sgalm";
  j["version"] = kArtifactVersion;
  j["config"] = config_to_json(cfg);
  j["seed"] = cfg.scenario.rng_seed;
  j["sum_rate"] = result.sum_rate;
  std::vector<double> sinr_db;
  for (Eigen::Index k = 0; k < result.user_sinr.size(); ++k) {
    sinr_db.push_back(10.0 * std::log10(result.user_sinr[k]));
  }
  j["sinr_db"] = sinr_db;
  std::vector<double> gain_dbm;
  for (Eigen::Index n = 0; n < result.target_gain.size(); ++n) {
    gain_dbm.push_back(watts_to_dbm(result.target_gain[n]));
  }
  j["gain_dbm"] = gain_dbm;
  j["sinr"] = to_vector(result.user_sinr);
  j["gain_watts"] = to_vector(result.target_gain);
  j["residual_sensing"] = to_vector(result.residuals.sensing);
  j["residual_sinr"] = to_vector(result.residuals.sinr);
  j["max_violation"] = result.max_violation;
  j["feasible"] = result.feasible;
  j["transmit_power"] = transmit_power(result.beamformer);
  j["iterations"] = {{"fp", result.fp_iterations},
                     {"alm", result.alm_rounds},
                     {"inner", result.inner_iterations}};
  j["wall_time_s"] = result.wall_time_s;
  return j;
}

nlohmann::json provenance_block(const ParsedConfig& cfg,
                                const std::string& command) {
  nlohmann::json j;
  j["artifact"] = "sgalm";
  j["version"] = kArtifactVersion;
  j["command"] = command;
  j["seed"] = cfg.scenario.rng_seed;
  j["config"] = config_to_json(cfg);
  return j;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os) {
  os << "iter,phase,objective,lagrangian,grad_norm,max_violation,step,rho,"
        "method\n";
  for (const TraceRow& row : trace) {
    os << row.iter << ',' << row.phase << ',' << fmt(row.objective) << ','
       << fmt(row.lagrangian) << ',' << fmt(row.grad_norm) << ','
       << fmt(row.max_violation) << ',' << fmt(row.step) << ','
       << fmt(row.rho) << ',' << row.method << '\n';
  }
}

void write_channels_csv(const Scenario& scenario, std::ostream& os) {
  os << "node_id,node_kind,antenna_index,re,im\n";
  const auto dump = [&](const MatrixXcd& channels, const char* kind) {
    for (Eigen::Index col = 0; col < channels.cols(); ++col) {
      for (Eigen::Index m = 0; m < channels.rows(); ++m) {
        os << col << ',' << kind << ',' << m << ','
           << fmt(channels(m, col).real()) << ','
           << fmt(channels(m, col).imag()) << '\n';
      }
    }
  };
  dump(scenario.channels.users, "user");
  dump(scenario.channels.targets, "target");
}

std::vector<BeampatternPoint> compute_beampattern(
    const MatrixXcd& V, const ScenarioConfig& cfg, double angle_min_deg,
    double angle_max_deg, double step_deg, double probe_range_m, int workers) {
  if (!(step_deg > 0) || angle_max_deg < angle_min_deg) {
    throw std::invalid_argument("compute_beampattern: bad angle grid");
  }
  const long count =
      static_cast<long>(std::floor((angle_max_deg - angle_min_deg) / step_deg +
                                   1e-9)) +
      1;
  std::vector<BeampatternPoint> points(count);

#pragma omp parallel for schedule(static) num_threads(std::max(1, workers))
  for (long i = 0; i < count; ++i) {
    const double angle = angle_min_deg + static_cast<double>(i) * step_deg;
    const VectorXcd probe = build_channel(probe_range_m, angle, cfg);
    const double gain = beampattern_gain(V, probe);
    points[i] = BeampatternPoint{angle, gain, watts_to_dbm(gain)};
  }
  return points;
}

void write_beampattern_csv(const std::vector<BeampatternPoint>& points,
                           std::ostream& os) {
  os << "angle_deg,gain_watts,gain_dbm\n";
  for (const BeampatternPoint& p : points) {
    os << fmt(p.angle_deg) << ',' << fmt(p.gain_watts) << ','
       << fmt(p.gain_dbm) << '\n';
  }
}

namespace {

ParsedConfig apply_sweep_value(const ParsedConfig& base,
                               const std::string& parameter,
                               const std::string& value) {
  ParsedConfig cfg = base;
  if (parameter == "num_antennas") {
    cfg.scenario.num_antennas = std::stoi(value);
  } else if (parameter == "beampattern_threshold") {
    cfg.scenario.beampattern_thresholds.setConstant(std::stod(value));
  } else if (parameter == "beampattern_threshold_dbm") {
    cfg.scenario.beampattern_thresholds.setConstant(
        dbm_to_watts(std::stod(value)));
  } else if (parameter == "method") {
    const auto method = parse_method(value);
    if (!method) {
      throw std::invalid_argument("sweep: unknown method '" + value + "'");
    }
    cfg.solver.method = *method;
  } else {
    throw std::invalid_argument("sweep: unknown parameter '" + parameter +
                                "'");
  }
  return cfg;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const ParsedConfig& base,
                                  const SweepSpec& spec) {
  if (spec.trials < 1) {
    throw std::invalid_argument("sweep: trials must be >= 1");
  }
  std::vector<SweepPoint> points;
  points.reserve(spec.values.size());

  for (const std::string& value : spec.values) {
    const ParsedConfig cfg = apply_sweep_value(base, spec.parameter, value);
    cfg.scenario.validate();

    SweepPoint point;
    point.value = value;
    point.trial_rates.assign(spec.trials, 0.0);
    point.trial_feasible.assign(spec.trials, 0);
    std::vector<double> wall(spec.trials, 0.0);
    std::string error;

#pragma omp parallel for schedule(dynamic) \
    num_threads(std::max(1, spec.workers))
    for (int trial = 0; trial < spec.trials; ++trial) {
      try {
        ParsedConfig trial_cfg = cfg;
        trial_cfg.scenario.rng_seed = cfg.scenario.rng_seed + trial;
        trial_cfg.solver.rng_seed = cfg.solver.rng_seed + trial;
        const SolveRun run = run_solve(trial_cfg);
        point.trial_rates[trial] = run.result.sum_rate;
        point.trial_feasible[trial] = run.result.feasible ? 1 : 0;
        wall[trial] = run.result.wall_time_s;
      } catch (const std::exception& e) {
#pragma omp critical
        error = e.what();
      }
    }
    if (!error.empty()) throw std::runtime_error("sweep trial failed: " + error);

    double sum = 0.0;
    double feasible = 0.0;
    double wall_sum = 0.0;
    for (int t = 0; t < spec.trials; ++t) {
      sum += point.trial_rates[t];
      feasible += point.trial_feasible[t] ? 1.0 : 0.0;
      wall_sum += wall[t];
    }
    point.mean_sum_rate = sum / spec.trials;
    point.feasibility_rate = feasible / spec.trials;
    point.mean_wall_time_s = wall_sum / spec.trials;
    if (spec.trials > 1) {
      double ss = 0.0;
      for (const double r : point.trial_rates) {
        ss += (r - point.mean_sum_rate) * (r - point.mean_sum_rate);
      }
      point.std_sum_rate = std::sqrt(ss / (spec.trials - 1));
    }
    points.push_back(std::move(point));
  }
  return points;
}

void write_sweep_csv(const std::string& parameter,
                     const std::vector<SweepPoint>& points, std::ostream& os) {
  os << "sweep_value,mean_sum_rate,std_sum_rate,feasibility_rate,"
        "mean_wall_time_s\n";
  (void)parameter;  // recorded in provenance.json, not in the table
  for (const SweepPoint& p : points) {
    os << p.value << ',' << fmt(p.mean_sum_rate) << ','
       << fmt(p.std_sum_rate) << ',' << fmt(p.feasibility_rate) << ','
       << fmt(p.mean_wall_time_s) << '\n';
  }
}

}  // namespace sgalm
