#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sgalm/config.hpp"
#include "sgalm/solver.hpp"

namespace sgalm {

inline constexpr const char* kArtifactVersion = "0.2.0";

struct SolveRun {
  Scenario scenario;
  SolveResult result;
};

/// generate_scenario + solve with the parsed configuration.
SolveRun run_solve(const ParsedConfig& cfg);

/// Summary block: headline metrics in both linear and dB units plus the
/// resolved configuration.
nlohmann::json solve_summary(const ParsedConfig& cfg, const SolveResult& result);

/// Resolved config + seed + artifact version, written next to outputs.
nlohmann::json provenance_block(const ParsedConfig& cfg,
                                const std::string& command);

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os);
void write_channels_csv(const Scenario& scenario, std::ostream& os);

struct BeampatternPoint {
  double angle_deg = 0;
  double gain_watts = 0;
  double gain_dbm = 0;
};

/// Gain of V toward probe channels on an angle grid at a fixed reference
/// range. Rows are independent; workers > 1 evaluates them in parallel.
std::vector<BeampatternPoint> compute_beampattern(
    const MatrixXcd& V, const ScenarioConfig& cfg, double angle_min_deg,
    double angle_max_deg, double step_deg, double probe_range_m,
    int workers = 1);

void write_beampattern_csv(const std::vector<BeampatternPoint>& points,
                           std::ostream& os);

struct SweepSpec {
  std::string parameter;  // num_antennas | beampattern_threshold_dbm | method
  std::vector<std::string> values;
  int trials = 50;
  int workers = 1;
};

struct SweepPoint {
  std::string value;
  double mean_sum_rate = 0;
  double std_sum_rate = 0;
  double feasibility_rate = 0;
  double mean_wall_time_s = 0;
  std::vector<double> trial_rates;   // per-trial, ordered by trial index
  std::vector<char> trial_feasible;  // 0/1; char, not bool: parallel writes
};

/// Monte Carlo sweep: `trials` independent scenario draws per value, user
/// placements and target ranges resampled each trial. Trials run on an
/// OpenMP worker pool when workers > 1; aggregation is keyed by trial
/// index, so results do not depend on scheduling.
std::vector<SweepPoint> run_sweep(const ParsedConfig& base,
                                  const SweepSpec& spec);

void write_sweep_csv(const std::string& parameter,
                     const std::vector<SweepPoint>& points, std::ostream& os);

}  // namespace sgalm
