#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sgalm/experiment.hpp"
#include "sgalm/oracle.hpp"

namespace fs = std::filesystem;
using namespace sgalm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitInfeasible = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* config =
      cmd->add_option("--config", args.config_path, "scenario config file");
  if (needs_config) config->required();
  cmd->add_option("--seed", args.seed, "override scenario and solver seeds");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--method", args.method, "solver method: sgd, sd or cg");
  cmd->add_option("--workers", args.workers, "worker threads for sweeps");
}

ParsedConfig load_with_overrides(const CommonArgs& args) {
  ParsedConfig cfg = load_config(args.config_path);
  if (args.seed) {
    cfg.scenario.rng_seed = *args.seed;
    cfg.solver.rng_seed = *args.seed;
  }
  if (args.method) {
    const auto method = parse_method(*args.method);
    if (!method) throw ConfigError("unknown method '" + *args.method + "'");
    cfg.solver.method = *method;
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << contents;
}

void write_provenance(const fs::path& dir, const ParsedConfig& cfg,
                      const std::string& command) {
  write_file(dir / "provenance.json",
             provenance_block(cfg, command).dump(2) + "\n");
}

int cmd_solve(const CommonArgs& args, bool dump_channels, bool want_trace,
              bool require_feasible) {
  const ParsedConfig cfg = load_with_overrides(args);
  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  const SolveRun run = run_solve(cfg);
  const nlohmann::json summary = solve_summary(cfg, run.result);
  std::cout << summary.dump(2) << "\n";
  write_file(out / "summary.json", summary.dump(2) + "\n");

  if (want_trace) {
    std::ofstream os(out / "trace.csv");
    write_trace_csv(run.result.trace, os);
  }
  if (dump_channels) {
    std::ofstream os(out / "channels.csv");
    write_channels_csv(run.scenario, os);
  }
  write_provenance(out, cfg, "solve");
  if (require_feasible && !run.result.feasible) return kExitInfeasible;
  return kExitOk;
}

int cmd_beampattern(const CommonArgs& args, double angle_min, double angle_max,
                    double step, double probe_range) {
  const ParsedConfig cfg = load_with_overrides(args);
  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  const SolveRun run = run_solve(cfg);
  const auto points =
      compute_beampattern(run.result.beamformer, cfg.scenario, angle_min,
                          angle_max, step, probe_range, args.workers);
  std::ofstream os(out / "beampattern.csv");
  write_beampattern_csv(points, os);
  write_file(out / "summary.json",
             solve_summary(cfg, run.result).dump(2) + "\n");
  write_provenance(out, cfg, "beampattern");
  std::cout << "wrote " << (out / "beampattern.csv").string() << " ("
            << points.size() << " rows)\n";
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& parameter,
              const std::vector<std::string>& values, int trials) {
  ParsedConfig cfg = load_with_overrides(args);
  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  SweepSpec spec;
  spec.parameter = parameter;
  spec.values = values;
  spec.trials = trials;
  spec.workers = args.workers;
  const auto points = run_sweep(cfg, spec);

  std::ofstream os(out / "sweep.csv");
  write_sweep_csv(parameter, points, os);
  write_provenance(out, cfg, "sweep " + parameter);
  for (const SweepPoint& p : points) {
    std::cout << parameter << "=" << p.value
              << " mean_sum_rate=" << p.mean_sum_rate
              << " feasibility_rate=" << p.feasibility_rate << "\n";
  }
  return kExitOk;
}

int cmd_convergence(const CommonArgs& args) {
  const ParsedConfig cfg = load_with_overrides(args);
  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  const SolveRun run = run_solve(cfg);
  std::ofstream os(out / "convergence.csv");
  write_trace_csv(run.result.trace, os);
  write_provenance(out, cfg, "convergence");
  std::cout << "wrote " << (out / "convergence.csv").string() << " ("
            << run.result.trace.size() << " rows)\n";
  return kExitOk;
}

int cmd_gradcheck(int antennas, int users, int targets, int trials,
                  double tolerance, std::uint64_t seed, bool corrupt,
                  int workers) {
  const auto report = oracle::gradient_check(
      antennas, users, targets, trials, tolerance, seed,
      corrupt ? 1.01 : 1.0, workers);
  nlohmann::json j = {{"max_rel_err", report.max_rel_err},
                      {"mean_rel_err", report.mean_rel_err},
                      {"trials", report.trials},
                      {"pass", report.pass}};
  std::cout << j.dump(2) << "\n";
  return report.pass ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Near-field ISAC beamforming: stochastic-gradient augmented-Lagrangian "
      "optimization on the complex sphere manifold"};
  app.require_subcommand(1);

  CommonArgs solve_args;
  bool dump_channels = false;
  bool want_trace = false;
  bool require_feasible = false;
  auto* solve_cmd = app.add_subcommand("solve", "run one solve");
  add_common(solve_cmd, solve_args);
  solve_cmd->add_flag("--dump-channels", dump_channels,
                      "write channels.csv with the generated channels");
  solve_cmd->add_flag("--trace", want_trace, "write the iteration trace CSV");
  solve_cmd->add_flag("--require-feasible", require_feasible,
                      "exit 3 when no feasible iterate was found");

  CommonArgs beam_args;
  double angle_min = -90.0, angle_max = 90.0, angle_step = 0.5;
  double probe_range = 20.0;
  auto* beam_cmd =
      app.add_subcommand("beampattern", "solve, then sweep gain over angle");
  add_common(beam_cmd, beam_args);
  beam_cmd->add_option("--angle-min", angle_min, "grid start, degrees");
  beam_cmd->add_option("--angle-max", angle_max, "grid end, degrees");
  beam_cmd->add_option("--angle-step", angle_step, "grid step, degrees");
  beam_cmd->add_option("--probe-range", probe_range,
                       "probe channel range, meters");

  CommonArgs sweep_args;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  int sweep_trials = 50;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Monte Carlo sweep over one parameter");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--param", sweep_param,
                        "num_antennas | beampattern_threshold[_dbm] | method")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "sweep values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--trials", sweep_trials, "trials per sweep point");

  CommonArgs conv_args;
  auto* conv_cmd =
      app.add_subcommand("convergence", "run one solve, write the trace CSV");
  add_common(conv_cmd, conv_args);

  int gc_antennas = 17, gc_users = 2, gc_targets = 2, gc_trials = 20;
  double gc_tolerance = 1e-5;
  std::uint64_t gc_seed = 1;
  bool gc_corrupt = false;
  int gc_workers = 1;
  auto* gc_cmd = app.add_subcommand(
      "gradcheck", "finite-difference check of the analytic gradient");
  gc_cmd->add_option("--antennas", gc_antennas, "antenna count");
  gc_cmd->add_option("--users", gc_users, "user count");
  gc_cmd->add_option("--targets", gc_targets, "target count");
  gc_cmd->add_option("--trials", gc_trials, "random states to test");
  gc_cmd->add_option("--tolerance", gc_tolerance, "max relative error");
  gc_cmd->add_option("--seed", gc_seed, "rng seed");
  gc_cmd->add_option("--workers", gc_workers, "finite-difference threads");
  gc_cmd->add_flag("--corrupt", gc_corrupt,
                   "perturb one gradient term (sensitivity check)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      return cmd_solve(solve_args, dump_channels, want_trace,
                       require_feasible);
    }
    if (beam_cmd->parsed()) {
      return cmd_beampattern(beam_args, angle_min, angle_max, angle_step,
                             probe_range);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_args, sweep_param, sweep_values, sweep_trials);
    }
    if (conv_cmd->parsed()) return cmd_convergence(conv_args);
    if (gc_cmd->parsed()) {
      return cmd_gradcheck(gc_antennas, gc_users, gc_targets, gc_trials,
                           gc_tolerance, gc_seed, gc_corrupt, gc_workers);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
