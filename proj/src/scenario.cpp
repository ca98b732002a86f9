#include "sgalm/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgalm {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

VectorXd ScenarioConfig::sinr_floors() const {
  VectorXd floors(rate_thresholds.size());
  for (Eigen::Index k = 0; k < rate_thresholds.size(); ++k) {
    floors[k] = std::exp2(rate_thresholds[k]) - 1.0;
  }
  return floors;
}

void ScenarioConfig::validate() const {
  if (num_antennas < 3 || num_antennas % 2 == 0) {
    throw std::invalid_argument("num_antennas must be odd and >= 3");
  }
  if (num_users < 1) throw std::invalid_argument("num_users must be positive");
  if (num_targets < 1) {
    throw std::invalid_argument("num_targets must be positive");
  }
  if (!(carrier_frequency > 0)) {
    throw std::invalid_argument("carrier_frequency must be positive");
  }
  if (!(noise_power > 0)) {
    throw std::invalid_argument("noise_power must be positive");
  }
  if (!(max_power > 0)) {
    throw std::invalid_argument("max_power must be positive");
  }
  if (beampattern_thresholds.size() != num_targets) {
    throw std::invalid_argument(
        "beampattern_thresholds length must equal num_targets");
  }
  if ((beampattern_thresholds.array() <= 0).any()) {
    throw std::invalid_argument("beampattern_thresholds must be positive");
  }
  if (rate_thresholds.size() != num_users) {
    throw std::invalid_argument("rate_thresholds length must equal num_users");
  }
  if ((rate_thresholds.array() < 0).any()) {
    throw std::invalid_argument("rate_thresholds must be nonnegative");
  }
  if (target_angles.size() != num_targets) {
    throw std::invalid_argument("target_angles length must equal num_targets");
  }
  if ((target_angles.array().abs() > 90.0).any()) {
    throw std::invalid_argument("target_angles must lie in [-90, 90] degrees");
  }
  if (!(user_region.radius > 0)) {
    throw std::invalid_argument("user_region radius must be positive");
  }
  if (!(target_range_min > 0) || target_range_max < target_range_min) {
    throw std::invalid_argument("target range interval must satisfy 0 < min <= max");
  }
}

VectorXcd array_response(double range_m, double angle_deg, int num_antennas,
                         double wavelength) {
  if (!(range_m > 0)) {
    throw std::invalid_argument("array_response: range must be positive");
  }
  if (num_antennas % 2 == 0) {
    throw std::invalid_argument("array_response: antenna count must be odd");
  }
  const double d = 0.5 * wavelength;
  const double sin_theta = std::sin(angle_deg * kDegToRad);
  const int half = (num_antennas - 1) / 2;
  const double wave_number = 2.0 * kPi / wavelength;

  VectorXcd response(num_antennas);
  for (int m = 0; m < num_antennas; ++m) {
    const double offset = (m - half) * d;
    // r_m - r computed in difference form; stable when offset << range.
    const double q = offset * offset - 2.0 * range_m * offset * sin_theta;
    const double r_m = std::sqrt(range_m * range_m + q);
    const double delta = q / (r_m + range_m);
    response[m] = std::polar(1.0, -wave_number * delta);
  }
  return response;
}

std::complex<double> path_gain(double range_m, double wavelength) {
  if (!(range_m > 0)) {
    throw std::invalid_argument("path_gain: range must be positive");
  }
  const double magnitude = std::sqrt(wavelength / (4.0 * kPi)) / range_m;
  const double phase = -2.0 * kPi * range_m / wavelength;
  return std::polar(magnitude, phase);
}

VectorXcd build_channel(double range_m, double angle_deg,
                        const ScenarioConfig& cfg) {
  const double lambda = cfg.wavelength();
  return path_gain(range_m, lambda) *
         array_response(range_m, angle_deg, cfg.num_antennas, lambda);
}

ChannelSet make_channel_set(const MatrixXcd& users, const MatrixXcd& targets,
                            double max_power) {
  ChannelSet set;
  set.users = users;
  set.targets = targets;
  const double scale = std::sqrt(max_power);
  set.lifted_users = MatrixXcd::Zero(users.rows() + 1, users.cols());
  set.lifted_users.topRows(users.rows()) = scale * users;
  set.lifted_targets = MatrixXcd::Zero(targets.rows() + 1, targets.cols());
  set.lifted_targets.topRows(targets.rows()) = scale * targets;
  return set;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int K = cfg.num_users;
  const int N = cfg.num_targets;

  NodePlacement placement;
  placement.user_range.resize(K);
  placement.user_angle.resize(K);
  placement.target_range.resize(N);
  placement.target_angle.resize(N);

  for (int k = 0; k < K; ++k) {
    // Uniform over the disc area.
    const double radius = cfg.user_region.radius * std::sqrt(unit(rng));
    const double azimuth = 2.0 * kPi * unit(rng);
    const double x = cfg.user_region.x + radius * std::cos(azimuth);
    const double y = cfg.user_region.y + radius * std::sin(azimuth);
    placement.user_range[k] = std::hypot(x, y);
    placement.user_angle[k] = std::atan2(y, x) / kDegToRad;
  }
  for (int n = 0; n < N; ++n) {
    placement.target_angle[n] = cfg.target_angles[n];
    placement.target_range[n] =
        cfg.target_range_min +
        (cfg.target_range_max - cfg.target_range_min) * unit(rng);
  }

  MatrixXcd users(cfg.num_antennas, K);
  for (int k = 0; k < K; ++k) {
    users.col(k) =
        build_channel(placement.user_range[k], placement.user_angle[k], cfg);
  }
  MatrixXcd targets(cfg.num_antennas, N);
  for (int n = 0; n < N; ++n) {
    targets.col(n) = build_channel(placement.target_range[n],
                                   placement.target_angle[n], cfg);
  }

  return Scenario{std::move(placement),
                  make_channel_set(users, targets, cfg.max_power)};
}

}  // namespace sgalm
