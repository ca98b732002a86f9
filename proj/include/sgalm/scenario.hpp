#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>

namespace sgalm {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 299792458.0;

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Physical and threshold parameters of one scenario. Solver-facing fields
/// (noise_power, max_power, thresholds) are always in linear watts.
struct ScenarioConfig {
  double carrier_frequency = 54e9;  // Hz
  int num_antennas = 257;           // M, odd (centered ULA)
  int num_users = 2;                // K
  int num_targets = 4;              // N
  double noise_power = 1e-12;       // W
  double max_power = 1.0;           // W

  VectorXd beampattern_thresholds;  // W, length N
  VectorXd rate_thresholds;         // bits/s/Hz, length K

  struct Region {
    double x = 40.0;
    double y = 10.0;
    double radius = 10.0;
  } user_region;  // meters, BS at the origin

  VectorXd target_angles;          // degrees, length N, within [-90, 90]
  double target_range_min = 10.0;  // meters
  double target_range_max = 30.0;  // meters

  std::uint64_t rng_seed = 1;

  double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  double antenna_spacing() const { return 0.5 * wavelength(); }

  /// SINR floors Gamma_k = 2^R_k - 1.
  VectorXd sinr_floors() const;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

/// Polar coordinates of every node, measured from the ULA center.
struct NodePlacement {
  VectorXd user_range;        // meters, length K
  VectorXd user_angle;        // degrees
  VectorXd target_range;      // meters, length N
  VectorXd target_angle;      // degrees
};

/// Channels for all nodes plus the lifted/scaled variants used on the
/// manifold: hat_h = sqrt(p_max) [h; 0], and likewise for targets.
struct ChannelSet {
  MatrixXcd users;           // M x K, column k = h_k
  MatrixXcd targets;         // M x N, column n = g_n
  MatrixXcd lifted_users;    // (M+1) x K
  MatrixXcd lifted_targets;  // (M+1) x N
};

/// Builds the lifted variants from raw channels.
ChannelSet make_channel_set(const MatrixXcd& users, const MatrixXcd& targets,
                            double max_power);

/// Near-field ULA response: entry m is exp(-j 2pi/lambda (r_m - r)) with
/// r_m = sqrt(r^2 + d_m^2 d^2 - 2 r d_m d sin(theta)), d_m = m - (M-1)/2.
VectorXcd array_response(double range_m, double angle_deg, int num_antennas,
                         double wavelength);

/// Free-space gain relative to the array center: sqrt(lambda/4pi)/r with
/// phase -2pi r/lambda.
std::complex<double> path_gain(double range_m, double wavelength);

/// Channel vector = path_gain * array_response.
VectorXcd build_channel(double range_m, double angle_deg,
                        const ScenarioConfig& cfg);

struct Scenario {
  NodePlacement placement;
  ChannelSet channels;
};

/// Users drawn uniformly over the configured disc, targets placed at the
/// configured angles with ranges uniform in [range_min, range_max].
/// Deterministic in cfg.rng_seed.
Scenario generate_scenario(const ScenarioConfig& cfg);

}  // namespace sgalm
