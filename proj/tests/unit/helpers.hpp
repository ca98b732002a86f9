#pragma once

#include <random>

#include "sgalm/scenario.hpp"

namespace test_util {

using sgalm::ChannelSet;
using sgalm::MatrixXcd;
using sgalm::ScenarioConfig;
using sgalm::VectorXcd;
using sgalm::VectorXd;

inline MatrixXcd random_cmatrix(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& rng, double stddev = 1.0) {
  std::normal_distribution<double> gauss(0.0, stddev);
  MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    }
  }
  return m;
}

/// Synthetic problem with Gaussian channels; geometry fields untouched.
struct SyntheticProblem {
  ScenarioConfig cfg;
  ChannelSet channels;
};

inline SyntheticProblem synthetic_problem(int num_antennas, int num_users,
                                          int num_targets,
                                          std::mt19937_64& rng,
                                          double noise_power = 1.0,
                                          double max_power = 1.0) {
  SyntheticProblem p;
  p.cfg.num_antennas = num_antennas;
  p.cfg.num_users = num_users;
  p.cfg.num_targets = num_targets;
  p.cfg.noise_power = noise_power;
  p.cfg.max_power = max_power;
  p.cfg.beampattern_thresholds = VectorXd::Constant(num_targets, 1e-3);
  p.cfg.rate_thresholds = VectorXd::Zero(num_users);
  p.channels =
      sgalm::make_channel_set(random_cmatrix(num_antennas, num_users, rng),
                              random_cmatrix(num_antennas, num_targets, rng),
                              max_power);
  return p;
}

inline double rel_err(double actual, double expected) {
  const double scale = std::max({std::abs(actual), std::abs(expected), 1e-300});
  return std::abs(actual - expected) / scale;
}

}  // namespace test_util
