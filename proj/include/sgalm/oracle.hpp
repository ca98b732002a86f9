#pragma once

#include <functional>
#include <random>

#include "sgalm/solver.hpp"

namespace sgalm::oracle {

/// Central-difference step control. Steps are relative to each coordinate's
/// magnitude with an absolute floor.
struct FdSpec {
  double relative_step = 1e-6;
  double min_step = 1e-8;
  int num_threads = 1;  // coordinate evaluations are independent
};

/// Central differences over every real and imaginary coordinate, assembled
/// into the complex matrix G with d f = Re{Tr(G^H D)} + O(||D||^2), i.e.
/// G = df/dRe + j df/dIm entrywise.
MatrixXcd finite_difference_gradient(
    const std::function<double(const MatrixXcd&)>& fn, const MatrixXcd& point,
    const FdSpec& spec = {});

/// Term-by-term reimplementation of the communication and sensing metrics
/// using explicit scalar loops. Kept as an independent reference path.
struct BruteforceMetrics {
  VectorXd sinr;    // length K
  VectorXd gain;    // length N, watts
  double power = 0; // watts
};

BruteforceMetrics bruteforce_metrics(const MatrixXcd& V,
                                     const MatrixXcd& user_channels,
                                     const MatrixXcd& target_channels,
                                     double noise_power);

struct RandomSearchResult {
  bool found = false;
  MatrixXcd beamformer;
  double sum_rate = 0;
};

/// Uniform sampling on the lifted sphere, filtered by the constraints of
/// cfg; returns the feasible sample with the highest sum rate.
RandomSearchResult random_search_baseline(const ChannelSet& channels,
                                          const ScenarioConfig& cfg,
                                          long sample_budget,
                                          std::mt19937_64& rng);

/// Synthetic state for gradient verification: Gaussian channels (no array
/// geometry), random manifold point, multipliers and thresholds drawn so
/// both active and inactive hinges occur.
struct RandomInstance {
  ChannelSet channels;
  ScenarioConfig cfg;  // only the solver-facing fields are meaningful
  MatrixXcd point;
  FpState fp;
  MultiplierState mult;
};

RandomInstance random_instance(int num_antennas, int num_users,
                               int num_targets, std::mt19937_64& rng,
                               bool scaled_constraints = false);

struct GradCheckReport {
  double max_rel_err = 0;
  double mean_rel_err = 0;
  int trials = 0;
  bool pass = false;
};

/// Compares the analytic augmented-Lagrangian gradient against central
/// finite differences over random instances. corrupt_factor != 1 scales the
/// first FP term of the analytic gradient (sensitivity hook for tests).
GradCheckReport gradient_check(int num_antennas, int num_users,
                               int num_targets, int trials, double tolerance,
                               std::uint64_t seed, double corrupt_factor = 1.0,
                               int fd_threads = 1);

}  // namespace sgalm::oracle
