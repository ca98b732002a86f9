#pragma once

#include "sgalm/scenario.hpp"

namespace sgalm {

// The beamformer matrix V is M x (K+N): columns 0..K-1 carry the user beams,
// columns K..K+N-1 the sensing beams. The same functions evaluate lifted
// (M+1)-row matrices against lifted channels.

/// SINR at one user: |h^H V e_k|^2 / (sum_{i != k} |h^H V e_i|^2 + noise).
/// Sensing columns count as interference.
double sinr(const MatrixXcd& V, const VectorXcd& channel, int user_index,
            double noise_power);

/// sum_k log2(1 + sinr_k) over the columns of user_channels.
double sum_rate(const MatrixXcd& V, const MatrixXcd& user_channels,
                double noise_power);

/// Beampattern gain toward a target channel: ||g^H V||^2 (all columns).
double beampattern_gain(const MatrixXcd& V, const VectorXcd& target_channel);

/// Radiated power Tr(V V^H).
double transmit_power(const MatrixXcd& V);

/// Constraint residual functions evaluated on the lifted beamformer.
/// An entry <= 0 means the corresponding constraint is satisfied.
struct ConstraintResiduals {
  VectorXd sensing;  // u_n = Omega_n - gain_n, watts, length N
  VectorXd sinr;     // c_k = Gamma_k - sinr_k, length K
};

ConstraintResiduals residuals(const MatrixXcd& lifted,
                              const ChannelSet& channels,
                              const ScenarioConfig& cfg);

/// Largest violation with each family normalized by its threshold
/// (sensing by Omega_n, SINR by max(1, Gamma_k)); zero when feasible.
/// This is the solver's feasibility measure: one tolerance then covers
/// thresholds that differ by many orders of magnitude between families.
double max_relative_violation(const ConstraintResiduals& res,
                              const ScenarioConfig& cfg);

}  // namespace sgalm
