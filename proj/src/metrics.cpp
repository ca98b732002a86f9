#include "sgalm/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sgalm {

double sinr(const MatrixXcd& V, const VectorXcd& channel, int user_index,
            double noise_power) {
  if (channel.size() != V.rows()) {
    throw std::invalid_argument("sinr: channel/beamformer dimension mismatch");
  }
  if (user_index < 0 || user_index >= V.cols()) {
    throw std::invalid_argument("sinr: user index out of range");
  }
  const Eigen::RowVectorXcd projections = channel.adjoint() * V;
  const double signal = std::norm(projections[user_index]);
  const double total = projections.squaredNorm();
  return signal / (total - signal + noise_power);
}

double sum_rate(const MatrixXcd& V, const MatrixXcd& user_channels,
                double noise_power) {
  double rate = 0.0;
  for (Eigen::Index k = 0; k < user_channels.cols(); ++k) {
    rate += std::log2(1.0 + sinr(V, user_channels.col(k), static_cast<int>(k),
                                 noise_power));
  }
  return rate;
}

double beampattern_gain(const MatrixXcd& V, const VectorXcd& target_channel) {
  if (target_channel.size() != V.rows()) {
    throw std::invalid_argument(
        "beampattern_gain: channel/beamformer dimension mismatch");
  }
  return (target_channel.adjoint() * V).squaredNorm();
}

double transmit_power(const MatrixXcd& V) { return V.squaredNorm(); }

ConstraintResiduals residuals(const MatrixXcd& lifted,
                              const ChannelSet& channels,
                              const ScenarioConfig& cfg) {
  const int K = static_cast<int>(channels.lifted_users.cols());
  const int N = static_cast<int>(channels.lifted_targets.cols());
  ConstraintResiduals res;
  res.sensing.resize(N);
  for (int n = 0; n < N; ++n) {
    res.sensing[n] = cfg.beampattern_thresholds[n] -
                     beampattern_gain(lifted, channels.lifted_targets.col(n));
  }
  const VectorXd floors = cfg.sinr_floors();
  res.sinr.resize(K);
  for (int k = 0; k < K; ++k) {
    res.sinr[k] = floors[k] - sinr(lifted, channels.lifted_users.col(k), k,
                                   cfg.noise_power);
  }
  return res;
}

double max_relative_violation(const ConstraintResiduals& res,
                              const ScenarioConfig& cfg) {
  double worst = 0.0;
  for (Eigen::Index n = 0; n < res.sensing.size(); ++n) {
    const double scale = cfg.beampattern_thresholds[n] > 0
                             ? cfg.beampattern_thresholds[n]
                             : 1.0;
    worst = std::max(worst, res.sensing[n] / scale);
  }
  const VectorXd floors = cfg.sinr_floors();
  for (Eigen::Index k = 0; k < res.sinr.size(); ++k) {
    worst = std::max(worst, res.sinr[k] / std::max(1.0, floors[k]));
  }
  return worst;
}

}  // namespace sgalm
