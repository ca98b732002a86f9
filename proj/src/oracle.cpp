#include "sgalm/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sgalm/manifold.hpp"
#include "sgalm/metrics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sgalm::oracle {

MatrixXcd finite_difference_gradient(
    const std::function<double(const MatrixXcd&)>& fn, const MatrixXcd& point,
    const FdSpec& spec) {
  if (!(spec.relative_step > 0) || !(spec.min_step > 0)) {
    throw std::invalid_argument("finite_difference_gradient: step must be positive");
  }
  const Eigen::Index rows = point.rows();
  const Eigen::Index cols = point.cols();
  const Eigen::Index coords = 2 * rows * cols;
  Eigen::VectorXd derivative(coords);

#pragma omp parallel for schedule(static) num_threads(spec.num_threads)
  for (Eigen::Index c = 0; c < coords; ++c) {
    const Eigen::Index entry = c / 2;
    const bool imaginary = (c % 2) != 0;
    const Eigen::Index i = entry % rows;
    const Eigen::Index j = entry / rows;

    const double base = imaginary ? point(i, j).imag() : point(i, j).real();
    const double h =
        std::max(spec.relative_step * std::abs(base), spec.min_step);

    MatrixXcd probe = point;
    const std::complex<double> delta =
        imaginary ? std::complex<double>(0.0, h) : std::complex<double>(h, 0.0);
    probe(i, j) = point(i, j) + delta;
    const double plus = fn(probe);
    probe(i, j) = point(i, j) - delta;
    const double minus = fn(probe);
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      derivative[c] = std::numeric_limits<double>::quiet_NaN();
    } else {
      derivative[c] = (plus - minus) / (2.0 * h);
    }
  }

  for (Eigen::Index c = 0; c < coords; ++c) {
    if (!std::isfinite(derivative[c])) {
      throw std::runtime_error(
          "finite_difference_gradient: non-finite evaluation");
    }
  }

  MatrixXcd grad(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Eigen::Index entry = j * rows + i;
      grad(i, j) = std::complex<double>(derivative[2 * entry],
                                        derivative[2 * entry + 1]);
    }
  }
  return grad;
}

BruteforceMetrics bruteforce_metrics(const MatrixXcd& V,
                                     const MatrixXcd& user_channels,
                                     const MatrixXcd& target_channels,
                                     double noise_power) {
  const Eigen::Index M = V.rows();
  const Eigen::Index L = V.cols();
  if (user_channels.rows() != M || target_channels.rows() != M) {
    throw std::invalid_argument("bruteforce_metrics: dimension mismatch");
  }

  BruteforceMetrics out;
  out.sinr.resize(user_channels.cols());
  for (Eigen::Index k = 0; k < user_channels.cols(); ++k) {
    double signal = 0.0;
    double interference = 0.0;
    for (Eigen::Index i = 0; i < L; ++i) {
      std::complex<double> dot(0.0, 0.0);
      for (Eigen::Index m = 0; m < M; ++m) {
        dot += std::conj(user_channels(m, k)) * V(m, i);
      }
      const double q = dot.real() * dot.real() + dot.imag() * dot.imag();
      if (i == k) {
        signal = q;
      } else {
        interference += q;
      }
    }
    out.sinr[k] = signal / (interference + noise_power);
  }

  out.gain.resize(target_channels.cols());
  for (Eigen::Index n = 0; n < target_channels.cols(); ++n) {
    double gain = 0.0;
    for (Eigen::Index i = 0; i < L; ++i) {
      std::complex<double> dot(0.0, 0.0);
      for (Eigen::Index m = 0; m < M; ++m) {
        dot += std::conj(target_channels(m, n)) * V(m, i);
      }
      gain += dot.real() * dot.real() + dot.imag() * dot.imag();
    }
    out.gain[n] = gain;
  }

  double power = 0.0;
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index m = 0; m < M; ++m) {
      power += std::norm(V(m, i));
    }
  }
  out.power = power;
  return out;
}

RandomInstance random_instance(int num_antennas, int num_users,
                               int num_targets, std::mt19937_64& rng,
                               bool scaled_constraints) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto random_channels = [&](int cols) {
    MatrixXcd m(num_antennas, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, j) = std::complex<double>(gauss(rng), gauss(rng));
      }
    }
    return m;
  };

  RandomInstance inst;
  inst.cfg.num_antennas = num_antennas;
  inst.cfg.num_users = num_users;
  inst.cfg.num_targets = num_targets;
  inst.cfg.noise_power = 1.0;
  inst.cfg.max_power = 1.0 + unit(rng);
  inst.channels = make_channel_set(random_channels(num_users),
                                   random_channels(num_targets),
                                   inst.cfg.max_power);
  inst.point = manifold::random_point(num_antennas + 1,
                                      num_users + num_targets, rng);

  // Thresholds straddle the point's own metrics so hinge activity varies.
  inst.cfg.beampattern_thresholds.resize(num_targets);
  for (int n = 0; n < num_targets; ++n) {
    const double gain =
        beampattern_gain(inst.point, inst.channels.lifted_targets.col(n));
    inst.cfg.beampattern_thresholds[n] = gain * (0.5 + unit(rng));
  }
  inst.cfg.rate_thresholds.resize(num_users);
  for (int k = 0; k < num_users; ++k) {
    const double current = sinr(inst.point, inst.channels.lifted_users.col(k),
                                k, inst.cfg.noise_power);
    inst.cfg.rate_thresholds[k] =
        std::log2(1.0 + current * (0.5 + unit(rng)));
  }

  inst.fp.mu.resize(num_users);
  for (int k = 0; k < num_users; ++k) inst.fp.mu[k] = 5.0 * unit(rng);

  inst.mult = MultiplierState::zeros(num_targets, num_users);
  for (int n = 0; n < num_targets; ++n) inst.mult.lambda[n] = 2.0 * unit(rng);
  for (int k = 0; k < num_users; ++k) inst.mult.kappa[k] = 2.0 * unit(rng);
  inst.mult.rho = 0.5 + 4.0 * unit(rng);
  if (scaled_constraints) {
    inst.mult.sensing_scale = inst.cfg.beampattern_thresholds;
    inst.mult.sinr_scale = inst.cfg.sinr_floors().cwiseMax(1.0);
  }
  return inst;
}

GradCheckReport gradient_check(int num_antennas, int num_users,
                               int num_targets, int trials, double tolerance,
                               std::uint64_t seed, double corrupt_factor,
                               int fd_threads) {
  if (num_antennas < 3 || num_users < 1 || num_targets < 0 || trials < 1) {
    throw std::invalid_argument("gradient_check: bad dimensions");
  }
  std::mt19937_64 rng(seed);
  GradCheckReport report;
  report.trials = trials;
  double sum_err = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    // Alternate raw and threshold-scaled residuals.
    const RandomInstance inst = random_instance(
        num_antennas, num_users, num_targets, rng, trial % 2 == 1);

    MatrixXcd analytic = euclidean_gradient(inst.point, inst.fp, inst.mult,
                                            inst.channels, inst.cfg);
    if (corrupt_factor != 1.0) {
      const std::vector<int> first_term{0};
      const MatrixXcd term0 =
          euclidean_gradient(inst.point, inst.fp, inst.mult, inst.channels,
                             inst.cfg, first_term) /
          gradient_term_count(inst.channels);
      analytic += (corrupt_factor - 1.0) * term0;
    }

    FdSpec spec;
    spec.num_threads = fd_threads;
    const MatrixXcd numeric = finite_difference_gradient(
        [&](const MatrixXcd& p) {
          return augmented_lagrangian(p, inst.fp, inst.mult, inst.channels,
                                      inst.cfg);
        },
        inst.point, spec);

    const double scale = std::max(numeric.norm(), 1e-300);
    const double err = (analytic - numeric).norm() / scale;
    report.max_rel_err = std::max(report.max_rel_err, err);
    sum_err += err;
  }
  report.mean_rel_err = sum_err / trials;
  report.pass = report.max_rel_err <= tolerance;
  return report;
}

RandomSearchResult random_search_baseline(const ChannelSet& channels,
                                          const ScenarioConfig& cfg,
                                          long sample_budget,
                                          std::mt19937_64& rng) {
  if (sample_budget < 1) {
    throw std::invalid_argument("random_search_baseline: budget must be >= 1");
  }
  const Eigen::Index rows = channels.lifted_users.rows();
  const Eigen::Index L =
      channels.lifted_users.cols() + channels.lifted_targets.cols();

  RandomSearchResult best;
  for (long s = 0; s < sample_budget; ++s) {
    const MatrixXcd point = manifold::random_point(rows, L, rng);
    const ConstraintResiduals res = residuals(point, channels, cfg);
    if (res.sensing.size() > 0 && (res.sensing.array() > 0.0).any()) continue;
    if (res.sinr.size() > 0 && (res.sinr.array() > 0.0).any()) continue;
    const double rate = sum_rate(point, channels.lifted_users, cfg.noise_power);
    if (!best.found || rate > best.sum_rate) {
      best.found = true;
      best.sum_rate = rate;
      best.beamformer = manifold::extract(point, cfg.max_power);
    }
  }
  return best;
}

}  // namespace sgalm::oracle
