#include "sgalm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sgalm {

namespace {

// Per-user quantities shared by the objective, residual and gradient paths.
struct UserTerms {
  Eigen::RowVectorXcd row;  // hhat_k^H Vt, 1 x (K+N)
  std::complex<double> a;   // row[k]
  double sig = 0;           // |a|^2
  double den_full = 0;      // ||row||^2 + noise, all columns
  double den_excl = 0;      // den_full - sig, interference + noise
};

UserTerms user_terms(const MatrixXcd& lifted, const ChannelSet& channels,
                     int k, double noise_power) {
  UserTerms t;
  t.row = channels.lifted_users.col(k).adjoint() * lifted;
  t.a = t.row[k];
  t.sig = std::norm(t.a);
  t.den_full = t.row.squaredNorm() + noise_power;
  t.den_excl = t.den_full - t.sig;
  return t;
}

double guarded(double scale) { return scale > 0 ? scale : 1.0; }

}  // namespace

MultiplierState MultiplierState::zeros(int num_targets, int num_users) {
  MultiplierState state;
  state.lambda = VectorXd::Zero(num_targets);
  state.kappa = VectorXd::Zero(num_users);
  state.sensing_scale = VectorXd::Ones(num_targets);
  state.sinr_scale = VectorXd::Ones(num_users);
  return state;
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kStochasticGradient: return "sgd";
    case Method::kSteepestDescent: return "sd";
    case Method::kConjugateGradient: return "cg";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "sgd") return Method::kStochasticGradient;
  if (name == "sd") return Method::kSteepestDescent;
  if (name == "cg") return Method::kConjugateGradient;
  return std::nullopt;
}

void SolverOptions::validate() const {
  if (!(alpha0 > 0)) throw std::invalid_argument("alpha0 must be positive");
  if (decay < 0) throw std::invalid_argument("decay must be nonnegative");
  if (!(batch_fraction > 0) || batch_fraction > 1.0) {
    throw std::invalid_argument("batch_fraction must lie in (0, 1]");
  }
  if (max_inner_iterations < 1 || max_fp_iterations < 1 || max_alm_rounds < 1) {
    throw std::invalid_argument("iteration caps must be positive");
  }
  if (!(eps_initial > 0) || !(eps_final > 0) || eps_final > eps_initial) {
    throw std::invalid_argument("tolerance schedule must be positive and decreasing");
  }
  if (!(feasibility_tolerance > 0)) {
    throw std::invalid_argument("feasibility_tolerance must be positive");
  }
  if (!(displacement_cap > 0)) {
    throw std::invalid_argument("displacement_cap must be positive");
  }
  if (grad_check_interval < 1) {
    throw std::invalid_argument("grad_check_interval must be positive");
  }
}

FpState update_mu(const MatrixXcd& lifted, const ChannelSet& channels,
                  double noise_power) {
  const int K = static_cast<int>(channels.lifted_users.cols());
  FpState fp;
  fp.mu.resize(K);
  for (int k = 0; k < K; ++k) {
    const UserTerms t = user_terms(lifted, channels, k, noise_power);
    fp.mu[k] = t.sig / t.den_excl;
  }
  return fp;
}

double fp_objective(const MatrixXcd& lifted, const FpState& fp,
                    const ChannelSet& channels, double noise_power) {
  const int K = static_cast<int>(channels.lifted_users.cols());
  const VectorXd w = fp.weights();
  double value = 0.0;
  for (int k = 0; k < K; ++k) {
    const UserTerms t = user_terms(lifted, channels, k, noise_power);
    value -= w[k] * t.sig / t.den_full;
  }
  return value;
}

double fp_full_objective(const MatrixXcd& lifted, const FpState& fp,
                         const ChannelSet& channels, double noise_power) {
  const int K = static_cast<int>(channels.lifted_users.cols());
  const VectorXd w = fp.weights();
  double value = 0.0;
  for (int k = 0; k < K; ++k) {
    const UserTerms t = user_terms(lifted, channels, k, noise_power);
    value += std::log(1.0 + fp.mu[k]) - fp.mu[k] + w[k] * t.sig / t.den_full;
  }
  return value / std::numbers::ln2_v<double>;
}

double augmented_lagrangian(const MatrixXcd& lifted, const FpState& fp,
                            const MultiplierState& mult,
                            const ChannelSet& channels,
                            const ScenarioConfig& cfg) {
  const int K = static_cast<int>(channels.lifted_users.cols());
  const int N = static_cast<int>(channels.lifted_targets.cols());
  const VectorXd floors = cfg.sinr_floors();
  const VectorXd w = fp.weights();

  double value = 0.0;
  double penalty = 0.0;
  for (int k = 0; k < K; ++k) {
    const UserTerms t = user_terms(lifted, channels, k, cfg.noise_power);
    value -= w[k] * t.sig / t.den_full;
    const double c =
        (floors[k] - t.sig / t.den_excl) / guarded(mult.sinr_scale[k]);
    const double hinge = std::max(0.0, mult.kappa[k] / mult.rho + c);
    penalty += hinge * hinge;
  }
  for (int n = 0; n < N; ++n) {
    const double gain =
        (channels.lifted_targets.col(n).adjoint() * lifted).squaredNorm();
    const double u = (cfg.beampattern_thresholds[n] - gain) /
                     guarded(mult.sensing_scale[n]);
    const double hinge = std::max(0.0, mult.lambda[n] / mult.rho + u);
    penalty += hinge * hinge;
  }
  return value + 0.5 * mult.rho * penalty;
}

int gradient_term_count(const ChannelSet& channels) {
  return 2 * static_cast<int>(channels.lifted_users.cols()) +
         static_cast<int>(channels.lifted_targets.cols());
}

MatrixXcd euclidean_gradient(const MatrixXcd& lifted, const FpState& fp,
                             const MultiplierState& mult,
                             const ChannelSet& channels,
                             const ScenarioConfig& cfg,
                             const std::optional<std::vector<int>>& batch) {
  const int K = static_cast<int>(channels.lifted_users.cols());
  const int N = static_cast<int>(channels.lifted_targets.cols());
  const int population = 2 * K + N;

  std::vector<char> included(population, 1);
  double scale = 1.0;
  if (batch.has_value()) {
    if (batch->empty()) {
      throw std::invalid_argument("euclidean_gradient: empty batch");
    }
    std::fill(included.begin(), included.end(), 0);
    int distinct = 0;
    for (const int idx : *batch) {
      if (idx < 0 || idx >= population) {
        throw std::invalid_argument("euclidean_gradient: batch index out of range");
      }
      if (!included[idx]) {
        included[idx] = 1;
        ++distinct;
      }
    }
    scale = static_cast<double>(population) / distinct;
  }

  const VectorXd floors = cfg.sinr_floors();
  const VectorXd w = fp.weights();
  MatrixXcd grad = MatrixXcd::Zero(lifted.rows(), lifted.cols());

  for (int k = 0; k < K; ++k) {
    const bool fraction_on = included[k];
    const bool penalty_on = included[K + N + k];
    if (!fraction_on && !penalty_on) continue;

    const UserTerms t = user_terms(lifted, channels, k, cfg.noise_power);
    const VectorXcd& hhat = channels.lifted_users.col(k);

    if (fraction_on) {
      // Quotient rule on -w |a|^2 / den_full.
      grad.col(k) += (scale * -2.0 * w[k] / t.den_full) * t.a * hhat;
      grad.noalias() +=
          (scale * 2.0 * w[k] * t.sig / (t.den_full * t.den_full)) *
          (hhat * t.row);
    }
    if (penalty_on) {
      const double zeta = guarded(mult.sinr_scale[k]);
      const double c = (floors[k] - t.sig / t.den_excl) / zeta;
      const double hinge = mult.kappa[k] / mult.rho + c;
      if (hinge > 0) {
        const double coef = scale * mult.rho * hinge / zeta;
        Eigen::RowVectorXcd row_ex = t.row;
        row_ex[k] = 0.0;
        grad.col(k) += (-2.0 * coef / t.den_excl) * t.a * hhat;
        grad.noalias() +=
            (2.0 * coef * t.sig / (t.den_excl * t.den_excl)) * (hhat * row_ex);
      }
    }
  }

  for (int n = 0; n < N; ++n) {
    if (!included[K + n]) continue;
    const VectorXcd& ghat = channels.lifted_targets.col(n);
    const Eigen::RowVectorXcd row = ghat.adjoint() * lifted;
    const double omega = guarded(mult.sensing_scale[n]);
    const double u = (cfg.beampattern_thresholds[n] - row.squaredNorm()) / omega;
    const double hinge = mult.lambda[n] / mult.rho + u;
    if (hinge > 0) {
      grad.noalias() +=
          (scale * -2.0 * mult.rho * hinge / omega) * (ghat * row);
    }
  }
  return grad;
}

double step_size(long t, double alpha0, double decay) {
  return alpha0 / (1.0 + alpha0 * decay * static_cast<double>(t));
}

MultiplierState update_multipliers(const MultiplierState& state,
                                   const ConstraintResiduals& res) {
  MultiplierState next = state;
  for (Eigen::Index n = 0; n < next.lambda.size(); ++n) {
    const double scaled = res.sensing[n] / guarded(state.sensing_scale[n]);
    next.lambda[n] = std::clamp(state.lambda[n] + state.rho * scaled,
                                state.clip_min, state.clip_max);
  }
  for (Eigen::Index k = 0; k < next.kappa.size(); ++k) {
    const double scaled = res.sinr[k] / guarded(state.sinr_scale[k]);
    next.kappa[k] = std::clamp(state.kappa[k] + state.rho * scaled,
                               state.clip_min, state.clip_max);
  }
  return next;
}

MultiplierState update_penalty(MultiplierState state, double current_violation,
                               double previous_violation) {
  if (current_violation > state.shrink_ratio * previous_violation) {
    state.rho = std::min(state.growth * state.rho, state.rho_max);
  }
  return state;
}

double scaled_violation(const ConstraintResiduals& res,
                        const MultiplierState& mult) {
  double worst = 0.0;
  for (Eigen::Index n = 0; n < res.sensing.size(); ++n) {
    worst = std::max(worst, res.sensing[n] / guarded(mult.sensing_scale[n]));
  }
  for (Eigen::Index k = 0; k < res.sinr.size(); ++k) {
    worst = std::max(worst, res.sinr[k] / guarded(mult.sinr_scale[k]));
  }
  return worst;
}

InnerResult inner_minimize(const MatrixXcd& start, const FpState& fp,
                           const MultiplierState& mult,
                           const ChannelSet& channels,
                           const ScenarioConfig& cfg,
                           const SolverOptions& opts, double eps,
                           std::mt19937_64& rng,
                           const InnerObserver& observer) {
  const auto project = [&](const MatrixXcd& point, const MatrixXcd& ambient) {
    return opts.entrywise_projection
               ? manifold::project_tangent_entrywise(point, ambient)
               : manifold::project_tangent(point, ambient);
  };
  const auto riemannian = [&](const MatrixXcd& point) {
    return project(point,
                   euclidean_gradient(point, fp, mult, channels, cfg));
  };

  MatrixXcd point = start;
  MatrixXcd xi = riemannian(point);
  double grad_norm = xi.norm();

  InnerResult out;
  if (grad_norm <= eps) {
    out.point = std::move(point);
    out.final_grad_norm = grad_norm;
    return out;
  }

  const bool stochastic = opts.method == Method::kStochasticGradient;
  const int population = gradient_term_count(channels);
  const int batch_size = std::max(
      1, static_cast<int>(std::ceil(opts.batch_fraction * population)));
  std::vector<int> all_terms(population);
  std::iota(all_terms.begin(), all_terms.end(), 0);

  double lagrangian = 0.0;
  if (!stochastic) {
    lagrangian = augmented_lagrangian(point, fp, mult, channels, cfg);
  }

  MatrixXcd prev_direction;
  double prev_grad_sq = 0.0;
  bool have_prev = false;

  long t = 0;
  while (t < opts.max_inner_iterations) {
    if (stochastic) {
      std::vector<int> batch;
      batch.reserve(batch_size);
      std::sample(all_terms.begin(), all_terms.end(),
                  std::back_inserter(batch), batch_size, rng);
      const MatrixXcd g =
          euclidean_gradient(point, fp, mult, channels, cfg, batch);
      const MatrixXcd direction = -project(point, g);
      const double dir_norm = direction.norm();
      double alpha = step_size(t, opts.alpha0, opts.decay);
      if (dir_norm * alpha > opts.displacement_cap) {
        alpha = opts.displacement_cap / dir_norm;
      }
      if (dir_norm > 0) point = manifold::retract(point, direction, alpha);
      ++t;
      const bool checkpoint = (t % opts.grad_check_interval == 0) ||
                              t == opts.max_inner_iterations;
      if (checkpoint) {
        xi = riemannian(point);
        grad_norm = xi.norm();
        if (observer) observer(point, t - 1, grad_norm, alpha);
        if (grad_norm <= eps) break;
      }
    } else {
      MatrixXcd direction = -xi;
      if (opts.method == Method::kConjugateGradient && have_prev &&
          prev_grad_sq > 0) {
        // Fletcher-Reeves with projection transport of the old direction.
        const double beta = grad_norm * grad_norm / prev_grad_sq;
        direction = -xi + beta * project(point, prev_direction);
        if (manifold::inner(direction, xi) >= 0) direction = -xi;
      }
      const double slope = manifold::inner(xi, direction);
      const double dir_norm = direction.norm();
      double alpha = step_size(t, opts.alpha0, opts.decay);
      if (dir_norm * alpha > opts.displacement_cap) {
        alpha = opts.displacement_cap / dir_norm;
      }
      bool accepted = false;
      MatrixXcd trial;
      double trial_lagrangian = 0.0;
      for (int backtrack = 0; backtrack < 60; ++backtrack) {
        trial = manifold::retract(point, direction, alpha);
        trial_lagrangian =
            augmented_lagrangian(trial, fp, mult, channels, cfg);
        if (trial_lagrangian <= lagrangian + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;  // step size exhausted; stationary to precision
      point = std::move(trial);
      lagrangian = trial_lagrangian;
      prev_direction = std::move(direction);
      prev_grad_sq = grad_norm * grad_norm;
      have_prev = true;
      ++t;
      xi = riemannian(point);
      grad_norm = xi.norm();
      if (observer) observer(point, t - 1, grad_norm, alpha);
      if (grad_norm <= eps) break;
    }
  }

  out.point = std::move(point);
  out.iterations = t;
  out.final_grad_norm = grad_norm;
  return out;
}

SolveResult solve(const ChannelSet& channels, const ScenarioConfig& cfg,
                  const SolverOptions& opts) {
  opts.validate();
  const auto start_time = std::chrono::steady_clock::now();

  const int K = static_cast<int>(channels.lifted_users.cols());
  const int N = static_cast<int>(channels.lifted_targets.cols());
  const int L = K + N;
  const Eigen::Index rows = channels.lifted_users.rows();
  if (cfg.beampattern_thresholds.size() != N ||
      cfg.rate_thresholds.size() != K) {
    throw std::invalid_argument("solve: threshold lengths do not match channels");
  }

  std::mt19937_64 rng(opts.rng_seed);

  MatrixXcd point;
  if (opts.warm_start) {
    MatrixXcd V(rows - 1, L);
    const double column_power = cfg.max_power / L;
    for (int k = 0; k < K; ++k) {
      V.col(k) = std::sqrt(column_power) * channels.users.col(k).normalized();
    }
    for (int n = 0; n < N; ++n) {
      V.col(K + n) =
          std::sqrt(column_power) * channels.targets.col(n).normalized();
    }
    point = manifold::lift(V, cfg.max_power);
  } else {
    point = manifold::random_point(rows, L, rng);
  }

  MultiplierState mult = MultiplierState::zeros(N, K);
  if (opts.scale_constraints) {
    for (int n = 0; n < N; ++n) {
      mult.sensing_scale[n] = guarded(cfg.beampattern_thresholds[n]);
    }
    const VectorXd floors = cfg.sinr_floors();
    for (int k = 0; k < K; ++k) {
      mult.sinr_scale[k] = std::max(1.0, floors[k]);
    }
  }

  SolveResult out;
  long global_iter = 0;
  const std::string mname = method_name(opts.method);

  const auto lifted_rate = [&](const MatrixXcd& pt) {
    return sum_rate(pt, channels.lifted_users, cfg.noise_power);
  };

  // Best-iterate bookkeeping: best feasible by rate, else least violation.
  bool have_feasible = false;
  double best_rate = -std::numeric_limits<double>::infinity();
  double least_violation = std::numeric_limits<double>::infinity();
  MatrixXcd best_point = point;
  MatrixXcd fallback_point = point;

  const auto consider = [&](const MatrixXcd& pt, double violation,
                            double rate) {
    if (violation <= opts.feasibility_tolerance) {
      if (!have_feasible || rate > best_rate) {
        best_point = pt;
        best_rate = rate;
      }
      have_feasible = true;
    } else if (!have_feasible && violation < least_violation) {
      fallback_point = pt;
    }
    least_violation = std::min(least_violation, violation);
  };

  FpState fp;
  const auto trace_row = [&](const std::string& phase, const MatrixXcd& pt,
                             double grad_norm, double step) {
    const auto res = residuals(pt, channels, cfg);
    const double violation = scaled_violation(res, mult);
    consider(pt, violation, lifted_rate(pt));
    out.trace.push_back(TraceRow{
        global_iter++, phase, fp_objective(pt, fp, channels, cfg.noise_power),
        augmented_lagrangian(pt, fp, mult, channels, cfg), grad_norm,
        violation, step, mult.rho, mname});
  };

  const auto full_grad_norm = [&](const MatrixXcd& pt) {
    const MatrixXcd g = euclidean_gradient(pt, fp, mult, channels, cfg);
    return (opts.entrywise_projection
                ? manifold::project_tangent_entrywise(pt, g)
                : manifold::project_tangent(pt, g))
        .norm();
  };

  double prev_rate = lifted_rate(point);
  double prev_violation = std::numeric_limits<double>::infinity();
  int eps_round = 0;
  bool converged = false;

  for (int fp_round = 0; fp_round < opts.max_fp_iterations && !converged;
       ++fp_round) {
    fp = update_mu(point, channels, cfg.noise_power);
    out.fp_iterations = fp_round + 1;
    trace_row("fp_round " + std::to_string(fp_round), point,
              full_grad_norm(point), 0.0);

    for (int alm_round = 0; alm_round < opts.max_alm_rounds; ++alm_round) {
      const double eps = std::max(
          opts.eps_initial * std::pow(0.5, eps_round), opts.eps_final);
      const InnerObserver observer = [&](const MatrixXcd& pt, long inner_iter,
                                         double grad_norm, double step) {
        trace_row("inner_iter " + std::to_string(inner_iter), pt, grad_norm,
                  step);
      };
      const InnerResult inner = inner_minimize(point, fp, mult, channels, cfg,
                                               opts, eps, rng, observer);
      point = inner.point;
      out.inner_iterations += inner.iterations;
      ++out.alm_rounds;
      ++eps_round;

      const auto res = residuals(point, channels, cfg);
      const double violation = scaled_violation(res, mult);
      consider(point, violation, lifted_rate(point));

      mult = update_multipliers(mult, res);
      mult = update_penalty(mult, violation, prev_violation);
      prev_violation = violation;
      trace_row("alm_round " + std::to_string(alm_round), point,
                inner.final_grad_norm, 0.0);

      if (inner.final_grad_norm <= eps &&
          violation <= opts.feasibility_tolerance) {
        break;
      }
    }

    const double rate = lifted_rate(point);
    if (fp_round > 0 && std::abs(rate - prev_rate) < opts.sum_rate_tolerance) {
      converged = true;
    }
    prev_rate = rate;
  }

  const MatrixXcd chosen = have_feasible ? best_point : fallback_point;
  out.lifted = chosen;
  out.beamformer = manifold::extract(chosen, cfg.max_power);
  out.feasible = have_feasible;
  out.residuals = residuals(chosen, channels, cfg);
  out.max_violation = scaled_violation(out.residuals, mult);
  out.sum_rate = sum_rate(out.beamformer, channels.users, cfg.noise_power);
  out.user_sinr.resize(K);
  for (int k = 0; k < K; ++k) {
    out.user_sinr[k] =
        sinr(out.beamformer, channels.users.col(k), k, cfg.noise_power);
  }
  out.target_gain.resize(N);
  for (int n = 0; n < N; ++n) {
    out.target_gain[n] =
        beampattern_gain(out.beamformer, channels.targets.col(n));
  }
  out.wall_time_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start_time)
                        .count();
  return out;
}

}  // namespace sgalm
