#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgalm/manifold.hpp"
#include "sgalm/metrics.hpp"

namespace sgalm {

/// Auxiliary SINR variables of the fractional-programming reformulation.
struct FpState {
  VectorXd mu;  // length K, nonnegative

  /// mu_hat_k = 1 + mu_k, the weights entering the quadratic objective.
  VectorXd weights() const { return mu.array() + 1.0; }
};

/// Lagrange multipliers, penalty weight and the residual scaling used by
/// the augmented Lagrangian. Scales default to 1 (raw residuals); solve()
/// sets them to the constraint thresholds so one clip range and one
/// feasibility tolerance work across both constraint families.
struct MultiplierState {
  VectorXd lambda;         // sensing multipliers, length N
  VectorXd kappa;          // SINR multipliers, length K
  double rho = 1.0;        // penalty weight
  double clip_min = 0.0;
  double clip_max = 100.0;
  double growth = 2.0;     // rho multiplier on stalled violation
  double rho_max = 1e6;
  double shrink_ratio = 0.9;
  VectorXd sensing_scale;  // length N, positive
  VectorXd sinr_scale;     // length K, positive

  static MultiplierState zeros(int num_targets, int num_users);
};

enum class Method { kStochasticGradient, kSteepestDescent, kConjugateGradient };

std::string method_name(Method method);
std::optional<Method> parse_method(const std::string& name);

struct SolverOptions {
  Method method = Method::kStochasticGradient;
  double alpha0 = 1.0;             // initial step size
  double decay = 0.1;              // alpha_t = alpha0 / (1 + alpha0*decay*t)
  double batch_fraction = 0.5;     // fraction of gradient terms per SGD step
  int max_inner_iterations = 400;
  int max_fp_iterations = 30;
  int max_alm_rounds = 6;
  double eps_initial = 1e-2;       // inner gradient-norm tolerance schedule
  double eps_final = 1e-6;
  double feasibility_tolerance = 1e-3;  // on threshold-normalized residuals
  double sum_rate_tolerance = 1e-4;     // FP outer stop, bits/s/Hz
  double displacement_cap = 0.5;   // limits ||step * direction|| per iterate
  int grad_check_interval = 10;    // SGD full-gradient cadence
  bool warm_start = false;         // matched-filter init instead of random
  bool entrywise_projection = false;
  bool scale_constraints = true;
  std::uint64_t rng_seed = 1;

  void validate() const;  // throws std::invalid_argument
};

struct TraceRow {
  long iter = 0;          // global index, strictly increasing
  std::string phase;      // "fp_round 0" | "alm_round 1" | "inner_iter 17"
  double objective = 0;   // FP objective f
  double lagrangian = 0;
  double grad_norm = 0;   // Riemannian, full batch
  double max_violation = 0;
  double step = 0;
  double rho = 0;
  std::string method;
};

struct SolveResult {
  MatrixXcd lifted;            // returned manifold point
  MatrixXcd beamformer;        // extracted V, M x (K+N)
  double sum_rate = 0;         // bits/s/Hz
  VectorXd user_sinr;          // linear
  VectorXd target_gain;        // watts
  ConstraintResiduals residuals;
  double max_violation = 0;    // threshold-normalized
  bool feasible = false;
  int fp_iterations = 0;
  int alm_rounds = 0;
  long inner_iterations = 0;
  double wall_time_s = 0;
  std::vector<TraceRow> trace;
};

/// Closed-form FP update: mu_k = current lifted SINR of user k.
FpState update_mu(const MatrixXcd& lifted, const ChannelSet& channels,
                  double noise_power);

/// Reduced FP objective (minimization form):
/// f = -sum_k mu_hat_k |hhat_k^H Vt e_k|^2 / (sum_i |hhat_k^H Vt e_i|^2 + s2).
/// The denominator runs over all K+N columns including k.
double fp_objective(const MatrixXcd& lifted, const FpState& fp,
                    const ChannelSet& channels, double noise_power);

/// Full FP objective including the log and linear terms in mu. At
/// mu = update_mu(..) it equals sum_k log2(1 + sinr_k) exactly.
double fp_full_objective(const MatrixXcd& lifted, const FpState& fp,
                         const ChannelSet& channels, double noise_power);

/// f plus the quadratic hinge penalties of both constraint families.
double augmented_lagrangian(const MatrixXcd& lifted, const FpState& fp,
                            const MultiplierState& mult,
                            const ChannelSet& channels,
                            const ScenarioConfig& cfg);

/// Gradient term population: indices [0,K) are the FP fractions, [K,K+N)
/// the sensing penalties, [K+N,2K+N) the SINR penalties.
int gradient_term_count(const ChannelSet& channels);

/// Conjugate-Wirtinger gradient of the augmented Lagrangian, scaled so that
/// L(Vt+D) ~ L(Vt) + Re{Tr(G^H D)}. With a batch, sampled terms are
/// rescaled by population/batch for unbiasedness. Empty batch throws.
MatrixXcd euclidean_gradient(const MatrixXcd& lifted, const FpState& fp,
                             const MultiplierState& mult,
                             const ChannelSet& channels,
                             const ScenarioConfig& cfg,
                             const std::optional<std::vector<int>>& batch =
                                 std::nullopt);

/// Decaying schedule alpha_t = alpha0 / (1 + alpha0 * decay * t).
double step_size(long t, double alpha0, double decay);

/// Gradient-type multiplier update with clipping, on scaled residuals.
MultiplierState update_multipliers(const MultiplierState& state,
                                   const ConstraintResiduals& res);

/// Doubles rho (capped) when the max violation failed to shrink by
/// shrink_ratio relative to the previous round.
MultiplierState update_penalty(MultiplierState state, double current_violation,
                               double previous_violation);

/// Largest positive scaled residual; zero when feasible.
double scaled_violation(const ConstraintResiduals& res,
                        const MultiplierState& mult);

struct InnerResult {
  MatrixXcd point;
  long iterations = 0;
  double final_grad_norm = 0;  // full batch
};

/// Called at checkpoints (every iteration for deterministic methods).
using InnerObserver = std::function<void(
    const MatrixXcd& point, long inner_iter, double grad_norm, double step)>;

/// Minimizes the augmented Lagrangian on the sphere from `start` until the
/// full-batch Riemannian gradient norm drops below eps or the iteration cap.
InnerResult inner_minimize(const MatrixXcd& start, const FpState& fp,
                           const MultiplierState& mult,
                           const ChannelSet& channels,
                           const ScenarioConfig& cfg,
                           const SolverOptions& opts, double eps,
                           std::mt19937_64& rng,
                           const InnerObserver& observer = nullptr);

/// Full SGALM run: FP outer loop, ALM middle loop, Riemannian inner loop.
/// Returns the best feasible iterate encountered (by sum rate), or the
/// minimal-violation iterate with feasible = false.
SolveResult solve(const ChannelSet& channels, const ScenarioConfig& cfg,
                  const SolverOptions& opts);

}  // namespace sgalm
