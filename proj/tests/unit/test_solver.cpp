#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sgalm/oracle.hpp"
#include "sgalm/solver.hpp"

using namespace sgalm;
using test_util::rel_err;

namespace {

MatrixXcd slack_only_point(int rows, int cols) {
  MatrixXcd point = MatrixXcd::Zero(rows, cols);
  point.row(rows - 1).setConstant(std::sqrt(1.0 / cols));
  return point;
}

}  // namespace

TEST_CASE("mu update returns the current lifted SINRs") {
  std::mt19937_64 rng(41);
  const auto problem = test_util::synthetic_problem(6, 2, 2, rng);

  SUBCASE("no physical beams means zero SINR") {
    const FpState fp =
        update_mu(slack_only_point(7, 4), problem.channels, 1.0);
    CHECK(fp.mu.norm() == 0.0);
    CHECK((fp.weights().array() == 1.0).all());
  }

  SUBCASE("identity map on SINRs") {
    const MatrixXcd point = manifold::random_point(7, 4, rng);
    const FpState fp = update_mu(point, problem.channels, 1.0);
    for (int k = 0; k < 2; ++k) {
      const double gamma =
          sinr(point, problem.channels.lifted_users.col(k), k, 1.0);
      CHECK(rel_err(fp.mu[k], gamma) <= 1e-12);
    }
  }
}

TEST_CASE("full FP objective reproduces the sum of logs at mu*") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto problem = test_util::synthetic_problem(5, 2, 2, rng, 0.4);
    const MatrixXcd point = manifold::random_point(6, 4, rng);
    const FpState fp = update_mu(point, problem.channels, 0.4);
    const double direct = sum_rate(point, problem.channels.lifted_users, 0.4);
    const double via_fp =
        fp_full_objective(point, fp, problem.channels, 0.4);
    CHECK(rel_err(direct, via_fp) <= 1e-9);
  }
}

TEST_CASE("reduced FP objective") {
  std::mt19937_64 rng(43);
  const auto problem = test_util::synthetic_problem(5, 1, 0, rng, 0.2);

  SUBCASE("no beams gives zero") {
    FpState fp;
    fp.mu = VectorXd::Constant(1, 1.3);
    CHECK(fp_objective(slack_only_point(6, 1), fp, problem.channels, 0.2) ==
          0.0);
  }

  SUBCASE("single-user value matches a hand computation") {
    const MatrixXcd point = manifold::random_point(6, 1, rng);
    FpState fp;
    fp.mu = VectorXd::Constant(1, 1.0);  // mu_hat = 2
    const std::complex<double> a =
        problem.channels.lifted_users.col(0).dot(point.col(0));
    const double sig = std::norm(a);
    const double expected = -2.0 * sig / (sig + 0.2);
    CHECK(rel_err(fp_objective(point, fp, problem.channels, 0.2), expected) <=
          1e-12);

    FpState doubled;
    doubled.mu = VectorXd::Constant(1, 3.0);  // mu_hat doubles
    CHECK(rel_err(fp_objective(point, doubled, problem.channels, 0.2),
                  2.0 * expected) <= 1e-12);
  }
}

TEST_CASE("augmented Lagrangian hinge behavior") {
  std::mt19937_64 rng(44);
  auto problem = test_util::synthetic_problem(5, 2, 2, rng, 0.5);
  const MatrixXcd point = manifold::random_point(6, 4, rng);
  FpState fp = update_mu(point, problem.channels, 0.5);
  MultiplierState mult = MultiplierState::zeros(2, 2);

  SUBCASE("inactive hinges leave only f") {
    // Thresholds far below the achieved values: strictly feasible.
    for (int n = 0; n < 2; ++n) {
      problem.cfg.beampattern_thresholds[n] =
          0.5 * beampattern_gain(point, problem.channels.lifted_targets.col(n));
    }
    problem.cfg.rate_thresholds.setZero();
    const double f = fp_objective(point, fp, problem.channels, 0.5);
    const double lagr =
        augmented_lagrangian(point, fp, mult, problem.channels, problem.cfg);
    CHECK(rel_err(lagr, f) <= 1e-12);
  }

  SUBCASE("a single violated constraint adds one quadratic term") {
    const double gain =
        beampattern_gain(point, problem.channels.lifted_targets.col(0));
    problem.cfg.beampattern_thresholds[0] = gain * 3.0;  // violated: u = 2 gain
    problem.cfg.beampattern_thresholds[1] =
        0.5 * beampattern_gain(point, problem.channels.lifted_targets.col(1));
    problem.cfg.rate_thresholds.setZero();
    mult.rho = 2.5;
    const double f = fp_objective(point, fp, problem.channels, 0.5);
    const double lagr =
        augmented_lagrangian(point, fp, mult, problem.channels, problem.cfg);
    const double u = 2.0 * gain;
    CHECK(rel_err(lagr - f, 0.5 * mult.rho * u * u) <= 1e-9);
  }

  SUBCASE("term-by-term recomputation") {
    for (int trial = 0; trial < 20; ++trial) {
      const oracle::RandomInstance inst =
          oracle::random_instance(5, 2, 2, rng, trial % 2 == 0);
      const double lagr = augmented_lagrangian(inst.point, inst.fp, inst.mult,
                                               inst.channels, inst.cfg);
      // Independent reassembly from the metric functions.
      double expected =
          fp_objective(inst.point, inst.fp, inst.channels, inst.cfg.noise_power);
      const auto res = residuals(inst.point, inst.channels, inst.cfg);
      for (int n = 0; n < 2; ++n) {
        const double hinge =
            std::max(0.0, inst.mult.lambda[n] / inst.mult.rho +
                              res.sensing[n] / inst.mult.sensing_scale[n]);
        expected += 0.5 * inst.mult.rho * hinge * hinge;
      }
      for (int k = 0; k < 2; ++k) {
        const double hinge =
            std::max(0.0, inst.mult.kappa[k] / inst.mult.rho +
                              res.sinr[k] / inst.mult.sinr_scale[k]);
        expected += 0.5 * inst.mult.rho * hinge * hinge;
      }
      CHECK(rel_err(lagr, expected) <= 1e-9);
      CHECK(lagr >= fp_objective(inst.point, inst.fp, inst.channels,
                                 inst.cfg.noise_power) -
                        1e-12);
    }
  }
}

TEST_CASE("gradient penalty blocks vanish at strictly feasible points") {
  std::mt19937_64 rng(45);
  auto problem = test_util::synthetic_problem(5, 2, 2, rng, 0.5);
  const MatrixXcd point = manifold::random_point(6, 4, rng);
  const FpState fp = update_mu(point, problem.channels, 0.5);
  for (int n = 0; n < 2; ++n) {
    problem.cfg.beampattern_thresholds[n] =
        0.25 * beampattern_gain(point, problem.channels.lifted_targets.col(n));
  }
  problem.cfg.rate_thresholds.setZero();
  MultiplierState mult = MultiplierState::zeros(2, 2);

  const MatrixXcd full =
      euclidean_gradient(point, fp, mult, problem.channels, problem.cfg);
  // FP terms only: the penalty indicators must all be off.
  const std::vector<int> fp_only{0, 1};
  const MatrixXcd fraction_terms = euclidean_gradient(
      point, fp, mult, problem.channels, problem.cfg, fp_only);
  // Batch scaling is population/2 = 3 here.
  CHECK((full - fraction_terms / 3.0).norm() <= 1e-12 * full.norm());
}

TEST_CASE("analytic gradient matches finite differences") {
  const auto report = oracle::gradient_check(9, 2, 2, 8, 1e-5, 1234);
  INFO("max relative error ", report.max_rel_err);
  CHECK(report.pass);
}

TEST_CASE("corrupting one term breaks the finite-difference match") {
  const auto report = oracle::gradient_check(9, 2, 2, 4, 1e-5, 1234, 1.01);
  CHECK_FALSE(report.pass);
}

TEST_CASE("mini-batch gradient is unbiased") {
  std::mt19937_64 rng(46);
  const oracle::RandomInstance inst = oracle::random_instance(6, 2, 2, rng);
  const int population = gradient_term_count(inst.channels);
  REQUIRE(population == 6);

  const MatrixXcd full = euclidean_gradient(inst.point, inst.fp, inst.mult,
                                            inst.channels, inst.cfg);
  MatrixXcd average = MatrixXcd::Zero(7, 4);
  for (int term = 0; term < population; ++term) {
    const std::vector<int> batch{term};
    average += euclidean_gradient(inst.point, inst.fp, inst.mult,
                                  inst.channels, inst.cfg, batch);
  }
  average /= population;
  CHECK((average - full).norm() <= 1e-12 * std::max(1.0, full.norm()));
}

TEST_CASE("empty batch is rejected") {
  std::mt19937_64 rng(47);
  const oracle::RandomInstance inst = oracle::random_instance(5, 1, 1, rng);
  const std::vector<int> empty;
  CHECK_THROWS_AS(euclidean_gradient(inst.point, inst.fp, inst.mult,
                                     inst.channels, inst.cfg, empty),
                  std::invalid_argument);
}

TEST_CASE("step size schedule") {
  CHECK(step_size(0, 0.7, 0.3) == 0.7);
  CHECK(step_size(1, 1.0, 1.0) == doctest::Approx(0.5));
  double prev = step_size(0, 0.2, 0.05);
  for (long t = 1; t <= 10000; ++t) {
    const double cur = step_size(t, 0.2, 0.05);
    CHECK(cur > 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("multiplier updates clip into range") {
  MultiplierState state = MultiplierState::zeros(1, 1);
  state.rho = 1.0;

  ConstraintResiduals res;
  res.sensing = VectorXd::Constant(1, 0.5);
  res.sinr = VectorXd::Zero(1);
  MultiplierState next = update_multipliers(state, res);
  CHECK(next.lambda[0] == doctest::Approx(0.5));

  state.lambda[0] = 100.0;
  next = update_multipliers(state, res);
  CHECK(next.lambda[0] == 100.0);  // upper clip

  state.lambda[0] = 2.0;
  res.sensing[0] = -5.0;
  next = update_multipliers(state, res);
  CHECK(next.lambda[0] == 0.0);  // lower clip
}

TEST_CASE("penalty growth only on stalled violation") {
  MultiplierState state = MultiplierState::zeros(1, 1);
  state.rho = 1.0;
  MultiplierState shrunk = update_penalty(state, 0.5, 1.0);
  CHECK(shrunk.rho == 1.0);
  MultiplierState stalled = update_penalty(state, 0.95, 1.0);
  CHECK(stalled.rho == 2.0);
  state.rho = 1e6;
  MultiplierState capped = update_penalty(state, 1.0, 1.0);
  CHECK(capped.rho == 1e6);
}

TEST_CASE("inner loop returns immediately at a stationary point") {
  std::mt19937_64 rng(48);
  const auto problem = test_util::synthetic_problem(5, 1, 0, rng, 1e-2, 2.0);
  // Matched filter on the sphere maximizes |hhat^H v|; zero slack.
  MatrixXcd point(6, 1);
  point.col(0) = problem.channels.lifted_users.col(0).normalized();
  const FpState fp = update_mu(point, problem.channels, 1e-2);
  const MultiplierState mult = MultiplierState::zeros(0, 1);
  SolverOptions opts;
  opts.method = Method::kSteepestDescent;
  std::mt19937_64 solver_rng(1);
  const InnerResult result =
      inner_minimize(point, fp, mult, problem.channels, problem.cfg, opts,
                     1e-6, solver_rng);
  CHECK(result.iterations == 0);
  CHECK(result.final_grad_norm <= 1e-6);
}

TEST_CASE("steepest descent reaches the matched-filter optimum") {
  std::mt19937_64 rng(49);
  const double noise = 1e-3;
  const auto problem = test_util::synthetic_problem(5, 1, 0, rng, noise, 2.0);
  const double h2 = problem.channels.users.col(0).squaredNorm();
  const double capacity = std::log2(1.0 + problem.cfg.max_power * h2 / noise);

  MatrixXcd point = manifold::random_point(6, 1, rng);
  MultiplierState mult = MultiplierState::zeros(0, 1);
  SolverOptions opts;
  opts.method = Method::kSteepestDescent;
  opts.max_inner_iterations = 2000;
  std::mt19937_64 solver_rng(2);

  std::vector<double> lagrangian_path;
  // A few FP rounds close the gap between the surrogate and the rate.
  FpState fp;
  for (int round = 0; round < 8; ++round) {
    fp = update_mu(point, problem.channels, noise);
    const InnerObserver observer = [&](const MatrixXcd& pt, long, double,
                                       double) {
      lagrangian_path.push_back(
          augmented_lagrangian(pt, fp, mult, problem.channels, problem.cfg));
    };
    point = inner_minimize(point, fp, mult, problem.channels, problem.cfg,
                           opts, 1e-8, solver_rng, observer)
                .point;
    // Within one inner loop the Lagrangian never increases.
    for (size_t i = 1; i < lagrangian_path.size(); ++i) {
      CHECK(lagrangian_path[i] <=
            lagrangian_path[i - 1] + 1e-9 * std::abs(lagrangian_path[i - 1]));
    }
    lagrangian_path.clear();
  }

  const double rate = sum_rate(point, problem.channels.lifted_users, noise);
  CHECK(rate >= 0.99 * capacity);
}

TEST_CASE("solve matches the single-user closed form") {
  std::mt19937_64 rng(50);
  const double noise = 1e-3;
  const auto problem = test_util::synthetic_problem(9, 1, 0, rng, noise, 1.5);
  const double h2 = problem.channels.users.col(0).squaredNorm();
  const double capacity = std::log2(1.0 + problem.cfg.max_power * h2 / noise);

  for (const Method method :
       {Method::kSteepestDescent, Method::kConjugateGradient,
        Method::kStochasticGradient}) {
    SolverOptions opts;
    opts.method = method;
    opts.rng_seed = 3;
    const SolveResult result = solve(problem.channels, problem.cfg, opts);
    INFO("method ", method_name(method), " rate ", result.sum_rate, " cap ",
         capacity);
    CHECK(result.sum_rate >= 0.99 * capacity);
    CHECK(result.feasible);
  }
}

TEST_CASE("solve is deterministic for a fixed seed") {
  std::mt19937_64 rng(51);
  const auto problem = test_util::synthetic_problem(7, 2, 1, rng, 1e-2, 1.0);
  SolverOptions opts;
  opts.max_fp_iterations = 4;
  opts.max_inner_iterations = 120;
  opts.rng_seed = 11;
  const SolveResult a = solve(problem.channels, problem.cfg, opts);
  const SolveResult b = solve(problem.channels, problem.cfg, opts);
  CHECK(a.sum_rate == b.sum_rate);
  CHECK((a.beamformer - b.beamformer).norm() == 0.0);
  CHECK(a.inner_iterations == b.inner_iterations);
}

TEST_CASE("relaxing all constraints can only help the sum rate") {
  std::mt19937_64 rng(52);
  auto problem = test_util::synthetic_problem(7, 2, 2, rng, 1e-2, 1.0);
  // Modest but active thresholds for the constrained run.
  const MatrixXcd probe = manifold::random_point(8, 4, rng);
  for (int n = 0; n < 2; ++n) {
    problem.cfg.beampattern_thresholds[n] =
        0.3 * problem.cfg.max_power *
        problem.channels.targets.col(n).squaredNorm();
  }
  problem.cfg.rate_thresholds = VectorXd::Constant(2, 1.0);

  SolverOptions opts;
  opts.method = Method::kSteepestDescent;
  opts.rng_seed = 4;
  const SolveResult constrained = solve(problem.channels, problem.cfg, opts);

  auto relaxed_cfg = problem.cfg;
  relaxed_cfg.beampattern_thresholds.setZero();
  relaxed_cfg.rate_thresholds.setZero();
  const SolveResult relaxed = solve(problem.channels, relaxed_cfg, opts);

  CHECK(relaxed.feasible);
  CHECK(relaxed.sum_rate >= constrained.sum_rate - 1e-6);
}

TEST_CASE("achieved SINRs are invariant to a common power rescale") {
  std::mt19937_64 rng(53);
  const auto base = test_util::synthetic_problem(6, 2, 1, rng, 1e-2, 1.0);
  auto scaled = base;
  const double factor = 100.0;
  scaled.cfg.noise_power *= factor;
  scaled.channels = make_channel_set(std::sqrt(factor) * base.channels.users,
                                     std::sqrt(factor) * base.channels.targets,
                                     base.cfg.max_power);
  scaled.cfg.beampattern_thresholds *= factor;

  SolverOptions opts;
  opts.method = Method::kSteepestDescent;
  opts.max_fp_iterations = 6;
  opts.rng_seed = 9;
  const SolveResult a = solve(base.channels, base.cfg, opts);
  const SolveResult b = solve(scaled.channels, scaled.cfg, opts);
  for (int k = 0; k < 2; ++k) {
    CHECK(rel_err(a.user_sinr[k], b.user_sinr[k]) <= 1e-6);
  }
}

TEST_CASE("solver option validation") {
  SolverOptions opts;
  CHECK_NOTHROW(opts.validate());
  SolverOptions bad = opts;
  bad.batch_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = opts;
  bad.alpha0 = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = opts;
  bad.eps_final = 1.0;  // above eps_initial
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("trace rows are strictly increasing and labeled") {
  std::mt19937_64 rng(54);
  const auto problem = test_util::synthetic_problem(5, 1, 1, rng, 1e-2, 1.0);
  SolverOptions opts;
  opts.max_fp_iterations = 3;
  opts.max_inner_iterations = 50;
  const SolveResult result = solve(problem.channels, problem.cfg, opts);
  REQUIRE(!result.trace.empty());
  CHECK(result.trace[0].phase == "fp_round 0");
  for (size_t i = 1; i < result.trace.size(); ++i) {
    CHECK(result.trace[i].iter > result.trace[i - 1].iter);
  }
}
