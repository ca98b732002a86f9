#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sgalm/manifold.hpp"
#include "sgalm/oracle.hpp"

using namespace sgalm;
using test_util::rel_err;

TEST_CASE("finite differences recover analytic gradients of toy functionals") {
  std::mt19937_64 rng(61);
  const MatrixXcd X = test_util::random_cmatrix(4, 3, rng);

  SUBCASE("squared Frobenius norm") {
    const MatrixXcd fd = oracle::finite_difference_gradient(
        [](const MatrixXcd& m) { return m.squaredNorm(); }, X);
    CHECK((fd - 2.0 * X).norm() <= 1e-6 * X.norm());
  }

  SUBCASE("real trace pairing") {
    const MatrixXcd A = test_util::random_cmatrix(4, 3, rng);
    const MatrixXcd fd = oracle::finite_difference_gradient(
        [&](const MatrixXcd& m) {
          return m.cwiseProduct(A.conjugate()).sum().real();
        },
        X);
    CHECK((fd - A).norm() <= 1e-6 * A.norm());
  }

  SUBCASE("threaded evaluation gives identical results") {
    const auto fn = [](const MatrixXcd& m) { return m.squaredNorm(); };
    const MatrixXcd serial = oracle::finite_difference_gradient(fn, X);
    oracle::FdSpec spec;
    spec.num_threads = 2;
    const MatrixXcd parallel =
        oracle::finite_difference_gradient(fn, X, spec);
    CHECK((serial - parallel).norm() == 0.0);
  }

  SUBCASE("non-finite evaluations are reported") {
    CHECK_THROWS_AS(oracle::finite_difference_gradient(
                        [](const MatrixXcd&) {
                          return std::numeric_limits<double>::infinity();
                        },
                        X),
                    std::runtime_error);
  }
}

TEST_CASE("brute-force metrics agree with the metrics module") {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 500; ++trial) {
    const int M = 2 + static_cast<int>(rng() % 7);
    const int K = 1 + static_cast<int>(rng() % 3);
    const int N = static_cast<int>(rng() % 3);
    const MatrixXcd H = test_util::random_cmatrix(M, K, rng);
    const MatrixXcd G = test_util::random_cmatrix(M, N, rng);
    const MatrixXcd V = test_util::random_cmatrix(M, K + N, rng);
    const double noise = 1e-3 + 0.1 * (trial % 10);

    const auto brute = oracle::bruteforce_metrics(V, H, G, noise);
    for (int k = 0; k < K; ++k) {
      CHECK(rel_err(brute.sinr[k], sinr(V, H.col(k), k, noise)) <= 1e-10);
    }
    for (int n = 0; n < N; ++n) {
      CHECK(rel_err(brute.gain[n], beampattern_gain(V, G.col(n))) <= 1e-10);
    }
    CHECK(rel_err(brute.power, transmit_power(V)) <= 1e-10);
  }
}

TEST_CASE("brute-force metrics edge cases") {
  std::mt19937_64 rng(63);
  const MatrixXcd H = test_util::random_cmatrix(5, 1, rng);
  const MatrixXcd G = test_util::random_cmatrix(5, 1, rng);

  const auto zeros =
      oracle::bruteforce_metrics(MatrixXcd::Zero(5, 2), H, G, 0.1);
  CHECK(zeros.sinr[0] == 0.0);
  CHECK(zeros.gain[0] == 0.0);
  CHECK(zeros.power == 0.0);

  const MatrixXcd w = test_util::random_cmatrix(5, 1, rng);
  const auto single = oracle::bruteforce_metrics(w, H, G, 0.1);
  CHECK(rel_err(single.gain[0], std::norm(G.col(0).dot(w.col(0)))) <= 1e-12);

  CHECK_THROWS_AS(
      oracle::bruteforce_metrics(MatrixXcd::Zero(4, 2), H, G, 0.1),
      std::invalid_argument);
}

TEST_CASE("random search on an unconstrained tiny instance") {
  std::mt19937_64 rng(64);
  const double noise = 1e-2;
  const auto problem = test_util::synthetic_problem(2, 1, 0, rng, noise, 1.0);
  const double capacity = std::log2(
      1.0 + problem.cfg.max_power *
                problem.channels.users.col(0).squaredNorm() / noise);

  std::mt19937_64 search_rng(1);
  const auto best = oracle::random_search_baseline(problem.channels,
                                                   problem.cfg, 100000,
                                                   search_rng);
  REQUIRE(best.found);
  INFO("best ", best.sum_rate, " capacity ", capacity);
  CHECK(best.sum_rate >= 0.9 * capacity);
  CHECK(best.sum_rate <= capacity + 1e-9);
}

TEST_CASE("random search respects constraints and budget monotonicity") {
  std::mt19937_64 rng(65);
  auto problem = test_util::synthetic_problem(3, 1, 1, rng, 1e-2, 1.0);

  SUBCASE("impossible threshold yields no feasible sample") {
    problem.cfg.beampattern_thresholds[0] =
        10.0 * problem.cfg.max_power *
        problem.channels.targets.col(0).squaredNorm();
    std::mt19937_64 search_rng(2);
    const auto best = oracle::random_search_baseline(problem.channels,
                                                     problem.cfg, 1,
                                                     search_rng);
    CHECK_FALSE(best.found);
  }

  SUBCASE("doubling the budget never hurts") {
    problem.cfg.beampattern_thresholds[0] =
        0.05 * problem.cfg.max_power *
        problem.channels.targets.col(0).squaredNorm();
    std::mt19937_64 rng_a(3), rng_b(3);
    const auto small = oracle::random_search_baseline(problem.channels,
                                                      problem.cfg, 2000,
                                                      rng_a);
    const auto large = oracle::random_search_baseline(problem.channels,
                                                      problem.cfg, 4000,
                                                      rng_b);
    if (small.found) {
      REQUIRE(large.found);
      CHECK(large.sum_rate >= small.sum_rate);
    }
  }

  SUBCASE("invalid budget") {
    std::mt19937_64 search_rng(4);
    CHECK_THROWS_AS(oracle::random_search_baseline(problem.channels,
                                                   problem.cfg, 0, search_rng),
                    std::invalid_argument);
  }
}
