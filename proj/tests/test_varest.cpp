#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "seqinv/model.hpp"
#include "seqinv/rng.hpp"
#include "seqinv/spectral.hpp"
#include "seqinv/varest.hpp"

using namespace seqinv;

TEST_CASE("sample stats basics") {
  ReplicatedObservations rep;
  rep.n = 2;
  rep.m = 2;
  rep.y = {5.0, 5.0, 0.0, 2.0};
  const auto st = sample_stats(rep);
  CHECK(st.mean[0] == 5.0);
  CHECK(st.var[0] == 0.0);
  CHECK(st.mean[1] == 1.0);
  CHECK(st.var[1] == doctest::Approx(2.0).epsilon(1e-15));

  ReplicatedObservations bad;
  bad.n = 1;
  bad.m = 1;
  bad.y = {1.0};
  CHECK_THROWS_AS(sample_stats(bad), std::invalid_argument);
}

TEST_CASE("sample mean and variance are uncorrelated under Gaussian noise") {
  const auto problem = volterra_problem(1, 0.0, 2.0);
  const auto truth = smooth_truth(1);
  const std::size_t experiments = 10000, m = 4;
  std::vector<double> means(experiments), vars(experiments);
  for (std::size_t e = 0; e < experiments; ++e) {
    const auto rep = simulate_replicated(problem, truth, 1.0, m, 5000 + e);
    const auto st = sample_stats(rep);
    means[e] = st.mean[0];
    vars[e] = st.var[0];
  }
  const auto mm = oracles::mean_var(means);
  const auto vv = oracles::mean_var(vars);
  double cov = 0.0;
  for (std::size_t e = 0; e < experiments; ++e)
    cov += (means[e] - mm.mean) * (vars[e] - vv.mean);
  cov /= experiments - 1;
  const double corr = cov / std::sqrt(mm.var * vv.var);
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(experiments)));
}

TEST_CASE("truncated estimator fields") {
  const std::vector<double> s2{10.0, 0.05, 0.1, 0.02};
  const auto est = truncated_estimator(s2, 2, 0.1, 1.0, 50);
  CHECK(est.hat[0] == 10.0);
  CHECK(est.hat[1] == 0.05);
  CHECK(est.hat[2] == 0.0);   // beyond M
  CHECK(est.hat[3] == 0.0);
  CHECK(est.tilde[0] == 10.0);            // max picks the larger
  CHECK(est.tilde[1] == 0.1);             // floored
  CHECK(est.tilde[2] == 0.1);             // floor beyond M
  CHECK(est.tilde[3] == 0.1);

  // Tie resolves to the common value.
  const std::vector<double> tie{0.1};
  const auto t = truncated_estimator(tie, 1, 0.1, 1.0, 50);
  CHECK(t.tilde[0] == 0.1);

  CHECK_THROWS_AS(truncated_estimator(s2, -1, 0.1, 1.0, 50),
                  std::invalid_argument);
  CHECK_THROWS_AS(truncated_estimator(s2, 2, 0.0, 1.0, 50),
                  std::invalid_argument);
}

TEST_CASE("floor invariant on random inputs") {
  std::size_t cases = 0;
  for (std::uint64_t inst = 0; inst < 25; ++inst) {
    std::vector<double> s2(40);
    for (std::size_t j = 0; j < s2.size(); ++j)
      s2[j] = 2.0 * rng::uniform(inst, 41, j, 0);
    const double eps_sigma = 0.01 + rng::uniform(inst, 41, 99, 0);
    const double c0 = 0.5 + rng::uniform(inst, 41, 98, 0);
    const long M = static_cast<long>(rng::key(inst, 41, 97, 0) % 41);
    const auto est = truncated_estimator(s2, M, eps_sigma, c0, 10);
    for (std::size_t j = 0; j < s2.size(); ++j) {
      CHECK(est.tilde[j] >= c0 * eps_sigma);
      if (est.hat[j] >= c0 * eps_sigma) CHECK(est.tilde[j] == est.hat[j]);
      if (static_cast<long>(j) >= M) CHECK(est.tilde[j] == c0 * eps_sigma);
      ++cases;
    }
  }
  CHECK(cases == 1000);
}

TEST_CASE("minimal truncation level") {
  // All below the threshold: M = 0.
  const auto tiny = power_law_noise(-1.0, 0.1, 20);
  CHECK(min_truncation(tiny, 1.0, 1.0) == 0);

  // Scan vs closed form on sigma_i = 2 i^-1 with c0 eps_sigma = 0.04.
  const auto sigma = power_law_noise(-1.0, 2.0, 100);
  const long scan = min_truncation(sigma, 0.04, 1.0);
  CHECK(scan == 9);
  CHECK(min_truncation_power_law(-1.0, 2.0, 0.04, 1.0) == scan);

  // Agreement holds across a grid of thresholds.
  for (double es : {0.002, 0.013, 0.09, 0.5, 3.0}) {
    const auto big = power_law_noise(-0.75, 2.0, 4000);
    CHECK(min_truncation(big, es, 1.0) ==
          min_truncation_power_law(-0.75, 2.0, es, 1.0));
  }

  // Non-increasing in eps_sigma.
  long prev = 1000000;
  for (double es : {0.01, 0.04, 0.16, 1.0}) {
    const long m = min_truncation(sigma, es, 1.0);
    CHECK(m <= prev);
    prev = m;
  }

  // Increasing noise never falls below the threshold: no finite level.
  const auto rising = power_law_noise(0.5, 2.0, 50);
  CHECK_THROWS(min_truncation(rising, 1.0, 1.0));
  CHECK_THROWS(min_truncation_power_law(0.5, 2.0, 1.0, 1.0));
}

TEST_CASE("chi-square tail thresholds") {
  const auto zero = chi_square_tail(9, 1.0, 0.0);
  CHECK(zero.upper == 0.0);
  CHECK(zero.lower == 0.0);
  CHECK(zero.bound == 1.0);

  const auto t = chi_square_tail(9, 1.0, 1.0);
  CHECK(t.upper == doctest::Approx(8.0).epsilon(1e-14));  // 2*3*1 + 2
  CHECK(t.lower == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(t.bound == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  const std::vector<double> bad{1.0, -0.5};
  CHECK_THROWS_AS(chi_square_tail(bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(chi_square_tail(9, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("chi-square tail bound holds empirically") {
  const std::size_t draws = 100000;
  const std::vector<double> a{0.5, 1.0, 1.0, 2.0, 0.25, 1.5, 1.0, 0.75};
  for (double x : {0.5, 1.0, 2.0}) {
    const auto t = chi_square_tail(a, x);
    std::size_t above = 0, below = 0;
    for (std::size_t r = 0; r < draws; ++r) {
      double z = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double g = rng::normal(2024, 51, r, i);
        z += a[i] * (g * g - 1.0);
      }
      if (z >= t.upper) ++above;
      if (z <= -t.lower) ++below;
    }
    const double se = std::sqrt(t.bound * (1.0 - t.bound) / draws);
    CHECK(static_cast<double>(above) / draws <= t.bound + 3.0 * se);
    CHECK(static_cast<double>(below) / draws <= t.bound + 3.0 * se);
  }
}

TEST_CASE("consistency bound: values, clamping, monotonicity") {
  // (m=1e4, M=50, c0 eps_sigma/c_sigma = 0.1)
  const auto b = consistency_bound(10000, 50, 0.1, 1.0, 1.0);
  CHECK(b.condition_ok);
  CHECK(b.bound ==
        doctest::Approx(1.0 - 100.0 * std::exp(-9999.0 * 0.01 / 6.0)).epsilon(1e-12));

  // m -> infinity drives the bound to 1.
  CHECK(consistency_bound(100000000, 50, 0.1, 1.0, 1.0).bound ==
        doctest::Approx(1.0));

  // Small m clamps at 0 instead of going negative.
  CHECK(consistency_bound(3, 1000, 0.01, 1.0, 1.0).bound == 0.0);

  // Condition flag flips when c0 eps_sigma / c_sigma > 1/2.
  CHECK_FALSE(consistency_bound(100, 5, 2.0, 1.0, 1.0).condition_ok);

  // Monotone increasing in m, decreasing in M.
  double prev = -1.0;
  for (std::size_t m : {100ul, 1000ul, 10000ul}) {
    const double v = consistency_bound(m, 20, 0.2, 1.0, 1.0).bound;
    CHECK(v >= prev);
    prev = v;
  }
  prev = 2.0;
  for (long M : {5l, 50l, 500l}) {
    const double v = consistency_bound(2000, M, 0.1, 1.0, 1.0).bound;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("consistency bound is honoured by simulation") {
  // m = 500, sigma_i = 2 i^-1, explicit M and a floor wide enough that the
  // bound is informative.
  const std::size_t n = 40, m = 500;
  const auto problem = volterra_problem(n, -1.0, 2.0);
  const auto truth = smooth_truth(n);
  const long M = 3;
  const double c0 = 1.0;
  const double c_sigma = problem.sigma[0] * problem.sigma[0];  // sup sigma_i^2
  const double eps_sigma = 0.45 * c_sigma;                     // condition holds
  // M must dominate M_sigma for the tail to be certain.
  CHECK(min_truncation(problem.sigma, eps_sigma, c0) <= M);

  const auto bound = consistency_bound(m, M, eps_sigma, c0, c_sigma);
  CHECK(bound.condition_ok);
  const std::size_t experiments = 1000;
  std::size_t hits = 0;
  for (std::size_t e = 0; e < experiments; ++e) {
    const auto rep = simulate_replicated(problem, truth, 1.0, m, 333 + e);
    const auto st = sample_stats(rep);
    const auto est = truncated_estimator(st.var, M, eps_sigma, c0, m);
    bool ok = true;
    for (std::size_t j = 0; j < n; ++j) {
      const double sigma2 = problem.sigma[j] * problem.sigma[j];
      if (std::abs(est.hat[j] - sigma2) > c0 * eps_sigma) { ok = false; break; }
    }
    if (ok) ++hits;
  }
  const double p_hat = static_cast<double>(hits) / experiments;
  const double se = std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-6) / experiments);
  CHECK(p_hat >= bound.bound - 3.0 * se);
}

TEST_CASE("truncation planner") {
  const auto plan = truncation_planner(1000000, -1.0, 2.0, 1.0);
  CHECK(plan.m_eps2 > 1.0);
  CHECK(plan.logM_over_m_eps2 < 1.0);
  CHECK(plan.ok);

  // M non-decreasing in m.
  long prev = 0;
  for (std::size_t m : {100ul, 10000ul, 1000000ul, 100000000ul}) {
    const auto p = truncation_planner(m, -1.0, 2.0, 1.0);
    CHECK(p.M >= prev);
    prev = p.M;
  }

  // Planner output covers the tail: M >= M_sigma(eps_sigma).
  for (std::size_t m : {500ul, 10000ul, 1000000ul}) {
    for (double gamma : {-0.5, -1.0, -2.0}) {
      const auto p = truncation_planner(m, gamma, 2.0, 1.0);
      const auto sigma = power_law_noise(gamma, 2.0, 5000);
      CHECK(min_truncation(sigma, p.eps_sigma, 1.0) <= p.M);
    }
  }

  CHECK_THROWS(truncation_planner(100, 0.5, 2.0, 1.0));
}

TEST_CASE("chi-square head/tail exponent gap is nonnegative") {
  // g(y) = y^2/2 - y - 1 + sqrt(1+2y) >= 0 for y >= 0.
  for (std::size_t j = 0; j <= 1000; ++j) {
    const double y = 10.0 * static_cast<double>(j) / 1000.0;
    const double g = y * y / 2.0 - y - 1.0 + std::sqrt(1.0 + 2.0 * y);
    CHECK(g >= -1e-12);
  }
}
