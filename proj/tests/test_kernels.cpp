#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "seqinv/kernels.hpp"
#include "seqinv/rng.hpp"

using namespace seqinv;

namespace {

struct Inputs {
  std::vector<double> y, k, lambda, sigma2, mu0, y2, g;
  double eps2;
};

Inputs random_inputs(std::size_t n, std::uint64_t seed) {
  Inputs in;
  in.y.resize(n);
  in.k.resize(n);
  in.lambda.resize(n);
  in.sigma2.resize(n);
  in.mu0.resize(n);
  in.y2.resize(n);
  in.g.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double i = static_cast<double>(j + 1);
    in.k[j] = std::pow(i, -1.0 - rng::uniform(seed, 7, j, 0));
    in.lambda[j] = std::pow(i, -2.0 - rng::uniform(seed, 7, j, 1));
    in.sigma2[j] = std::pow(i, 2.0 * rng::uniform(seed, 7, j, 2) - 1.0);
    in.y[j] = rng::normal(seed, 7, j, 3);
    in.mu0[j] = rng::normal(seed, 7, j, 4) * std::pow(i, -1.5);
    in.y2[j] = in.y[j] * in.y[j];
    in.g[j] = in.k[j] * in.k[j] * in.lambda[j];
  }
  in.eps2 = 1e-6;
  return in;
}

}  // namespace

TEST_CASE("scalar and avx2 lanes agree on every kernel") {
  if (!kernels::avx2_available()) {
    MESSAGE("AVX2 not available; lane equivalence not testable on this host");
    return;
  }
  for (std::size_t n : {1ul, 3ul, 4ul, 7ul, 64ul, 501ul, 2000ul}) {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
      const Inputs in = random_inputs(n, seed);
      std::vector<double> m_s(n), v_s(n), m_a(n), v_a(n);
      kernels::scalar_ops.posterior_moments(in.y, in.k, in.lambda, in.sigma2,
                                            in.eps2, m_s, v_s);
      kernels::avx2_ops.posterior_moments(in.y, in.k, in.lambda, in.sigma2,
                                          in.eps2, m_a, v_a);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(m_a[j] == doctest::Approx(m_s[j]).epsilon(1e-13));
        CHECK(v_a[j] == doctest::Approx(v_s[j]).epsilon(1e-13));
      }

      const auto r_s =
          kernels::scalar_ops.risk_terms(in.mu0, in.k, in.lambda, in.sigma2, in.eps2);
      const auto r_a =
          kernels::avx2_ops.risk_terms(in.mu0, in.k, in.lambda, in.sigma2, in.eps2);
      CHECK(r_a.s1 == doctest::Approx(r_s.s1).epsilon(1e-13));
      CHECK(r_a.s2 == doctest::Approx(r_s.s2).epsilon(1e-13));
      CHECK(r_a.s3 == doctest::Approx(r_s.s3).epsilon(1e-13));

      CHECK(kernels::avx2_ops.l2_risk(m_s, v_s, in.mu0) ==
            doctest::Approx(kernels::scalar_ops.l2_risk(m_s, v_s, in.mu0))
                .epsilon(1e-13));

      for (double tau : {1e-4, 0.7, 1.0, 3e3}) {
        const auto q_s =
            kernels::scalar_ops.marginal_terms(in.y2, in.g, in.sigma2, in.eps2, tau);
        const auto q_a =
            kernels::avx2_ops.marginal_terms(in.y2, in.g, in.sigma2, in.eps2, tau);
        CHECK(q_a.ratio_sum == doctest::Approx(q_s.ratio_sum).epsilon(1e-13));
        CHECK(q_a.log_sum == doctest::Approx(q_s.log_sum).epsilon(1e-12));
        const auto d_s = kernels::scalar_ops.gradient_terms(in.y2, in.g,
                                                            in.sigma2, in.eps2, tau);
        const auto d_a = kernels::avx2_ops.gradient_terms(in.y2, in.g,
                                                          in.sigma2, in.eps2, tau);
        CHECK(d_a.data_sum == doctest::Approx(d_s.data_sum).epsilon(1e-13));
        CHECK(d_a.trace_sum == doctest::Approx(d_s.trace_sum).epsilon(1e-13));
      }

      CHECK(kernels::avx2_ops.dot(in.y, in.mu0) ==
            doctest::Approx(kernels::scalar_ops.dot(in.y, in.mu0)).epsilon(1e-13));
      CHECK(kernels::avx2_ops.weighted_dot_sq(in.lambda, in.y) ==
            doctest::Approx(kernels::scalar_ops.weighted_dot_sq(in.lambda, in.y))
                .epsilon(1e-13));
    }
  }
}

TEST_CASE("posterior moments match the naive formula where it is finite") {
  const Inputs in = random_inputs(700, 99);
  std::vector<double> m(700), v(700);
  kernels::posterior_moments(in.y, in.k, in.lambda, in.sigma2, in.eps2, m, v);
  for (std::size_t j = 0; j < 700; ++j) {
    const double d = in.lambda[j] * in.k[j] * in.k[j] + in.eps2 * in.sigma2[j];
    const double m_naive = in.y[j] * in.k[j] * in.lambda[j] / d;
    const double v_naive = in.eps2 * in.sigma2[j] * in.lambda[j] / d;
    if (std::isfinite(m_naive) && d > 0.0) {
      CHECK(m[j] == doctest::Approx(m_naive).epsilon(1e-12));
      CHECK(v[j] == doctest::Approx(v_naive).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate prior and vanishing-noise limits") {
  std::vector<double> y{2.0}, k{1.0}, sigma2{1.0};
  std::vector<double> m(1), v(1);

  std::vector<double> lambda{0.0};
  kernels::posterior_moments(y, k, lambda, sigma2, 1.0, m, v);
  CHECK(m[0] == 0.0);
  CHECK(v[0] == 0.0);

  lambda[0] = 1.0;
  kernels::posterior_moments(y, k, lambda, sigma2, 1e-30, m, v);
  CHECK(m[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(v[0] == doctest::Approx(1e-30).epsilon(1e-9));
}

TEST_CASE("marginal log sum matches plain accumulation") {
  const Inputs in = random_inputs(1234, 5);
  const double tau = 0.37;
  const auto terms = kernels::marginal_terms(in.y2, in.g, in.sigma2, in.eps2, tau);
  double log_sum = 0.0, ratio = 0.0;
  for (std::size_t j = 0; j < in.g.size(); ++j) {
    const double d = in.g[j] * tau + in.eps2 * in.sigma2[j];
    log_sum += std::log(d);
    ratio += in.y2[j] / d;
  }
  CHECK(terms.log_sum == doctest::Approx(log_sum).epsilon(1e-12));
  CHECK(terms.ratio_sum == doctest::Approx(ratio).epsilon(1e-12));
}

TEST_CASE("compensated sums are permutation-stable") {
  const Inputs in = random_inputs(1500, 21);
  std::vector<std::size_t> order(1500);
  std::iota(order.begin(), order.end(), 0u);
  // A fixed shuffle.
  for (std::size_t j = order.size(); j-- > 1;) {
    const std::size_t pick = rng::key(3, 3, j, 0) % (j + 1);
    std::swap(order[j], order[pick]);
  }
  Inputs perm = in;
  for (std::size_t j = 0; j < order.size(); ++j) {
    perm.y2[j] = in.y2[order[j]];
    perm.g[j] = in.g[order[j]];
    perm.sigma2[j] = in.sigma2[order[j]];
  }
  const auto a = kernels::marginal_terms(in.y2, in.g, in.sigma2, in.eps2, 0.9);
  const auto b = kernels::marginal_terms(perm.y2, perm.g, perm.sigma2, in.eps2, 0.9);
  CHECK(b.value() == doctest::Approx(a.value()).epsilon(1e-10));
}

TEST_CASE("force_lane round-trips") {
  kernels::force_lane("scalar");
  CHECK(std::string(kernels::active().name) == "scalar");
  kernels::force_lane("auto");
  if (kernels::avx2_available())
    CHECK(std::string(kernels::active().name) == "avx2");
  CHECK_THROWS(kernels::force_lane("sse9"));
  kernels::force_lane("auto");
}
