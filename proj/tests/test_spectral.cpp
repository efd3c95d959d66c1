#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "seqinv/spectral.hpp"

using namespace seqinv;

TEST_CASE("volterra singular values") {
  const auto k = volterra_spectrum_k(3);
  CHECK(k[0] == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(k[0] == doctest::Approx(0.636620).epsilon(1e-6));
  CHECK(k[2] == doctest::Approx(1.0 / (2.5 * std::numbers::pi)).epsilon(1e-12));
  CHECK(k[2] == doctest::Approx(0.127324).epsilon(1e-5));
  CHECK_THROWS_AS(volterra_spectrum_k(0), std::invalid_argument);
}

TEST_CASE("volterra decay: strictly decreasing and i k_i in [1/pi, 2/pi]") {
  const auto k = volterra_spectrum_k(500);
  for (std::size_t j = 0; j < k.size(); ++j) {
    const double ik = static_cast<double>(j + 1) * k[j];
    CHECK(ik >= 1.0 / std::numbers::pi);
    CHECK(ik <= 2.0 / std::numbers::pi + 1e-15);
    if (j > 0) CHECK(k[j] < k[j - 1]);
  }
  // i k_i -> 1/pi
  CHECK(500.0 * k[499] == doctest::Approx(1.0 / std::numbers::pi).epsilon(2e-3));
}

TEST_CASE("basis point values and domain check") {
  CHECK(basis_eval(BasisKind::output, 1, 0.0) == 0.0);
  CHECK(basis_eval(BasisKind::input, 1, 0.0) ==
        doctest::Approx(std::numbers::sqrt2).epsilon(1e-12));
  CHECK_THROWS_AS(basis_eval(BasisKind::input, 1, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(basis_eval(BasisKind::input, 1, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(basis_eval(BasisKind::input, 0, 0.5), std::invalid_argument);
}

TEST_CASE("both bases are orthonormal under quadrature") {
  for (const BasisKind kind : {BasisKind::input, BasisKind::output}) {
    for (std::size_t i = 1; i <= 20; ++i) {
      for (std::size_t j = i; j <= 20; ++j) {
        const double integral = oracles::simpson01(
            [&](double x) {
              return basis_eval(kind, i, x) * basis_eval(kind, j, x);
            },
            20000);
        const double expected = i == j ? 1.0 : 0.0;
        CHECK(integral == doctest::Approx(expected).epsilon(1e-6));
        CHECK(std::abs(integral - expected) < 1e-6);
      }
    }
  }
}

TEST_CASE("power-law noise values") {
  const auto s = power_law_noise(0.5, 2.0, 4);
  CHECK(s[3] == doctest::Approx(4.0).epsilon(1e-14));
  const auto flat = power_law_noise(0.0, 3.25, 10);
  for (double v : flat) CHECK(v == 3.25);
  const auto dec = power_law_noise(-2.0, 2.0, 10);
  CHECK(dec[9] == doctest::Approx(0.02).epsilon(1e-14));
  CHECK_THROWS_AS(power_law_noise(0.5, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(power_law_noise(0.5, -1.0, 4), std::invalid_argument);
}

TEST_CASE("power-law noise satisfies the sandwich with c2 = scale") {
  for (double gamma : {0.5, 0.0, -1.0, -2.0}) {
    for (double scale : {2.0, 1.0, 1.5}) {
      SpectralProblem pr = power_law_problem(200, 1.0, 1.0, gamma, scale);
      CHECK(pr.sigma_sandwich_ok());
    }
  }
}

TEST_CASE("volterra problem passes its own sandwich checks") {
  const auto pr = volterra_problem(300, 0.5, 2.0);
  CHECK(pr.p == 1.0);
  CHECK(pr.c1 == doctest::Approx(std::numbers::pi));
  CHECK(pr.k_sandwich_ok());
  CHECK(pr.sigma_sandwich_ok());
  CHECK_NOTHROW(pr.validate());
}

TEST_CASE("validation rejects broken problems") {
  SpectralProblem pr = volterra_problem(5, 0.5, 2.0);
  pr.sigma.pop_back();
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);
  pr = volterra_problem(5, 0.5, 2.0);
  pr.k[2] = 0.0;
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);
}

TEST_CASE("basis cache matches direct evaluation") {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const BasisCache cache(BasisKind::input, grid, 16);
  for (std::size_t j = 0; j < grid.size(); ++j)
    for (std::size_t i = 1; i <= 16; ++i)
      CHECK(cache.row(j)[i - 1] == basis_eval(BasisKind::input, i, grid[j]));
}
