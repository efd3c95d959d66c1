#include "seqinv/posterior.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "seqinv/kernels.hpp"
#include "seqinv/rng.hpp"

namespace seqinv {

PosteriorSummary conjugate_posterior_seq(std::span<const double> y,
                                         std::span<const double> k,
                                         std::span<const double> lambda,
                                         std::span<const double> sigma2,
                                         double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("conjugate_posterior: eps must be > 0");
  const std::size_t n = y.size();
  if (k.size() != n || lambda.size() != n || sigma2.size() != n)
    throw std::invalid_argument("conjugate_posterior: length mismatch");
  PosteriorSummary s;
  s.eps = eps;
  s.mean.resize(n);
  s.variance.resize(n);
  kernels::posterior_moments(y, k, lambda, sigma2, eps * eps, s.mean,
                             s.variance);
  return s;
}

PosteriorSummary conjugate_posterior(const SpectralProblem& problem,
                                     const PriorSpec& prior, double eps,
                                     const Observations& y) {
  problem.validate();
  if (y.n() != problem.n())
    throw std::invalid_argument("conjugate_posterior: observation length mismatch");
  std::vector<double> sigma2(problem.n());
  for (std::size_t j = 0; j < problem.n(); ++j)
    sigma2[j] = problem.sigma[j] * problem.sigma[j];
  return conjugate_posterior_seq(y.y, problem.k, prior.lambdas(problem.n()),
                                 sigma2, eps);
}

std::vector<double> reconstruct(std::span<const double> coeffs,
                                const BasisCache& basis) {
  if (basis.n() != coeffs.size())
    throw std::invalid_argument("reconstruct: basis/coeff length mismatch");
  std::vector<double> out(basis.grid_size());
  for (std::size_t j = 0; j < basis.grid_size(); ++j)
    out[j] = kernels::dot(coeffs, basis.row(j));
  return out;
}

std::vector<double> reconstruct(std::span<const double> coeffs,
                                std::span<const double> x_grid) {
  for (double x : x_grid)
    if (x < 0.0 || x > 1.0)
      throw std::invalid_argument("reconstruct: grid point outside [0,1]");
  BasisCache basis(BasisKind::input, x_grid, coeffs.size());
  return reconstruct(coeffs, basis);
}

DrawMatrix sample_posterior(const PosteriorSummary& summary, std::size_t draws,
                            std::uint64_t seed) {
  if (draws == 0)
    throw std::invalid_argument("sample_posterior: draws must be >= 1");
  DrawMatrix out;
  out.draws = draws;
  out.n = summary.n();
  out.values.resize(draws * out.n);
  for (std::size_t d = 0; d < draws; ++d) {
    double* row = out.values.data() + d * out.n;
    for (std::size_t i = 0; i < out.n; ++i) {
      const double v = summary.variance[i];
      row[i] = summary.mean[i] +
               (v > 0.0 ? std::sqrt(v) *
                              rng::normal(seed, rng::kPosteriorDraw, d + 1, i + 1)
                        : 0.0);
    }
  }
  return out;
}

Band credible_bands(const PosteriorSummary& summary, const BasisCache& basis,
                    double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("credible_bands: level must lie in (0,1)");
  if (basis.n() != summary.n())
    throw std::invalid_argument("credible_bands: basis/posterior length mismatch");
  const double z = normal_quantile(0.5 * (1.0 + level));
  Band band;
  band.x = basis.grid();
  const std::size_t g = basis.grid_size();
  band.mean.resize(g);
  band.lower.resize(g);
  band.upper.resize(g);
  for (std::size_t j = 0; j < g; ++j) {
    const double m = kernels::dot(summary.mean, basis.row(j));
    const double v = kernels::weighted_dot_sq(summary.variance, basis.row(j));
    const double half = z * std::sqrt(std::max(v, 0.0));
    band.mean[j] = m;
    band.lower[j] = m - half;
    band.upper[j] = m + half;
  }
  return band;
}

Band credible_bands(const PosteriorSummary& summary,
                    std::span<const double> x_grid, double level) {
  for (double x : x_grid)
    if (x < 0.0 || x > 1.0)
      throw std::invalid_argument("credible_bands: grid point outside [0,1]");
  BasisCache basis(BasisKind::input, x_grid, summary.n());
  return credible_bands(summary, basis, level);
}

double posterior_l2_risk(const PosteriorSummary& summary,
                         const TruthSpec& truth) {
  if (summary.n() != truth.n())
    throw std::invalid_argument("posterior_l2_risk: length mismatch");
  return kernels::l2_risk(summary.mean, summary.variance, truth.coeffs);
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("normal_quantile: prob must lie in (0,1)");
  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (prob < plow) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - plow) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the erfc-based CDF.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
  const double u =
      e * std::numbers::sqrt2 * std::sqrt(std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace seqinv
