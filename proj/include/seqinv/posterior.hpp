#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqinv/model.hpp"
#include "seqinv/spectral.hpp"

namespace seqinv {

// Per-index conjugate Gaussian posterior.
struct PosteriorSummary {
  std::vector<double> mean;
  std::vector<double> variance;
  double eps = 0.0;
  std::size_t n() const { return mean.size(); }
};

struct Band {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

// mean_i = Y_i k_i lambda_i / (lambda_i k_i^2 + eps^2 sigma_i^2)
// var_i  = sigma_i^2 lambda_i / (eps^-2 lambda_i k_i^2 + sigma_i^2)
// lambda_i = 0 is a legal point-mass prior and maps to (0, 0).
PosteriorSummary conjugate_posterior(const SpectralProblem& problem,
                                     const PriorSpec& prior, double eps,
                                     const Observations& y);

// Same posterior with an explicit lambda and/or variance sequence; used by
// the empirical Bayes and plug-in paths.
PosteriorSummary conjugate_posterior_seq(std::span<const double> y,
                                         std::span<const double> k,
                                         std::span<const double> lambda,
                                         std::span<const double> sigma2,
                                         double eps);

// f(x) = sum_i coeffs_i e_i(x) on a grid in [0,1].
std::vector<double> reconstruct(std::span<const double> coeffs,
                                std::span<const double> x_grid);
std::vector<double> reconstruct(std::span<const double> coeffs,
                                const BasisCache& basis);

// Independent N(mean_i, var_i) coefficient draws, row-major draw-by-draw.
struct DrawMatrix {
  std::vector<double> values;  // values[(d)*n + i]
  std::size_t draws = 0;
  std::size_t n = 0;
  std::span<const double> draw(std::size_t d) const {
    return {values.data() + d * n, n};
  }
};
DrawMatrix sample_posterior(const PosteriorSummary& summary, std::size_t draws,
                            std::uint64_t seed);

// Pointwise Gaussian band: at each x the posterior of f(x) is
// N(M(x), V(x)) with M(x) = sum_i mean_i e_i(x), V(x) = sum_i var_i e_i(x)^2;
// band = M(x) +- z sqrt(V(x)), z the (1+level)/2 standard-normal quantile.
Band credible_bands(const PosteriorSummary& summary,
                    std::span<const double> x_grid, double level);
Band credible_bands(const PosteriorSummary& summary, const BasisCache& basis,
                    double level);

// E(||mu - mu0||^2 | Y) = sum_i [var_i + (mean_i - mu0_i)^2].
double posterior_l2_risk(const PosteriorSummary& summary,
                         const TruthSpec& truth);

// Standard-normal quantile (Acklam's rational approximation, refined by one
// Halley step; |rel err| < 1e-15 over (0,1)).
double normal_quantile(double prob);

}  // namespace seqinv
