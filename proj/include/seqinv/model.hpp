#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqinv/spectral.hpp"

namespace seqinv {

// Gaussian prior with eigenvalues lambda_i = tau^2 i^(-1-2 alpha).
// tau is the sd-scale parameter; the empirical Bayes code works with the
// variance-scale tau^2 and converts at the boundary.
struct PriorSpec {
  double alpha = 1.0;
  double tau = 1.0;

  double lambda(std::size_t i) const;            // i >= 1
  std::vector<double> lambdas(std::size_t n) const;
  void validate() const;                          // alpha > 0, tau > 0
};

struct TruthSpec {
  std::vector<double> coeffs;  // mu0_i
  double beta = 1.0;           // claimed smoothness
  double radius = 0.0;         // Sobolev radius A

  std::size_t n() const { return coeffs.size(); }
};

struct Observations {
  std::vector<double> y;
  double eps = 0.0;
  std::uint64_t seed = 0;

  std::size_t n() const { return y.size(); }
};

struct ReplicatedObservations {
  std::vector<double> y;  // row-major: y[(i-1)*m + (j-1)]
  std::size_t n = 0;      // indices
  std::size_t m = 0;      // replicates per index
  double eps0 = 0.0;
  std::uint64_t seed = 0;

  std::span<const double> row(std::size_t i) const {  // i in [0, n)
    return {y.data() + i * m, m};
  }
};

// mu0_i = i^(-beta-1/2) sin(i): a damped-sine truth with prescribed
// smoothness; radius is set to the Sobolev norm of the stored range.
TruthSpec smooth_truth(std::size_t n, double beta = 1.0);

// sqrt(sum_i i^(2 beta) f_i^2) over the stored indices.
double sobolev_norm(std::span<const double> coeffs, double beta);

// Y_i = k_i mu0_i + eps sigma_i xi_i with xi_i = N(0,1) from the counter
// generator; eps = 0 short-circuits to the noiseless means.
Observations simulate(const SpectralProblem& problem, const TruthSpec& truth,
                      double eps, std::uint64_t seed);

// m independent replicates with noise level eps0; their row means follow
// the single-observation model at eps = eps0 / sqrt(m).
ReplicatedObservations simulate_replicated(const SpectralProblem& problem,
                                           const TruthSpec& truth, double eps0,
                                           std::size_t m, std::uint64_t seed);

}  // namespace seqinv
