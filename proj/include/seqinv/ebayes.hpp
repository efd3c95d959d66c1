#pragma once

#include <span>
#include <vector>

#include "seqinv/model.hpp"
#include "seqinv/posterior.hpp"
#include "seqinv/spectral.hpp"

namespace seqinv {

// Marginal-likelihood estimation of the prior scale. Throughout this module
// tau is the variance-scale parameter: lambda_i = tau * i^(-2 alpha - 1),
// so the sd-scale of PriorSpec is sqrt(tau).
struct EbResult {
  double tau_hat = 0.0;
  double objective = 0.0;  // q(tau_hat)
  double lo = 0.0, hi = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct EbSearch {
  double lo = 1e-8;
  double hi = 1e8;
  double rel_tol = 1e-6;
  int max_iter = 200;
};

// q(tau) = sum_i [ y_i^2 / (k_i^2 l0_i tau + eps^2 sigma_i^2)
//                  + log(k_i^2 l0_i tau + eps^2 sigma_i^2) ],
// l0_i = i^(-2 alpha - 1). Compensated summation throughout.
double marginal_objective(double tau, std::span<const double> y,
                          const SpectralProblem& problem, double alpha,
                          double eps);

// Analytic q'(tau).
double marginal_gradient(double tau, std::span<const double> y,
                         const SpectralProblem& problem, double alpha,
                         double eps);

// Variants with an explicit prior-shape sequence l0 (q depends on lambda
// only through the product l0 * tau).
double marginal_objective(double tau, std::span<const double> y,
                          const SpectralProblem& problem,
                          std::span<const double> l0, double eps);
double marginal_gradient(double tau, std::span<const double> y,
                         const SpectralProblem& problem,
                         std::span<const double> l0, double eps);

// Minimiser of q over [lo, hi]: Brent's golden-section/parabolic hybrid on
// log tau. converged is false when the minimum sits at a bracket endpoint.
EbResult eb_tau(std::span<const double> y, const SpectralProblem& problem,
                double alpha, double eps, const EbSearch& search = {});
EbResult eb_tau(std::span<const double> y, const SpectralProblem& problem,
                std::span<const double> l0, double eps,
                const EbSearch& search = {});

// Predicted exponent e with tau_hat ~ eps^e:
//   -4(alpha-beta)/(1+2p+2gamma+2beta)   if alpha + 1/2 >= beta
//   1/(1+p+gamma+alpha)                  otherwise.
// Validity flags mirror the conditions under which the prediction holds;
// the formula is returned regardless.
struct EbAsymptotic {
  double exponent = 0.0;
  bool smooth_branch = false;   // alpha + 1/2 >= beta
  bool alpha_cond = false;      // alpha > (-p-gamma-1/2)_+
  bool sum_cond = false;        // beta + alpha + 1 + 2(p+gamma) > 0
};
EbAsymptotic eb_tau_asymptotic(double alpha, double beta, double p,
                               double gamma);

// eb_tau followed by the conjugate posterior with lambda_i = tau_hat i^(-2a-1).
PosteriorSummary eb_posterior(std::span<const double> y,
                              const SpectralProblem& problem, double alpha,
                              double eps, EbResult* result = nullptr,
                              const EbSearch& search = {});

}  // namespace seqinv
