#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqinv/kernels.hpp"
#include "seqinv/model.hpp"
#include "seqinv/spectral.hpp"

namespace seqinv {

// The cutoff machinery requires sigma_i^2 / (lambda_i k_i^2) to increase;
// non-monotone spectra are handled by the index-set form instead.
struct NonMonotoneRatio : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter combinations the closed-form rates do not cover
// (e.g. gamma <= -p-1/2-alpha).
struct UnsupportedRegime : std::domain_error {
  using std::domain_error::domain_error;
};

enum class Regime { supercritical, critical, subcritical };
const char* regime_name(Regime r);

// gamma vs -p-1/2, critical resolved with relative tolerance 1e-12.
Regime classify_regime(double p, double gamma);

struct RateReport {
  Regime regime = Regime::supercritical;
  double rate = 0.0;      // epsilon-rate value (constants set to 1)
  double exponent = 0.0;  // exponent of eps where applicable, else NaN
  long cutoff = 0;        // i_eps
  std::map<std::string, double> terms;
};

struct IndexSets {
  std::vector<std::uint32_t> i_eps;      // {i : sigma_i^2/(lambda_i k_i^2) > a eps^-2}
  std::vector<std::uint32_t> i_sig;      // {i : sigma_i^2 < a c0 eps_sigma}
  std::vector<std::uint32_t> i_sig_eps;  // {i : c0 eps_sigma/(lambda_i k_i^2) > a eps^-2}
  double a_eps = 1.0;
  double a_sig = 1.0;
  double a_sig_eps = 1.0;
};

// Largest i with sigma_i^2 / k_i^2 <= eps^-2 lambda_i; 0 when none.
long cutoff_index(const SpectralProblem& problem, const PriorSpec& prior,
                  double eps);

// Square root of
//   eps^2 sum_{i<=i_eps} sigma_i^2 k_i^-2  +  i_eps^-2beta
//   + sum_{i>i_eps} lambda_i  +  eps^4 max_{i<=i_eps}[sigma_i^2 i^-beta /(k_i^2 lambda_i)]^2
// over the stored range. Terms are reported under
// variance-term / bias-term / prior-tail-term / saturation-term.
RateReport general_contraction_rate(const SpectralProblem& problem,
                                    const PriorSpec& prior, double beta,
                                    double eps);

// Three-regime closed form for k_i ~ i^-p, sigma_i ~ i^gamma,
// lambda_i = tau^2 i^(-1-2alpha); constants set to 1.
RateReport polynomial_contraction_rate(double alpha, double tau, double beta,
                                       double p, double gamma, double eps);

// eps^(2beta/(1+2beta+2(p+gamma)))       if gamma > -p-1/2
// eps (log|eps|)^(1/2)                   if gamma = -p-1/2
// eps                                    if gamma < -p-1/2
RateReport minimax_rate(double beta, double p, double gamma, double eps);

// mu_hat_i = y_i / k_i for i <= i1, 0 beyond; i1 = ceil(eps^(-1/(p+gamma+1/2+beta)))
// when p+gamma+1/2 > 0, ceil(eps^(-1/beta)) otherwise (capped at N).
std::vector<double> projection_estimate(const SpectralProblem& problem,
                                        std::span<const double> y, double eps,
                                        double beta);

struct PriorChoice {
  std::string family;      // "constant-tau" | "eps-dependent-tau"
  std::string alpha_rule;
  std::string tau_rule;
  double alpha_bound;      // numeric bound in alpha_rule (NaN if none)
  double tau_exponent;     // NaN unless alpha supplied and a power rule applies
  bool achievable;
};

// Prior parameters that make the contraction rate minimax; pass alpha to
// evaluate the rules (and the saturation flag) at a concrete value.
std::vector<PriorChoice> optimal_prior(double beta, double p, double gamma,
                                       double alpha = std::numeric_limits<double>::quiet_NaN());

// Exact Bayes risk at mu0: sum of the sampling-variance, squared-bias and
// posterior-variance terms of the conjugate posterior.
double expected_risk(const SpectralProblem& problem, const PriorSpec& prior,
                     const TruthSpec& truth, double eps);
kernels::RiskTerms expected_risk_terms(const SpectralProblem& problem,
                                       const PriorSpec& prior,
                                       const TruthSpec& truth, double eps);

IndexSets index_sets(const SpectralProblem& problem, const PriorSpec& prior,
                     double eps, double eps_sigma, double c0, double a_eps,
                     double a_sig, double a_sig_eps);

// Plug-in contraction rate over the computed index sets; collapses to the
// four-term known-variance form when I_sigma(2/3) is contained in I_eps(2)
// (reported under terms["simplified"]).
RateReport plugin_rate_general(const SpectralProblem& problem,
                               const PriorSpec& prior, double beta, double eps,
                               double eps_sigma, double c0);

// Polynomial plug-in rate (gamma < 0): below the threshold
// branch_c * (eps^2 tau^-2)^(-gamma/(alpha+1/2+p+gamma)) the known-variance
// rate applies unchanged; above it the four-term display with the log factor
// active iff 1 + 2(p+gamma) = 0.
RateReport plugin_rate_polynomial(double alpha, double tau, double beta,
                                  double p, double gamma, double eps,
                                  double eps_sigma, double branch_c = 1.0);

}  // namespace seqinv
