#pragma once

#include <cstddef>
#include <span>
#include <string>

// Data-parallel inner loops shared by the posterior, risk and marginal
// likelihood code. Every kernel has a scalar reference implementation and
// an AVX2 variant; the active variant is picked once at startup from CPUID
// and can be forced with SEQINV_SIMD=scalar|avx2 for equivalence testing.
//
// All kernels are pure: output depends only on the inputs, never on the
// lane, beyond floating-point rounding (equivalence tests bound the
// difference at 1e-13 relative).
namespace seqinv::kernels {

struct RiskTerms {
  double s1 = 0.0;  // sampling variance of the posterior mean
  double s2 = 0.0;  // squared bias at the truth
  double s3 = 0.0;  // posterior variance mass
  double total() const { return s1 + s2 + s3; }
};

struct MarginalTerms {
  double ratio_sum = 0.0;  // sum of y_i^2 / d_i
  double log_sum = 0.0;    // sum of log d_i
  double value() const { return ratio_sum + log_sum; }
};

struct GradientTerms {
  double data_sum = 0.0;   // sum of y_i^2 g_i / d_i^2
  double trace_sum = 0.0;  // sum of g_i / d_i
  double value() const { return trace_sum - data_sum; }
};

// Conjugate per-index posterior moments.
//   mean_i = y_i k_i lambda_i / (lambda_i k_i^2 + eps^2 sigma2_i)
//   var_i  = eps^2 sigma2_i lambda_i / (lambda_i k_i^2 + eps^2 sigma2_i)
// Computed through the ratio r_i = eps^2 sigma2_i / (lambda_i k_i^2), which
// stays finite-or-inf where the textbook denominator would under/overflow;
// lambda_i = 0 degenerates to (0, 0).
using PosteriorMomentsFn = void (*)(std::span<const double> y,
                                    std::span<const double> k,
                                    std::span<const double> lambda,
                                    std::span<const double> sigma2,
                                    double eps2, std::span<double> mean,
                                    std::span<double> var);

// Exact frequentist risk decomposition of the conjugate posterior at mu0:
//   s1_i = eps^2 sigma2_i (k_i lambda_i)^2 / d_i^2
//   s2_i = mu0_i^2 (eps^2 sigma2_i / d_i)^2
//   s3_i = eps^2 sigma2_i lambda_i / d_i,    d_i = lambda_i k_i^2 + eps^2 sigma2_i
using RiskTermsFn = RiskTerms (*)(std::span<const double> mu0,
                                  std::span<const double> k,
                                  std::span<const double> lambda,
                                  std::span<const double> sigma2, double eps2);

// sum_i var_i + (mean_i - mu0_i)^2, compensated.
using L2RiskFn = double (*)(std::span<const double> mean,
                            std::span<const double> var,
                            std::span<const double> mu0);

// Marginal likelihood pieces at d_i = g_i tau + eps^2 sigma2_i, g_i = k_i^2 l0_i.
using MarginalTermsFn = MarginalTerms (*)(std::span<const double> y2,
                                          std::span<const double> g,
                                          std::span<const double> sigma2,
                                          double eps2, double tau);

using GradientTermsFn = GradientTerms (*)(std::span<const double> y2,
                                          std::span<const double> g,
                                          std::span<const double> sigma2,
                                          double eps2, double tau);

// sum_i a_i b_i and sum_i w_i b_i^2 (basis reconstruction / band variance).
using DotFn = double (*)(std::span<const double> a, std::span<const double> b);
using WeightedDotSqFn = double (*)(std::span<const double> w,
                                   std::span<const double> b);

struct Ops {
  PosteriorMomentsFn posterior_moments;
  RiskTermsFn risk_terms;
  L2RiskFn l2_risk;
  MarginalTermsFn marginal_terms;
  GradientTermsFn gradient_terms;
  DotFn dot;
  WeightedDotSqFn weighted_dot_sq;
  const char* name;
};

extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
#endif

// Active lane: resolved once from CPUID + SEQINV_SIMD, overridable in tests.
const Ops& active();
void force_lane(const std::string& name);  // "scalar", "avx2", "auto"
bool avx2_available();

inline void posterior_moments(std::span<const double> y,
                              std::span<const double> k,
                              std::span<const double> lambda,
                              std::span<const double> sigma2, double eps2,
                              std::span<double> mean, std::span<double> var) {
  active().posterior_moments(y, k, lambda, sigma2, eps2, mean, var);
}
inline RiskTerms risk_terms(std::span<const double> mu0,
                            std::span<const double> k,
                            std::span<const double> lambda,
                            std::span<const double> sigma2, double eps2) {
  return active().risk_terms(mu0, k, lambda, sigma2, eps2);
}
inline double l2_risk(std::span<const double> mean, std::span<const double> var,
                      std::span<const double> mu0) {
  return active().l2_risk(mean, var, mu0);
}
inline MarginalTerms marginal_terms(std::span<const double> y2,
                                    std::span<const double> g,
                                    std::span<const double> sigma2, double eps2,
                                    double tau) {
  return active().marginal_terms(y2, g, sigma2, eps2, tau);
}
inline GradientTerms gradient_terms(std::span<const double> y2,
                                    std::span<const double> g,
                                    std::span<const double> sigma2, double eps2,
                                    double tau) {
  return active().gradient_terms(y2, g, sigma2, eps2, tau);
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a, b);
}
inline double weighted_dot_sq(std::span<const double> w,
                              std::span<const double> b) {
  return active().weighted_dot_sq(w, b);
}

}  // namespace seqinv::kernels
