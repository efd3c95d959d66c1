#pragma once

#include <span>
#include <vector>

#include "seqinv/model.hpp"

namespace seqinv {

struct SampleStats {
  std::vector<double> mean;  // row means
  std::vector<double> var;   // unbiased sample variances (divisor m-1)
  std::size_t m = 0;
};

// Truncated, floored plug-in variances:
//   hat_i   = s_i^2 1{i <= M}
//   tilde_i = max(c0 eps_sigma, hat_i)
struct VarianceEstimate {
  std::vector<double> s2;
  std::vector<double> hat;
  std::vector<double> tilde;
  std::size_t m = 0;
  long M = 0;
  double eps_sigma = 0.0;
  double c0 = 0.0;
};

struct ChiSquareTail {
  double upper = 0.0;  // 2 |a|_2 sqrt(x) + 2 |a|_inf x
  double lower = 0.0;  // 2 |a|_2 sqrt(x)
  double bound = 1.0;  // e^-x
};

struct ConsistencyBound {
  double bound = 0.0;        // clamped to [0, 1]
  bool condition_ok = true;  // c0 eps_sigma / c_sigma <= 1/2
};

struct TruncationPlan {
  long M = 0;
  double eps_sigma = 0.0;
  double m_eps2 = 0.0;          // m eps_sigma^2, should be large
  double logM_over_m_eps2 = 0.0;  // log M / (m eps_sigma^2), should be small
  bool ok = false;
};

// Two-pass mean / unbiased variance per row.
SampleStats sample_stats(const ReplicatedObservations& rep);

VarianceEstimate truncated_estimator(std::span<const double> s2, long M,
                                     double eps_sigma, double c0,
                                     std::size_t m);

// Smallest M with sigma_i^2 <= c0 eps_sigma for every stored i > M; throws
// when even the last stored index exceeds the threshold.
long min_truncation(std::span<const double> sigma, double eps_sigma, double c0);

// Closed form for sigma_i = c2 i^gamma (gamma < 0): the scan above applied
// to the exact power law.
long min_truncation_power_law(double gamma, double c2, double eps_sigma,
                              double c0);

// Quadratic-form concentration thresholds for Z = sum a_i (Y_i^2 - 1):
// P(Z >= upper) <= e^-x and P(Z <= -lower) <= e^-x.
ChiSquareTail chi_square_tail(std::span<const double> a, double x);
ChiSquareTail chi_square_tail(std::size_t d, double weight, double x);

// P(|hat sigma_i^2 - sigma_i^2| <= c0 eps_sigma for all i) >=
//   1 - 2 M exp(-(m-1) (c0 eps_sigma / c_sigma)^2 / 6),
// valid for M >= M_sigma and c0 eps_sigma / c_sigma <= 1/2. c_sigma plays
// the role of sup_i sigma_i^2 (sigma_1^2 for decaying noise).
ConsistencyBound consistency_bound(std::size_t m, long M, double eps_sigma,
                                   double c0, double c_sigma);

// M = floor((m/log m)^(1/(4|gamma|)) / 2) and the smallest eps_sigma whose
// floor c0 eps_sigma covers the tail beyond M for sigma_i = c2 i^gamma,
// i.e. eps_sigma = (c2^2/c0) M^(2 gamma). Reports the two consistency
// diagnostics.
TruncationPlan truncation_planner(std::size_t m, double gamma, double c2,
                                  double c0);

}  // namespace seqinv
