#include "seqinv/varest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqinv {

SampleStats sample_stats(const ReplicatedObservations& rep) {
  if (rep.m < 2) throw std::invalid_argument("sample_stats: m must be >= 2");
  SampleStats out;
  out.m = rep.m;
  out.mean.resize(rep.n);
  out.var.resize(rep.n);
  const double m = static_cast<double>(rep.m);
  for (std::size_t i = 0; i < rep.n; ++i) {
    const auto row = rep.row(i);
    double sum = 0.0;
    for (double v : row) sum += v;
    const double mean = sum / m;
    double ss = 0.0;
    for (double v : row) {
      const double d = v - mean;
      ss += d * d;
    }
    out.mean[i] = mean;
    out.var[i] = ss / (m - 1.0);
  }
  return out;
}

VarianceEstimate truncated_estimator(std::span<const double> s2, long M,
                                     double eps_sigma, double c0,
                                     std::size_t m) {
  if (M < 0) throw std::invalid_argument("truncated_estimator: M must be >= 0");
  if (!(c0 > 0.0))
    throw std::invalid_argument("truncated_estimator: c0 must be > 0");
  if (!(eps_sigma > 0.0))
    throw std::invalid_argument("truncated_estimator: eps_sigma must be > 0");
  VarianceEstimate est;
  est.s2.assign(s2.begin(), s2.end());
  est.m = m;
  est.M = M;
  est.eps_sigma = eps_sigma;
  est.c0 = c0;
  const double floor = c0 * eps_sigma;
  est.hat.resize(s2.size());
  est.tilde.resize(s2.size());
  for (std::size_t j = 0; j < s2.size(); ++j) {
    est.hat[j] = static_cast<long>(j) < M ? s2[j] : 0.0;
    est.tilde[j] = std::max(floor, est.hat[j]);
  }
  return est;
}

long min_truncation(std::span<const double> sigma, double eps_sigma,
                    double c0) {
  if (!(c0 > 0.0)) throw std::invalid_argument("min_truncation: c0 must be > 0");
  if (!(eps_sigma > 0.0))
    throw std::invalid_argument("min_truncation: eps_sigma must be > 0");
  // Slack keeps real-arithmetic boundary ties (sigma_i^2 = c0 eps_sigma) on
  // the satisfied side of the defining inequality.
  const double threshold = c0 * eps_sigma * (1.0 + 1e-12);
  long M = 0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (sigma[j] * sigma[j] > threshold) M = static_cast<long>(j + 1);
  }
  if (M == static_cast<long>(sigma.size()) && !sigma.empty() &&
      sigma.back() * sigma.back() > threshold) {
    throw std::runtime_error(
        "min_truncation: no finite truncation level within the stored range "
        "(sigma_N^2 still exceeds c0 eps_sigma)");
  }
  return M;
}

long min_truncation_power_law(double gamma, double c2, double eps_sigma,
                              double c0) {
  if (gamma >= 0.0)
    throw std::runtime_error(
        "min_truncation: gamma >= 0 admits no finite truncation level");
  if (!(c2 > 0.0)) throw std::invalid_argument("min_truncation: c2 must be > 0");
  if (!(c0 > 0.0) || !(eps_sigma > 0.0))
    throw std::invalid_argument("min_truncation: c0, eps_sigma must be > 0");
  // sigma_i^2 = c2^2 i^(2 gamma) <= c0 eps_sigma iff i >= x; ties carry the
  // same slack as the scan.
  const double threshold = c0 * eps_sigma * (1.0 + 1e-12);
  const double x = std::pow(threshold / (c2 * c2), 1.0 / (2.0 * gamma));
  long M = std::max(static_cast<long>(std::ceil(x)) - 1, 0l);
  // Settle rounding at the boundary against the defining inequality.
  const auto s2 = [&](long i) {
    return c2 * c2 * std::pow(static_cast<double>(i), 2.0 * gamma);
  };
  while (M > 0 && s2(M) <= threshold) --M;
  while (s2(M + 1) > threshold) ++M;
  return M;
}

ChiSquareTail chi_square_tail(std::span<const double> a, double x) {
  if (x < 0.0) throw std::invalid_argument("chi_square_tail: x must be >= 0");
  double norm2 = 0.0, norm_inf = 0.0;
  for (double v : a) {
    if (v < 0.0)
      throw std::invalid_argument("chi_square_tail: weights must be >= 0");
    norm2 += v * v;
    norm_inf = std::max(norm_inf, v);
  }
  norm2 = std::sqrt(norm2);
  ChiSquareTail t;
  t.lower = 2.0 * norm2 * std::sqrt(x);
  t.upper = t.lower + 2.0 * norm_inf * x;
  t.bound = std::exp(-x);
  return t;
}

ChiSquareTail chi_square_tail(std::size_t d, double weight, double x) {
  std::vector<double> a(d, weight);
  return chi_square_tail(a, x);
}

ConsistencyBound consistency_bound(std::size_t m, long M, double eps_sigma,
                                   double c0, double c_sigma) {
  if (m < 2) throw std::invalid_argument("consistency_bound: m must be >= 2");
  if (M < 0) throw std::invalid_argument("consistency_bound: M must be >= 0");
  if (!(c_sigma > 0.0))
    throw std::invalid_argument("consistency_bound: c_sigma must be > 0");
  const double y = c0 * eps_sigma / c_sigma;
  ConsistencyBound out;
  out.condition_ok = y <= 0.5;
  const double raw =
      1.0 - 2.0 * static_cast<double>(M) *
                std::exp(-(static_cast<double>(m) - 1.0) * y * y / 6.0);
  out.bound = std::clamp(raw, 0.0, 1.0);
  return out;
}

TruncationPlan truncation_planner(std::size_t m, double gamma, double c2,
                                  double c0) {
  if (gamma >= 0.0)
    throw std::runtime_error("truncation_planner: needs gamma < 0");
  if (m < 2) throw std::invalid_argument("truncation_planner: m must be >= 2");
  if (!(c2 > 0.0) || !(c0 > 0.0))
    throw std::invalid_argument("truncation_planner: c2, c0 must be > 0");
  TruncationPlan plan;
  const double md = static_cast<double>(m);
  plan.M = static_cast<long>(
      std::floor(0.5 * std::pow(md / std::log(md), 1.0 / (4.0 * std::abs(gamma)))));
  plan.M = std::max(plan.M, 1l);
  plan.eps_sigma =
      (c2 * c2 / c0) * std::pow(static_cast<double>(plan.M), 2.0 * gamma);
  plan.m_eps2 = md * plan.eps_sigma * plan.eps_sigma;
  plan.logM_over_m_eps2 =
      std::log(std::max(static_cast<double>(plan.M), 2.0)) / plan.m_eps2;
  plan.ok = plan.m_eps2 > 1.0 && plan.logM_over_m_eps2 < 1.0;
  return plan;
}

}  // namespace seqinv
