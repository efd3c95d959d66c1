#include <cmath>

#include "seqinv/kernels.hpp"

namespace seqinv::kernels {
namespace {

// Neumaier-compensated accumulator; permutation of the inputs moves the
// result by at most a few ulps.
struct Accum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

void posterior_moments_scalar(std::span<const double> y,
                              std::span<const double> k,
                              std::span<const double> lambda,
                              std::span<const double> sigma2, double eps2,
                              std::span<double> mean, std::span<double> var) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double lk2 = lambda[i] * k[i] * k[i];
    const double e2s2 = eps2 * sigma2[i];
    // r = inf (prior point mass or vanished signal) gives mean 0, var lambda;
    // r = 0 (noiseless) gives mean y/k, var 0. IEEE division covers both.
    const double r = e2s2 / lk2;
    mean[i] = (y[i] / k[i]) / (1.0 + r);
    var[i] = lambda[i] / (1.0 + 1.0 / r);
  }
}

RiskTerms risk_terms_scalar(std::span<const double> mu0,
                            std::span<const double> k,
                            std::span<const double> lambda,
                            std::span<const double> sigma2, double eps2) {
  Accum s1, s2, s3;
  const std::size_t n = mu0.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double lk2 = lambda[i] * k[i] * k[i];
    const double e2s2 = eps2 * sigma2[i];
    const double r = e2s2 / lk2;
    const double shrink = 1.0 / (1.0 + r);           // lambda k^2 / d
    const double c = std::isinf(r) ? 1.0 : r / (1.0 + r);  // eps^2 sigma^2 / d
    s1.add(shrink * shrink * (e2s2 / (k[i] * k[i])));
    s2.add(mu0[i] * mu0[i] * c * c);
    s3.add(lambda[i] * c);
  }
  return {s1.value(), s2.value(), s3.value()};
}

double l2_risk_scalar(std::span<const double> mean, std::span<const double> var,
                      std::span<const double> mu0) {
  Accum acc;
  const std::size_t n = mean.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = mean[i] - mu0[i];
    acc.add(var[i] + d * d);
  }
  return acc.value();
}

MarginalTerms marginal_terms_scalar(std::span<const double> y2,
                                    std::span<const double> g,
                                    std::span<const double> sigma2, double eps2,
                                    double tau) {
  Accum ratio, logs;
  const std::size_t n = y2.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = g[i] * tau + eps2 * sigma2[i];
    ratio.add(y2[i] / d);
    logs.add(std::log(d));
  }
  return {ratio.value(), logs.value()};
}

GradientTerms gradient_terms_scalar(std::span<const double> y2,
                                    std::span<const double> g,
                                    std::span<const double> sigma2, double eps2,
                                    double tau) {
  Accum data, trace;
  const std::size_t n = y2.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = g[i] * tau + eps2 * sigma2[i];
    data.add(y2[i] * g[i] / (d * d));
    trace.add(g[i] / d);
  }
  return {data.value(), trace.value()};
}

double dot_scalar(std::span<const double> a, std::span<const double> b) {
  Accum acc;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

double weighted_dot_sq_scalar(std::span<const double> w,
                              std::span<const double> b) {
  Accum acc;
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) acc.add(w[i] * b[i] * b[i]);
  return acc.value();
}

}  // namespace

const Ops scalar_ops = {
    posterior_moments_scalar, risk_terms_scalar,    l2_risk_scalar,
    marginal_terms_scalar,    gradient_terms_scalar, dot_scalar,
    weighted_dot_sq_scalar,   "scalar",
};

}  // namespace seqinv::kernels
