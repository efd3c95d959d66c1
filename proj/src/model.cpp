#include "seqinv/model.hpp"

#include <cmath>
#include <stdexcept>

#include "seqinv/rng.hpp"

namespace seqinv {

double PriorSpec::lambda(std::size_t i) const {
  return tau * tau * std::pow(static_cast<double>(i), -1.0 - 2.0 * alpha);
}

std::vector<double> PriorSpec::lambdas(std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = lambda(j + 1);
  return out;
}

void PriorSpec::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("prior: alpha must be > 0");
  if (!(tau > 0.0)) throw std::invalid_argument("prior: tau must be > 0");
}

TruthSpec smooth_truth(std::size_t n, double beta) {
  if (n == 0) throw std::invalid_argument("smooth_truth: n must be >= 1");
  TruthSpec t;
  t.coeffs.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double i = static_cast<double>(j + 1);
    t.coeffs[j] = std::pow(i, -beta - 0.5) * std::sin(i);
  }
  t.beta = beta;
  t.radius = sobolev_norm(t.coeffs, beta);
  return t;
}

double sobolev_norm(std::span<const double> coeffs, double beta) {
  double sum = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const double w = std::pow(static_cast<double>(j + 1), 2.0 * beta);
    sum += w * coeffs[j] * coeffs[j];
  }
  return std::sqrt(sum);
}

Observations simulate(const SpectralProblem& problem, const TruthSpec& truth,
                      double eps, std::uint64_t seed) {
  if (eps < 0.0) throw std::invalid_argument("simulate: eps must be >= 0");
  if (problem.n() != truth.n())
    throw std::invalid_argument("simulate: problem/truth length mismatch");
  Observations obs;
  obs.eps = eps;
  obs.seed = seed;
  obs.y.resize(problem.n());
  for (std::size_t j = 0; j < problem.n(); ++j) {
    const double mean = problem.k[j] * truth.coeffs[j];
    obs.y[j] = eps == 0.0
                   ? mean
                   : mean + eps * problem.sigma[j] *
                                 rng::normal(seed, rng::kSimulate, j + 1, 0);
  }
  return obs;
}

ReplicatedObservations simulate_replicated(const SpectralProblem& problem,
                                           const TruthSpec& truth, double eps0,
                                           std::size_t m, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("simulate_replicated: m must be >= 2");
  if (eps0 < 0.0)
    throw std::invalid_argument("simulate_replicated: eps0 must be >= 0");
  if (problem.n() != truth.n())
    throw std::invalid_argument("simulate_replicated: length mismatch");
  ReplicatedObservations rep;
  rep.n = problem.n();
  rep.m = m;
  rep.eps0 = eps0;
  rep.seed = seed;
  rep.y.resize(rep.n * m);
  for (std::size_t i = 0; i < rep.n; ++i) {
    const double mean = problem.k[i] * truth.coeffs[i];
    const double sd = eps0 * problem.sigma[i];
    double* row = rep.y.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = eps0 == 0.0
                   ? mean
                   : mean + sd * rng::normal(seed, rng::kReplicate, i + 1, j + 1);
    }
  }
  return rep;
}

}  // namespace seqinv
