#include "seqinv/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace seqinv {

namespace {
constexpr double kPi = std::numbers::pi;

bool sandwich_ok(std::span<const double> x, double e, double c) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double ie = std::pow(static_cast<double>(j + 1), e);
    if (x[j] < ie / c || x[j] > ie * c) return false;
  }
  return true;
}
}  // namespace

void SpectralProblem::validate() const {
  if (k.empty()) throw std::invalid_argument("spectral problem: n must be >= 1");
  if (k.size() != sigma.size())
    throw std::invalid_argument("spectral problem: k and sigma length mismatch");
  for (double v : k)
    if (!(v > 0.0)) throw std::invalid_argument("spectral problem: k_i must be > 0");
  for (double v : sigma)
    if (!(v > 0.0))
      throw std::invalid_argument("spectral problem: sigma_i must be > 0");
}

bool SpectralProblem::k_sandwich_ok() const { return sandwich_ok(k, -p, c1); }
bool SpectralProblem::sigma_sandwich_ok() const {
  return sandwich_ok(sigma, gamma, c2);
}

std::vector<double> volterra_spectrum_k(std::size_t n) {
  if (n == 0) throw std::invalid_argument("volterra_spectrum: n must be >= 1");
  std::vector<double> k(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double i = static_cast<double>(j + 1);
    k[j] = 1.0 / ((i - 0.5) * kPi);
  }
  return k;
}

std::vector<double> power_law_noise(double gamma, double scale, std::size_t n) {
  if (!(scale > 0.0))
    throw std::invalid_argument("power_law_noise: scale must be > 0");
  if (n == 0) throw std::invalid_argument("power_law_noise: n must be >= 1");
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j)
    sigma[j] = scale * std::pow(static_cast<double>(j + 1), gamma);
  return sigma;
}

SpectralProblem volterra_problem(std::size_t n, double gamma,
                                 double noise_scale) {
  SpectralProblem pr;
  pr.k = volterra_spectrum_k(n);
  pr.sigma = power_law_noise(gamma, noise_scale, n);
  pr.p = 1.0;
  pr.gamma = gamma;
  pr.c1 = kPi;
  pr.c2 = std::max(noise_scale, 1.0 / noise_scale);
  return pr;
}

SpectralProblem power_law_problem(std::size_t n, double p, double k_scale,
                                  double gamma, double noise_scale) {
  if (!(k_scale > 0.0))
    throw std::invalid_argument("power_law_problem: k_scale must be > 0");
  SpectralProblem pr;
  pr.k.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    pr.k[j] = k_scale * std::pow(static_cast<double>(j + 1), -p);
  pr.sigma = power_law_noise(gamma, noise_scale, n);
  pr.p = p;
  pr.gamma = gamma;
  pr.c1 = std::max(k_scale, 1.0 / k_scale);
  pr.c2 = std::max(noise_scale, 1.0 / noise_scale);
  return pr;
}

double basis_eval(BasisKind kind, std::size_t i, double x) {
  if (i == 0) throw std::invalid_argument("basis_eval: index starts at 1");
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("basis_eval: x must lie in [0,1]");
  const double arg = (static_cast<double>(i) - 0.5) * kPi * x;
  const double root2 = std::numbers::sqrt2;
  return kind == BasisKind::input ? root2 * std::cos(arg)
                                  : root2 * std::sin(arg);
}

BasisCache::BasisCache(BasisKind kind, std::span<const double> grid,
                       std::size_t n)
    : grid_(grid.begin(), grid.end()), n_(n) {
  values_.resize(grid_.size() * n_);
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    double* row = values_.data() + j * n_;
    for (std::size_t idx = 0; idx < n_; ++idx)
      row[idx] = basis_eval(kind, idx + 1, grid_[j]);
  }
}

}  // namespace seqinv
