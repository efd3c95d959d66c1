#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace seqinv {

// Eigensystem of the forward operator and noise covariance, reduced to the
// two eigenvalue sequences plus their power-law metadata. The exponents
// p, gamma are carried as given, never re-estimated from the sequences;
// validate_sandwich() is an optional check so empirical spectra can be
// loaded as-is.
struct SpectralProblem {
  std::vector<double> k;      // forward singular values, k_i > 0
  std::vector<double> sigma;  // noise sd eigenvalues, sigma_i > 0
  double p = 0.0;             // ill-posedness exponent: k_i ~ i^-p
  double gamma = 0.0;         // noise exponent: sigma_i ~ i^gamma
  double c1 = 1.0;            // sandwich constant for k
  double c2 = 1.0;            // sandwich constant for sigma

  std::size_t n() const { return k.size(); }
  void validate() const;  // positivity + equal lengths; throws

  // True when c^-1 i^e <= x_i <= c i^e holds over the stored range.
  bool k_sandwich_ok() const;
  bool sigma_sandwich_ok() const;
};

// Domain (input) or range (output) eigenbasis of the Volterra operator.
enum class BasisKind { input, output };

// k_i = ((i - 1/2)^2 pi^2)^(-1/2); exponent p = 1, sandwich constant pi.
std::vector<double> volterra_spectrum_k(std::size_t n);

// sigma_i = scale * i^gamma.
std::vector<double> power_law_noise(double gamma, double scale, std::size_t n);

// Complete problem: Volterra forward + power-law noise.
SpectralProblem volterra_problem(std::size_t n, double gamma,
                                 double noise_scale);

// Power-law forward (k_i = k_scale * i^-p) + power-law noise.
SpectralProblem power_law_problem(std::size_t n, double p, double k_scale,
                                  double gamma, double noise_scale);

// input:  e_i(x) = sqrt(2) cos((i - 1/2) pi x)
// output: phi_i(x) = sqrt(2) sin((i - 1/2) pi x)
double basis_eval(BasisKind kind, std::size_t i, double x);

// Cached evaluations of e_i (i = 1..n) on a fixed grid, row-major by grid
// point: row j holds e_1(x_j)..e_n(x_j). Built lazily per grid so N = 2000
// at 10^3 points stays a one-off cost.
class BasisCache {
 public:
  BasisCache(BasisKind kind, std::span<const double> grid, std::size_t n);
  std::span<const double> row(std::size_t j) const {
    return {values_.data() + j * n_, n_};
  }
  std::size_t grid_size() const { return grid_.size(); }
  std::size_t n() const { return n_; }
  const std::vector<double>& grid() const { return grid_; }

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  std::size_t n_;
};

}  // namespace seqinv
