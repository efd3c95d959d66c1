// Test-only reference implementations, independent of the library's
// computation paths.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracles {

// Dense symmetric positive-definite solve via Cholesky; no diagonal
// shortcuts, so conditioning a joint Gaussian through it exercises a
// genuinely different route than the per-index formulas.
class DenseSpd {
 public:
  explicit DenseSpd(std::vector<double> a, std::size_t n) : l_(std::move(a)), n_(n) {
    for (std::size_t j = 0; j < n_; ++j) {
      for (std::size_t i = j; i < n_; ++i) {
        double sum = l_[i * n_ + j];
        for (std::size_t k = 0; k < j; ++k)
          sum -= l_[i * n_ + k] * l_[j * n_ + k];
        if (i == j) {
          if (sum <= 0.0) throw std::runtime_error("cholesky: not SPD");
          l_[i * n_ + j] = std::sqrt(sum);
        } else {
          l_[i * n_ + j] = sum / l_[j * n_ + j];
        }
      }
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < i; ++k) x[i] -= l_[i * n_ + k] * x[k];
      x[i] /= l_[i * n_ + i];
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < n_; ++k) x[ii] -= l_[k * n_ + ii] * x[k];
      x[ii] /= l_[ii * n_ + ii];
    }
    return x;
  }

 private:
  std::vector<double> l_;
  std::size_t n_;
};

struct ConditionedGaussian {
  std::vector<double> mean;
  std::vector<double> var;  // marginal variances
};

// Condition mu | Y in the joint Gaussian with mu ~ N(0, diag(lambda)),
// Y = diag(k) mu + noise, noise ~ N(0, eps^2 diag(sigma^2)); everything is
// assembled as dense matrices and inverted through Cholesky.
inline ConditionedGaussian condition_joint_gaussian(
    std::span<const double> y, std::span<const double> k,
    std::span<const double> lambda, std::span<const double> sigma,
    double eps) {
  const std::size_t n = y.size();
  std::vector<double> syy(n * n, 0.0);   // K L K^T + eps^2 S
  std::vector<double> smy(n * n, 0.0);   // L K^T
  for (std::size_t i = 0; i < n; ++i) {
    syy[i * n + i] = k[i] * lambda[i] * k[i] + eps * eps * sigma[i] * sigma[i];
    smy[i * n + i] = lambda[i] * k[i];
  }
  DenseSpd chol(syy, n);
  ConditionedGaussian out;
  // mean = L K^T Syy^-1 y, var_i = lambda_i - (L K^T Syy^-1 K L)_ii
  const auto x0 = chol.solve(y);
  out.mean.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) m += smy[i * n + j] * x0[j];
    out.mean[i] = m;
  }
  std::vector<double> rhs(n, 0.0);
  out.var.assign(n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t j = 0; j < n; ++j) rhs[j] = smy[col * n + j];
    const auto x = chol.solve(rhs);  // Syy^-1 (K L e_col)
    double quad = 0.0;
    for (std::size_t j = 0; j < n; ++j) quad += smy[col * n + j] * x[j];
    out.var[col] = lambda[col] - quad;
  }
  return out;
}

// Same conditioning computed through the joint precision matrix
// (Lambda^-1 + eps^-2 K^T V^-1 K), assembled dense and Cholesky-solved.
// The covariance-form Schur complement above loses ~lambda/var digits to
// cancellation when the data dominate the prior; this route has no
// subtraction and stays at machine accuracy, which the 1e-10 equivalence
// budget needs.
inline ConditionedGaussian condition_joint_gaussian_precision(
    std::span<const double> y, std::span<const double> k,
    std::span<const double> lambda, std::span<const double> sigma,
    double eps) {
  const std::size_t n = y.size();
  std::vector<double> prec(n * n, 0.0);
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double s2 = sigma[i] * sigma[i];
    prec[i * n + i] = 1.0 / lambda[i] + k[i] * k[i] / (eps * eps * s2);
    b[i] = k[i] * y[i] / (eps * eps * s2);
  }
  DenseSpd chol(prec, n);
  ConditionedGaussian out;
  out.mean = chol.solve(b);
  out.var.assign(n, 0.0);
  std::vector<double> e(n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    e.assign(n, 0.0);
    e[col] = 1.0;
    out.var[col] = chol.solve(e)[col];
  }
  return out;
}

// Composite Simpson quadrature on [0,1].
inline double simpson01(const std::function<double(double)>& f,
                        std::size_t intervals) {
  if (intervals % 2 == 1) ++intervals;
  const double h = 1.0 / static_cast<double>(intervals);
  double sum = f(0.0) + f(1.0);
  for (std::size_t j = 1; j < intervals; ++j)
    sum += f(h * static_cast<double>(j)) * (j % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

struct GridMin {
  double x = 0.0;
  double value = 0.0;
};

// Minimiser over a log-spaced grid.
inline GridMin log_grid_min(const std::function<double(double)>& f, double lo,
                            double hi, std::size_t points) {
  const double llo = std::log(lo), lhi = std::log(hi);
  GridMin best{lo, f(lo)};
  for (std::size_t j = 1; j < points; ++j) {
    const double x = std::exp(
        llo + (lhi - llo) * static_cast<double>(j) / static_cast<double>(points - 1));
    const double v = f(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
  double se_mean = 0.0;
};

inline MeanVar mean_var(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, var, std::sqrt(var / n)};
}

}  // namespace oracles
