#include "seqinv/ebayes.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "seqinv/kernels.hpp"

namespace seqinv {

namespace {

struct Prepared {
  std::vector<double> y2;      // y_i^2
  std::vector<double> g;       // k_i^2 l0_i
  std::vector<double> sigma2;  // sigma_i^2
};

Prepared prepare(std::span<const double> y, const SpectralProblem& problem,
                 std::span<const double> l0) {
  if (y.size() != problem.n() || l0.size() != problem.n())
    throw std::invalid_argument("ebayes: length mismatch");
  Prepared pr;
  const std::size_t n = y.size();
  pr.y2.resize(n);
  pr.g.resize(n);
  pr.sigma2.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    pr.y2[j] = y[j] * y[j];
    pr.g[j] = problem.k[j] * problem.k[j] * l0[j];
    pr.sigma2[j] = problem.sigma[j] * problem.sigma[j];
  }
  return pr;
}

std::vector<double> default_shape(std::size_t n, double alpha) {
  std::vector<double> l0(n);
  for (std::size_t j = 0; j < n; ++j)
    l0[j] = std::pow(static_cast<double>(j + 1), -2.0 * alpha - 1.0);
  return l0;
}

// Brent minimisation on [a, b]; returns argmin and stores iterations used.
double brent_min(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_iter, int* iterations) {
  const double golden = 0.3819660112501051;
  double x, w, v, fx, fw, fv;
  x = w = v = a + golden * (b - a);
  fx = fw = fv = f(x);
  double d = 0.0, e = 0.0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double u;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      // Trial parabola through (v, w, x).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m ? b : a) - x;
      d = golden * e;
    }
    u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  if (iterations) *iterations = iter;
  return x;
}

}  // namespace

double marginal_objective(double tau, std::span<const double> y,
                          const SpectralProblem& problem,
                          std::span<const double> l0, double eps) {
  if (!(tau > 0.0))
    throw std::invalid_argument("marginal_objective: tau must be > 0");
  const Prepared pr = prepare(y, problem, l0);
  return kernels::marginal_terms(pr.y2, pr.g, pr.sigma2, eps * eps, tau).value();
}

double marginal_objective(double tau, std::span<const double> y,
                          const SpectralProblem& problem, double alpha,
                          double eps) {
  return marginal_objective(tau, y, problem, default_shape(y.size(), alpha),
                            eps);
}

double marginal_gradient(double tau, std::span<const double> y,
                         const SpectralProblem& problem,
                         std::span<const double> l0, double eps) {
  if (!(tau > 0.0))
    throw std::invalid_argument("marginal_gradient: tau must be > 0");
  const Prepared pr = prepare(y, problem, l0);
  return kernels::gradient_terms(pr.y2, pr.g, pr.sigma2, eps * eps, tau).value();
}

double marginal_gradient(double tau, std::span<const double> y,
                         const SpectralProblem& problem, double alpha,
                         double eps) {
  return marginal_gradient(tau, y, problem, default_shape(y.size(), alpha),
                           eps);
}

EbResult eb_tau(std::span<const double> y, const SpectralProblem& problem,
                std::span<const double> l0, double eps,
                const EbSearch& search) {
  if (!(search.lo > 0.0) || !(search.lo < search.hi))
    throw std::invalid_argument("eb_tau: need 0 < lo < hi");
  const Prepared pr = prepare(y, problem, l0);
  const double eps2 = eps * eps;
  const auto q = [&](double log_tau) {
    return kernels::marginal_terms(pr.y2, pr.g, pr.sigma2, eps2,
                                   std::exp(log_tau))
        .value();
  };
  const double a = std::log(search.lo);
  const double b = std::log(search.hi);
  EbResult res;
  res.lo = search.lo;
  res.hi = search.hi;
  const double xmin =
      brent_min(q, a, b, search.rel_tol, search.max_iter, &res.iterations);
  // Endpoint wins count as non-convergence (q may be monotone on the bracket).
  double best_x = xmin, best_q = q(xmin);
  const double q_lo = q(a), q_hi = q(b);
  if (q_lo < best_q) { best_x = a; best_q = q_lo; }
  if (q_hi < best_q) { best_x = b; best_q = q_hi; }
  const double edge = 10.0 * search.rel_tol * (std::abs(best_x) + 1.0);
  res.converged = best_x - a > edge && b - best_x > edge;
  res.tau_hat = std::exp(best_x);
  res.objective = best_q;
  return res;
}

EbResult eb_tau(std::span<const double> y, const SpectralProblem& problem,
                double alpha, double eps, const EbSearch& search) {
  return eb_tau(y, problem, default_shape(y.size(), alpha), eps, search);
}

EbAsymptotic eb_tau_asymptotic(double alpha, double beta, double p,
                               double gamma) {
  EbAsymptotic out;
  const double ptilde = p + gamma;
  out.smooth_branch = alpha + 0.5 >= beta;
  out.alpha_cond = alpha > std::max(0.0, -p - gamma - 0.5);
  out.sum_cond = beta + alpha + 1.0 + 2.0 * ptilde > 0.0;
  out.exponent = out.smooth_branch
                     ? -4.0 * (alpha - beta) / (1.0 + 2.0 * ptilde + 2.0 * beta)
                     : 1.0 / (1.0 + ptilde + alpha);
  return out;
}

PosteriorSummary eb_posterior(std::span<const double> y,
                              const SpectralProblem& problem, double alpha,
                              double eps, EbResult* result,
                              const EbSearch& search) {
  const EbResult eb = eb_tau(y, problem, alpha, eps, search);
  if (result) *result = eb;
  const std::size_t n = y.size();
  std::vector<double> lambda(n), sigma2(n);
  for (std::size_t j = 0; j < n; ++j) {
    lambda[j] =
        eb.tau_hat * std::pow(static_cast<double>(j + 1), -2.0 * alpha - 1.0);
    sigma2[j] = problem.sigma[j] * problem.sigma[j];
  }
  return conjugate_posterior_seq(y, problem.k, lambda, sigma2, eps);
}

}  // namespace seqinv
