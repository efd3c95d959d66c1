#include "seqinv/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqinv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// sigma_i^2 / (lambda_i k_i^2), i = 1..N.
std::vector<double> likelihood_prior_ratio(const SpectralProblem& problem,
                                           const PriorSpec& prior) {
  const std::size_t n = problem.n();
  std::vector<double> z(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s2 = problem.sigma[j] * problem.sigma[j];
    z[j] = s2 / (prior.lambda(j + 1) * problem.k[j] * problem.k[j]);
  }
  return z;
}

void require_monotone(std::span<const double> z, const char* where) {
  for (std::size_t j = 1; j < z.size(); ++j) {
    if (z[j] < z[j - 1] * (1.0 - 1e-12)) {
      throw NonMonotoneRatio(
          std::string(where) +
          ": sigma_i^2/(lambda_i k_i^2) is not monotone increasing (first "
          "violation at i=" +
          std::to_string(j + 1) + "); use the index-set form instead");
    }
  }
}

double pospart(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::supercritical: return "supercritical";
    case Regime::critical: return "critical";
    case Regime::subcritical: return "subcritical";
  }
  return "?";
}

Regime classify_regime(double p, double gamma) {
  const double boundary = -p - 0.5;
  const double scale = std::max({1.0, std::abs(gamma), std::abs(boundary)});
  if (std::abs(gamma - boundary) <= 1e-12 * scale) return Regime::critical;
  return gamma > boundary ? Regime::supercritical : Regime::subcritical;
}

long cutoff_index(const SpectralProblem& problem, const PriorSpec& prior,
                  double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("cutoff_index: eps must be > 0");
  const auto z = likelihood_prior_ratio(problem, prior);
  require_monotone(z, "cutoff_index");
  // Relative slack keeps exact boundary ties (z_i = eps^-2 in real
  // arithmetic) on the inclusive side.
  const double bound = (1.0 + 1e-12) / (eps * eps);
  long cut = 0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] <= bound) cut = static_cast<long>(j + 1);
  }
  return cut;
}

RateReport general_contraction_rate(const SpectralProblem& problem,
                                    const PriorSpec& prior, double beta,
                                    double eps) {
  if (!(beta > 0.0))
    throw std::invalid_argument("general_contraction_rate: beta must be > 0");
  const long cut = cutoff_index(problem, prior, eps);
  const std::size_t n = problem.n();
  const double eps2 = eps * eps;

  double variance = 0.0;
  double sat_max = 0.0;
  for (long j = 0; j < cut; ++j) {
    const double k2 = problem.k[j] * problem.k[j];
    const double s2 = problem.sigma[j] * problem.sigma[j];
    variance += s2 / k2;
    const double i = static_cast<double>(j + 1);
    sat_max = std::max(
        sat_max, s2 * std::pow(i, -beta) / (k2 * prior.lambda(j + 1)));
  }
  variance *= eps2;
  double tail = 0.0;
  for (std::size_t j = static_cast<std::size_t>(cut); j < n; ++j)
    tail += prior.lambda(j + 1);
  const double bias =
      cut >= 1 ? std::pow(static_cast<double>(cut), -2.0 * beta) : 1.0;
  const double saturation = eps2 * eps2 * sat_max * sat_max;

  RateReport r;
  r.regime = classify_regime(problem.p, problem.gamma);
  r.cutoff = cut;
  r.exponent = kNaN;
  r.terms = {{"variance-term", variance},
             {"bias-term", bias},
             {"prior-tail-term", tail},
             {"saturation-term", saturation}};
  r.rate = std::sqrt(variance + bias + tail + saturation);
  return r;
}

RateReport polynomial_contraction_rate(double alpha, double tau, double beta,
                                       double p, double gamma, double eps) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(tau > 0.0) || !(eps > 0.0))
    throw std::invalid_argument(
        "polynomial_contraction_rate: alpha, beta, tau, eps must be > 0");
  const Regime regime = classify_regime(p, gamma);
  const double u = regime == Regime::critical
                       ? 2.0 * alpha
                       : 1.0 + 2.0 * alpha + 2.0 * (p + gamma);
  if (u <= 0.0)
    throw UnsupportedRegime(
        "polynomial_contraction_rate: gamma <= -p-1/2-alpha, the ratio "
        "sequence is not increasing");
  const double t = (eps * eps) / (tau * tau);  // eps^2 tau^-2
  const double smoothing = std::pow(t, std::min(beta / u, 1.0));
  double second = 0.0;
  double second_exp = 0.0;
  switch (regime) {
    case Regime::supercritical:
      second = tau * std::pow(t, alpha / u);
      second_exp = 2.0 * alpha / u;
      break;
    case Regime::critical:
      second = eps * std::sqrt(pospart(std::log(tau / eps)));
      second_exp = 1.0;
      break;
    case Regime::subcritical:
      second = eps;
      second_exp = 1.0;
      break;
  }
  RateReport r;
  r.regime = regime;
  r.rate = smoothing + second;
  r.exponent = std::min(2.0 * std::min(beta / u, 1.0), second_exp);
  r.cutoff =
      static_cast<long>(std::floor(std::pow(1.0 / t, 1.0 / u) * (1.0 + 1e-12)));
  r.terms = {{"bias-term", smoothing}, {"variance-term", second}};
  return r;
}

RateReport minimax_rate(double beta, double p, double gamma, double eps) {
  if (!(beta > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("minimax_rate: beta and eps must be > 0");
  RateReport r;
  r.regime = classify_regime(p, gamma);
  r.cutoff = 0;
  switch (r.regime) {
    case Regime::supercritical:
      r.exponent = 2.0 * beta / (1.0 + 2.0 * beta + 2.0 * (p + gamma));
      r.rate = std::pow(eps, r.exponent);
      break;
    case Regime::critical:
      r.exponent = 1.0;
      r.rate = eps * std::sqrt(std::abs(std::log(eps)));
      break;
    case Regime::subcritical:
      r.exponent = 1.0;
      r.rate = eps;
      break;
  }
  return r;
}

std::vector<double> projection_estimate(const SpectralProblem& problem,
                                        std::span<const double> y, double eps,
                                        double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("projection_estimate: beta must be > 0");
  if (!(eps > 0.0))
    throw std::invalid_argument("projection_estimate: eps must be > 0");
  if (y.size() != problem.n())
    throw std::invalid_argument("projection_estimate: length mismatch");
  const double half_tilde = problem.p + problem.gamma + 0.5;
  const double expo = half_tilde > 0.0 ? 1.0 / (half_tilde + beta) : 1.0 / beta;
  const double raw = std::ceil(std::pow(eps, -expo));
  const std::size_t i1 =
      static_cast<std::size_t>(std::min<double>(raw, static_cast<double>(y.size())));
  std::vector<double> mu(y.size(), 0.0);
  for (std::size_t j = 0; j < i1; ++j) mu[j] = y[j] / problem.k[j];
  return mu;
}

std::vector<PriorChoice> optimal_prior(double beta, double p, double gamma,
                                       double alpha) {
  if (!(beta > 0.0))
    throw std::invalid_argument("optimal_prior: beta must be > 0");
  const Regime regime = classify_regime(p, gamma);
  const double ptilde = p + gamma;
  const bool have_alpha = !std::isnan(alpha);
  std::vector<PriorChoice> out;

  PriorChoice ct;
  ct.family = "constant-tau";
  ct.tau_rule = "tau = const";
  ct.tau_exponent = 0.0;
  ct.achievable = true;
  PriorChoice et;
  et.family = "eps-dependent-tau";
  et.tau_exponent = kNaN;
  et.achievable = true;

  switch (regime) {
    case Regime::supercritical: {
      ct.alpha_rule = "alpha = beta";
      ct.alpha_bound = beta;
      if (have_alpha) ct.achievable = std::abs(alpha - beta) <= 1e-12 * beta;
      const double bound = beta / 2.0 - (0.5 + ptilde);
      et.alpha_bound = bound;
      et.alpha_rule = "alpha >= beta/2 - (1/2 + p + gamma)";
      et.tau_rule = "tau = C eps^(2(beta-alpha)/(1+2beta+2(p+gamma)))";
      if (have_alpha) {
        et.achievable = alpha >= bound;
        et.tau_exponent =
            2.0 * (beta - alpha) / (1.0 + 2.0 * beta + 2.0 * ptilde);
      }
      break;
    }
    case Regime::critical: {
      ct.alpha_rule = "alpha <= beta";
      ct.alpha_bound = beta;
      if (have_alpha) ct.achievable = alpha <= beta * (1.0 + 1e-12);
      et.alpha_bound = kNaN;
      et.alpha_rule = "alpha > 0";
      et.tau_rule =
          "eps^-B >= tau >= C eps^(1-max(1/2,alpha/beta)) "
          "[log eps^-1]^(-0.5 max(1/2,alpha/beta))";
      if (have_alpha) et.tau_exponent = 1.0 - std::max(0.5, alpha / beta);
      break;
    }
    case Regime::subcritical: {
      ct.alpha_rule = "alpha <= beta (and alpha > -gamma - p - 1/2)";
      ct.alpha_bound = beta;
      if (have_alpha)
        ct.achievable = alpha <= beta * (1.0 + 1e-12) &&
                        alpha > -gamma - p - 0.5;
      et.alpha_bound = kNaN;
      et.alpha_rule = "alpha > -gamma - p - 1/2";
      et.tau_rule = "tau >= C eps^min(1/2, 1-(1+2alpha+2(p+gamma))/(2beta))";
      if (have_alpha) {
        et.achievable = alpha > -gamma - p - 0.5;
        et.tau_exponent = std::min(
            0.5, 1.0 - (1.0 + 2.0 * alpha + 2.0 * ptilde) / (2.0 * beta));
      }
      break;
    }
  }
  if (!have_alpha) {
    ct.alpha_bound = beta;
  }
  out.push_back(ct);
  out.push_back(et);
  return out;
}

kernels::RiskTerms expected_risk_terms(const SpectralProblem& problem,
                                       const PriorSpec& prior,
                                       const TruthSpec& truth, double eps) {
  if (truth.n() != problem.n())
    throw std::invalid_argument("expected_risk: length mismatch");
  std::vector<double> sigma2(problem.n());
  for (std::size_t j = 0; j < problem.n(); ++j)
    sigma2[j] = problem.sigma[j] * problem.sigma[j];
  return kernels::risk_terms(truth.coeffs, problem.k,
                             prior.lambdas(problem.n()), sigma2, eps * eps);
}

double expected_risk(const SpectralProblem& problem, const PriorSpec& prior,
                     const TruthSpec& truth, double eps) {
  return expected_risk_terms(problem, prior, truth, eps).total();
}

IndexSets index_sets(const SpectralProblem& problem, const PriorSpec& prior,
                     double eps, double eps_sigma, double c0, double a_eps,
                     double a_sig, double a_sig_eps) {
  if (!(c0 > 0.0)) throw std::invalid_argument("index_sets: c0 must be > 0");
  if (eps_sigma < 0.0)
    throw std::invalid_argument("index_sets: eps_sigma must be >= 0");
  if (!(eps > 0.0)) throw std::invalid_argument("index_sets: eps must be > 0");
  IndexSets sets;
  sets.a_eps = a_eps;
  sets.a_sig = a_sig;
  sets.a_sig_eps = a_sig_eps;
  // Same boundary slack as cutoff_index, on the exclusive side here.
  const double inv_eps2 = (1.0 + 1e-12) / (eps * eps);
  for (std::size_t j = 0; j < problem.n(); ++j) {
    const std::uint32_t i = static_cast<std::uint32_t>(j + 1);
    const double s2 = problem.sigma[j] * problem.sigma[j];
    const double lk2 = prior.lambda(i) * problem.k[j] * problem.k[j];
    if (s2 / lk2 > a_eps * inv_eps2) sets.i_eps.push_back(i);
    if (s2 < a_sig * c0 * eps_sigma) sets.i_sig.push_back(i);
    if (c0 * eps_sigma / lk2 > a_sig_eps * inv_eps2) sets.i_sig_eps.push_back(i);
  }
  return sets;
}

RateReport plugin_rate_general(const SpectralProblem& problem,
                               const PriorSpec& prior, double beta, double eps,
                               double eps_sigma, double c0) {
  if (!(beta > 0.0))
    throw std::invalid_argument("plugin_rate_general: beta must be > 0");
  if (!(c0 > 0.0))
    throw std::invalid_argument("plugin_rate_general: c0 must be > 0");
  if (!(eps > 0.0))
    throw std::invalid_argument("plugin_rate_general: eps must be > 0");
  if (eps_sigma < 0.0)
    throw std::invalid_argument("plugin_rate_general: eps_sigma must be >= 0");

  const std::size_t n = problem.n();
  const double eps2 = eps * eps;
  const double inv_eps2 = (1.0 + 1e-12) / eps2;
  const double floor = c0 * eps_sigma;

  // Membership masks at the threshold constants the plug-in rate uses.
  std::vector<char> in_eps2(n), in_eps23(n), in_eps1(n);
  std::vector<char> in_sig2(n), in_sig23(n);
  std::vector<char> in_se13(n), in_se1(n);
  std::vector<double> lk2(n), s2(n);
  for (std::size_t j = 0; j < n; ++j) {
    s2[j] = problem.sigma[j] * problem.sigma[j];
    lk2[j] = prior.lambda(j + 1) * problem.k[j] * problem.k[j];
    const double z = s2[j] / lk2[j];
    in_eps2[j] = z > 2.0 * inv_eps2;
    in_eps23[j] = z > (2.0 / 3.0) * inv_eps2;
    in_eps1[j] = z > inv_eps2;
    in_sig2[j] = s2[j] < 2.0 * floor;
    in_sig23[j] = s2[j] < (2.0 / 3.0) * floor;
    const double ze = floor / lk2[j];
    in_se13[j] = ze > inv_eps2 / 3.0;
    in_se1[j] = ze > inv_eps2;
  }

  bool simplified = true;  // I_sigma(2/3) subset of I_eps(2)
  for (std::size_t j = 0; j < n; ++j)
    if (in_sig23[j] && !in_eps2[j]) { simplified = false; break; }

  double variance = 0.0, var_floor = 0.0, tail = 0.0, tail_floor = 0.0;
  double sat_sig = 0.0, sat_floor = 0.0, bias = 0.0;
  bool bias_empty = true;
  for (std::size_t j = 0; j < n; ++j) {
    const double i = static_cast<double>(j + 1);
    const double k2 = problem.k[j] * problem.k[j];
    const double lam = prior.lambda(j + 1);
    if (simplified) {
      if (!in_eps2[j]) variance += s2[j] / k2;
      if (in_eps2[j]) tail += lam;
      if (!in_eps1[j])
        sat_sig = std::max(sat_sig, s2[j] * std::pow(i, -beta) / (k2 * lam));
      if (in_eps1[j]) {
        bias = bias_empty ? std::pow(i, -2.0 * beta)
                          : std::max(bias, std::pow(i, -2.0 * beta));
        bias_empty = false;
      }
    } else {
      if (!in_eps2[j] || !in_sig2[j]) variance += s2[j] / k2;
      if (in_sig2[j] && !in_se13[j]) var_floor += 1.0 / k2;
      if (in_eps23[j]) tail += lam;
      if (in_sig2[j] && in_se13[j]) tail_floor += lam;
      if (!in_eps1[j])
        sat_sig = std::max(sat_sig, s2[j] * std::pow(i, -beta) / (k2 * lam));
      if (!in_se1[j])
        sat_floor =
            std::max(sat_floor, eps_sigma * std::pow(i, -beta) / (k2 * lam));
      if (in_eps1[j] && in_se1[j]) {
        bias = bias_empty ? std::pow(i, -2.0 * beta)
                          : std::max(bias, std::pow(i, -2.0 * beta));
        bias_empty = false;
      }
    }
  }
  variance *= eps2;
  var_floor *= eps2 * floor;
  const double saturation =
      eps2 * eps2 * std::max(sat_sig * sat_sig, sat_floor * sat_floor);

  RateReport r;
  r.regime = classify_regime(problem.p, problem.gamma);
  r.exponent = kNaN;
  r.cutoff = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (!in_eps1[j]) r.cutoff = static_cast<long>(j + 1);
  const double total =
      variance + var_floor + tail + tail_floor + saturation + bias;
  r.rate = std::sqrt(total);
  r.terms = {{"variance-term", variance},
             {"variance-floor-term", var_floor},
             {"prior-tail-term", tail},
             {"prior-floor-tail-term", tail_floor},
             {"saturation-term", saturation},
             {"bias-term", bias},
             {"simplified", simplified ? 1.0 : 0.0}};
  return r;
}

RateReport plugin_rate_polynomial(double alpha, double tau, double beta,
                                  double p, double gamma, double eps,
                                  double eps_sigma, double branch_c) {
  if (gamma >= 0.0)
    throw UnsupportedRegime(
        "plugin_rate_polynomial: only gamma < 0 is covered (for gamma >= 0 "
        "the noise spectrum dominates the estimation error)");
  if (!(alpha > 0.0) || !(beta > 0.0) || !(tau > 0.0) || !(eps > 0.0))
    throw std::invalid_argument(
        "plugin_rate_polynomial: alpha, beta, tau, eps must be > 0");
  if (eps_sigma < 0.0)
    throw std::invalid_argument("plugin_rate_polynomial: eps_sigma >= 0");
  const double half_u = alpha + 0.5 + p + gamma;
  if (half_u <= 0.0)
    throw UnsupportedRegime(
        "plugin_rate_polynomial: gamma <= -p-1/2-alpha out of scope");

  const double t = (eps * eps) / (tau * tau);
  const double threshold = branch_c * std::pow(t, -gamma / half_u);
  if (eps_sigma < threshold) {
    RateReport r = polynomial_contraction_rate(alpha, tau, beta, p, gamma, eps);
    r.terms["branch"] = 1.0;
    r.terms["threshold"] = threshold;
    return r;
  }

  const double ptilde = p + gamma;
  const bool log_active =
      std::abs(1.0 + 2.0 * ptilde) <= 1e-12 * std::max(1.0, 2.0 * std::abs(ptilde));
  const double log_factor =
      log_active ? pospart(std::log(1.0 / eps_sigma)) : 1.0;
  const double b = tau * tau / (eps * eps * eps_sigma);  // eps_sigma^-1 eps^-2 tau^2
  const double up = 1.0 + 2.0 * alpha + 2.0 * p;
  const double term1 = eps * eps * log_factor;
  const double term2 = tau * tau * std::pow(b, -2.0 * alpha / up);
  const double term3 = std::pow(b, -2.0 * beta / up);
  const double term4 = std::pow(eps / tau, 4.0) *
                       std::pow(eps_sigma,
                                pospart(1.0 + 2.0 * alpha + 2.0 * ptilde - beta) /
                                    gamma);
  RateReport r;
  r.regime = classify_regime(p, gamma);
  r.exponent = kNaN;
  r.cutoff = static_cast<long>(std::floor(std::pow(b, 1.0 / up) * (1.0 + 1e-12)));
  r.rate = std::sqrt(term1 + term2 + term3 + term4);
  r.terms = {{"variance-term", term1},
             {"prior-tail-term", term2},
             {"bias-term", term3},
             {"saturation-term", term4},
             {"branch", 2.0},
             {"threshold", threshold}};
  return r;
}

}  // namespace seqinv
