#include "seqinv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "seqinv/ebayes.hpp"
#include "seqinv/io.hpp"
#include "seqinv/posterior.hpp"
#include "seqinv/rates.hpp"
#include "seqinv/rng.hpp"
#include "seqinv/varest.hpp"

namespace seqinv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Replicate-indexed work; each index writes only its own slot, so the
// reduction order (and therefore the result) is independent of scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    ss += d * d;
  }
  const double se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return {mean, se};
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return kNaN;
  const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

std::vector<double> unit_grid(std::size_t points) {
  std::vector<double> x(points);
  for (std::size_t j = 0; j < points; ++j)
    x[j] = static_cast<double>(j) / static_cast<double>(points - 1);
  return x;
}

std::vector<double> sigma_squared(const SpectralProblem& problem) {
  std::vector<double> s2(problem.n());
  for (std::size_t j = 0; j < problem.n(); ++j)
    s2[j] = problem.sigma[j] * problem.sigma[j];
  return s2;
}

// Smallest positive grid entry for bracket sizing (the grid may end in 0).
double eps_back_safe(const ExperimentConfig& config) {
  for (auto it = config.eps.rbegin(); it != config.eps.rend(); ++it)
    if (*it > 0.0) return *it;
  return 1.0;
}

// Squared-risk exponent predicted for this cell's prior; the minimax
// benchmark when the closed form does not cover the inputs.
double theory_squared_exponent(const ExperimentConfig& cfg, double alpha) {
  const double mid = cfg.eps[cfg.eps.size() / 2];
  try {
    return 2.0 * polynomial_contraction_rate(alpha, cfg.tau, cfg.beta, cfg.p,
                                             cfg.gamma, mid)
                     .exponent;
  } catch (const UnsupportedRegime&) {
    return 2.0 * minimax_rate(cfg.beta, cfg.p, cfg.gamma, mid).exponent;
  }
}

}  // namespace

std::size_t worker_count() {
  if (const char* env = std::getenv("SEQINV_THREADS")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

const char* mode_name(ExperimentMode m) {
  switch (m) {
    case ExperimentMode::risk_curve: return "risk-curve";
    case ExperimentMode::contraction_prob: return "contraction-prob";
    case ExperimentMode::coverage: return "coverage";
    case ExperimentMode::eb_sweep: return "eb-sweep";
    case ExperimentMode::plugin_study: return "plugin-study";
  }
  return "?";
}

ExperimentMode mode_from_name(const std::string& name) {
  if (name == "risk-curve") return ExperimentMode::risk_curve;
  if (name == "contraction-prob") return ExperimentMode::contraction_prob;
  if (name == "coverage") return ExperimentMode::coverage;
  if (name == "eb-sweep") return ExperimentMode::eb_sweep;
  if (name == "plugin-study") return ExperimentMode::plugin_study;
  throw std::invalid_argument("unknown experiment mode: " + name);
}

void ExperimentConfig::validate() const {
  if (eps.empty()) throw std::invalid_argument("experiment: eps grid is empty");
  for (std::size_t j = 1; j < eps.size(); ++j)
    if (!(eps[j] < eps[j - 1]))
      throw std::invalid_argument("experiment: eps grid must be strictly decreasing");
  for (double e : eps)
    if (e < 0.0) throw std::invalid_argument("experiment: eps must be >= 0");
  if (replicates < 1)
    throw std::invalid_argument("experiment: replicates must be >= 1");
  if (alphas.empty())
    throw std::invalid_argument("experiment: alpha grid is empty");
  if (n == 0) throw std::invalid_argument("experiment: n must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("experiment: beta must be > 0");
  if (!(tau > 0.0)) throw std::invalid_argument("experiment: tau must be > 0");
  if (mode == ExperimentMode::plugin_study && m < 2)
    throw std::invalid_argument("experiment: plugin-study needs m >= 2");
}

SpectralProblem ExperimentConfig::make_problem() const {
  return volterra ? volterra_problem(n, gamma, noise_scale)
                  : power_law_problem(n, p, k_scale, gamma, noise_scale);
}

TruthSpec ExperimentConfig::make_truth() const {
  return smooth_truth(n, beta);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.mode = mode_from_name(j.value("mode", std::string("risk-curve")));
  c.n = j.value("n", c.n);
  if (j.contains("forward")) c.volterra = j["forward"] == "volterra";
  c.p = j.value("p", c.p);
  c.k_scale = j.value("k_scale", c.k_scale);
  c.gamma = j.value("gamma", c.gamma);
  c.noise_scale = j.value("noise_scale", c.noise_scale);
  c.beta = j.value("beta", c.beta);
  if (j.contains("alphas")) c.alphas = j["alphas"].get<std::vector<double>>();
  else if (j.contains("alpha")) c.alphas = {j["alpha"].get<double>()};
  c.tau = j.value("tau", c.tau);
  if (j.contains("eps")) c.eps = j["eps"].get<std::vector<double>>();
  if (j.contains("n_obs")) {
    // eps = n_obs^-1/2 calibration; both parameterisations are accepted.
    c.eps.clear();
    for (double nobs : j["n_obs"].get<std::vector<double>>())
      c.eps.push_back(1.0 / std::sqrt(nobs));
  }
  c.replicates = j.value("replicates", c.replicates);
  c.seed = j.value("seed", c.seed);
  c.draws = j.value("draws", c.draws);
  c.level = j.value("level", c.level);
  c.x_points = j.value("x_points", c.x_points);
  c.m_factor = j.value("m_factor", c.m_factor);
  c.m = j.value("m", c.m);
  c.c0 = j.value("c0", c.c0);
  c.M_override = j.value("M", c.M_override);
  c.eps_sigma_override = j.value("eps_sigma", c.eps_sigma_override);
  c.slope_tol = j.value("slope_tol", c.slope_tol);
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = mode_name(mode);
  j["n"] = n;
  j["forward"] = volterra ? "volterra" : "power-law";
  j["p"] = p;
  j["k_scale"] = k_scale;
  j["gamma"] = gamma;
  j["noise_scale"] = noise_scale;
  j["beta"] = beta;
  j["alphas"] = alphas;
  j["tau"] = tau;
  j["eps"] = eps;
  nlohmann::json nobs = nlohmann::json::array();
  for (double e : eps) nobs.push_back(e > 0.0 ? 1.0 / (e * e) : kNaN);
  j["n_obs_equivalent"] = nobs;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["draws"] = draws;
  j["level"] = level;
  j["x_points"] = x_points;
  j["m_factor"] = m_factor;
  j["m"] = m;
  j["c0"] = c0;
  j["slope_tol"] = slope_tol;
  if (M_override >= 0) j["M"] = M_override;
  if (eps_sigma_override >= 0) j["eps_sigma"] = eps_sigma_override;
  return j;
}

void ExperimentResult::write_csv(std::ostream& os) const {
  os << "cell,eps,alpha,tau,statistic,se\n";
  for (const auto& r : rows)
    os << r.cell << "," << io::fmt(r.eps) << "," << io::fmt(r.alpha) << ","
       << io::fmt(r.tau) << "," << io::fmt(r.statistic) << "," << io::fmt(r.se)
       << "\n";
}

nlohmann::json ExperimentResult::summary_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["cells"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["cells"].push_back({{"cell", r.cell},
                          {"eps", r.eps},
                          {"alpha", r.alpha},
                          {"tau", r.tau},
                          {"statistic", r.statistic},
                          {"se", r.se}});
  }
  j["slope"] = std::isnan(slope) ? nlohmann::json() : nlohmann::json(slope);
  j["slope_se"] =
      std::isnan(slope_se) ? nlohmann::json() : nlohmann::json(slope_se);
  j["theory_exponent"] = std::isnan(theory_exponent)
                             ? nlohmann::json()
                             : nlohmann::json(theory_exponent);
  if (!std::isnan(slope) && !std::isnan(theory_exponent)) {
    const double gap = std::abs(slope - theory_exponent);
    j["comparison"] = {{"gap", gap},
                       {"tolerance", slope_tol},
                       {"pass", gap <= slope_tol}};
  }
  j["dropped_cells"] = dropped_cells;
  if (!extra.is_null()) j["detail"] = extra;
  return j;
}

ExperimentResult risk_curve(const ExperimentConfig& config) {
  config.validate();
  const SpectralProblem problem = config.make_problem();
  const TruthSpec truth = config.make_truth();
  const auto s2 = sigma_squared(problem);

  ExperimentResult result;
  result.mode = mode_name(ExperimentMode::risk_curve);
  long cell = 0;
  for (double alpha : config.alphas) {
    const PriorSpec prior{alpha, config.tau};
    const auto lambda = prior.lambdas(config.n);
    for (double eps : config.eps) {
      std::vector<double> risks(config.replicates, 0.0);
      if (eps > 0.0) {
        parallel_for(config.replicates, [&](std::size_t r) {
          const auto obs = simulate(problem, truth, eps,
                                    rng::derive(config.seed, cell, r));
          const auto post =
              conjugate_posterior_seq(obs.y, problem.k, lambda, s2, eps);
          risks[r] = posterior_l2_risk(post, truth);
        });
      }
      // eps = 0 short-circuits to the noiseless point mass at the truth.
      const MeanSe ms = mean_se(risks);
      result.rows.push_back({cell, eps, alpha, config.tau, ms.mean, ms.se});
      ++cell;
    }
  }
  result.theory_exponent = theory_squared_exponent(config, config.alphas[0]);
  result.slope_tol = config.slope_tol;
  std::size_t usable = 0;
  for (const auto& row : result.rows)
    if (row.eps > 0.0 && row.statistic > 0.0) ++usable;
  if (config.alphas.size() == 1 && usable >= 3) {
    const SlopeFit fit = slope(result);
    result.slope = fit.slope;
    result.slope_se = fit.se;
    result.dropped_cells = fit.dropped;
  }
  return result;
}

SlopeFit slope(const ExperimentResult& result) {
  std::vector<double> xs, ys;
  std::vector<long> cells;
  for (const auto& r : result.rows) {
    if (r.eps > 0.0 && r.statistic > 0.0) {
      xs.push_back(std::log(r.eps));
      ys.push_back(std::log(r.statistic));
      cells.push_back(r.cell);
    }
  }
  if (xs.size() < 3)
    throw std::invalid_argument("slope: need at least 3 usable cells");

  const auto fit = [](std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = sxy / sxx;
    const double a = my - b * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - a - b * x[i];
      rss += r * r;
    }
    const double se =
        x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    return std::tuple{b, se, std::sqrt(rss / n)};
  };

  auto [b_full, se_full, rms_full] = fit(xs, ys);
  SlopeFit out{b_full, se_full, {}};
  if (xs.size() >= 4) {
    // Largest eps comes first (the grid is strictly decreasing).
    std::span<const double> x1(xs.data() + 1, xs.size() - 1);
    std::span<const double> y1(ys.data() + 1, ys.size() - 1);
    auto [b_drop, se_drop, rms_drop] = fit(x1, y1);
    if (rms_drop < 0.8 * rms_full) {
      out.slope = b_drop;
      out.se = se_drop;
      out.dropped = {cells.front()};
    }
  }
  return out;
}

ExperimentResult contraction_probability(const ExperimentConfig& config,
                                         double m_factor) {
  config.validate();
  if (!(m_factor > 0.0))
    throw std::invalid_argument("contraction_probability: m_factor must be > 0");
  const SpectralProblem problem = config.make_problem();
  const TruthSpec truth = config.make_truth();
  const auto s2 = sigma_squared(problem);

  ExperimentResult result;
  result.mode = mode_name(ExperimentMode::contraction_prob);
  long cell = 0;
  for (double alpha : config.alphas) {
    const PriorSpec prior{alpha, config.tau};
    const auto lambda = prior.lambdas(config.n);
    for (double eps : config.eps) {
      const double radius =
          m_factor * polynomial_contraction_rate(alpha, config.tau, config.beta,
                                                 config.p, config.gamma, eps)
                         .rate;
      std::vector<double> probs(config.replicates, 0.0);
      parallel_for(config.replicates, [&](std::size_t r) {
        const std::uint64_t rs = rng::derive(config.seed, cell, r);
        const auto obs = simulate(problem, truth, eps, rs);
        const auto post =
            conjugate_posterior_seq(obs.y, problem.k, lambda, s2, eps);
        std::size_t outside = 0;
        for (std::size_t d = 0; d < config.draws; ++d) {
          double dist2 = 0.0;
          for (std::size_t i = 0; i < config.n; ++i) {
            const double v = post.variance[i];
            const double draw =
                post.mean[i] +
                (v > 0.0 ? std::sqrt(v) * rng::normal(rs, rng::kPosteriorDraw,
                                                      d + 1, i + 1)
                         : 0.0);
            const double diff = draw - truth.coeffs[i];
            dist2 += diff * diff;
          }
          if (std::sqrt(dist2) >= radius) ++outside;
        }
        probs[r] = static_cast<double>(outside) /
                   static_cast<double>(config.draws);
      });
      const MeanSe ms = mean_se(probs);
      result.rows.push_back({cell, eps, alpha, config.tau, ms.mean, ms.se});
      ++cell;
    }
  }
  return result;
}

ExperimentResult coverage_study(const ExperimentConfig& config) {
  config.validate();
  if (!(config.level > 0.0 && config.level < 1.0))
    throw std::invalid_argument("coverage_study: level must lie in (0,1)");
  const SpectralProblem problem = config.make_problem();
  const TruthSpec truth = config.make_truth();
  const auto s2 = sigma_squared(problem);
  const auto grid = unit_grid(config.x_points);
  const BasisCache basis(BasisKind::input, grid, config.n);
  const auto truth_curve = reconstruct(truth.coeffs, basis);

  ExperimentResult result;
  result.mode = mode_name(ExperimentMode::coverage);
  long cell = 0;
  for (double alpha : config.alphas) {
    const PriorSpec prior{alpha, config.tau};
    const auto lambda = prior.lambdas(config.n);
    for (double eps : config.eps) {
      std::vector<double> fractions(config.replicates, 0.0);
      parallel_for(config.replicates, [&](std::size_t r) {
        const auto obs = simulate(problem, truth, eps,
                                  rng::derive(config.seed, cell, r));
        const auto post =
            conjugate_posterior_seq(obs.y, problem.k, lambda, s2, eps);
        const Band band = credible_bands(post, basis, config.level);
        std::size_t covered = 0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
          if (band.lower[j] <= truth_curve[j] && truth_curve[j] <= band.upper[j])
            ++covered;
        }
        fractions[r] =
            static_cast<double>(covered) / static_cast<double>(grid.size());
      });
      const MeanSe ms = mean_se(fractions);
      result.rows.push_back({cell, eps, alpha, config.tau, ms.mean, ms.se});
      ++cell;
    }
  }
  return result;
}

ExperimentResult eb_sweep(const ExperimentConfig& config) {
  config.validate();
  const SpectralProblem problem = config.make_problem();
  const TruthSpec truth = config.make_truth();
  const auto s2 = sigma_squared(problem);

  ExperimentResult result;
  result.mode = mode_name(ExperimentMode::eb_sweep);
  result.extra = nlohmann::json::array();
  long cell = 0;
  for (double alpha : config.alphas) {
    // tau-hat grows like a power of 1/eps once alpha exceeds the truth
    // smoothness, so the sweep widens the default search bracket with alpha.
    const double eps_min = eps_back_safe(config);
    EbSearch search;
    search.lo = std::min(1e-8, std::pow(eps_min, 3.0));
    search.hi = std::max(1e8, std::pow(eps_min, -(4.0 * alpha + 2.0)));
    for (double eps : config.eps) {
      std::vector<double> taus(config.replicates, 0.0);
      std::vector<double> risks(config.replicates, 0.0);
      parallel_for(config.replicates, [&](std::size_t r) {
        const auto obs = simulate(problem, truth, eps,
                                  rng::derive(config.seed, cell, r));
        const EbResult eb = eb_tau(obs.y, problem, alpha, eps, search);
        taus[r] = eb.tau_hat;
        std::vector<double> lambda(config.n);
        for (std::size_t i = 0; i < config.n; ++i)
          lambda[i] = eb.tau_hat *
                      std::pow(static_cast<double>(i + 1), -2.0 * alpha - 1.0);
        const auto post =
            conjugate_posterior_seq(obs.y, problem.k, lambda, s2, eps);
        risks[r] = posterior_l2_risk(post, truth);
      });
      std::vector<double> sorted = taus;
      std::sort(sorted.begin(), sorted.end());
      const double median = quantile_sorted(sorted, 0.5);
      const MeanSe tau_ms = mean_se(taus);
      const MeanSe risk_ms = mean_se(risks);
      result.rows.push_back({cell, eps, alpha, config.tau, median, tau_ms.se});
      result.extra.push_back(
          {{"cell", cell},
           {"tau_median", median},
           {"tau_mean", tau_ms.mean},
           {"tau_q025", quantile_sorted(sorted, 0.025)},
           {"tau_q25", quantile_sorted(sorted, 0.25)},
           {"tau_q75", quantile_sorted(sorted, 0.75)},
           {"tau_q975", quantile_sorted(sorted, 0.975)},
           {"risk_mean", risk_ms.mean},
           {"risk_se", risk_ms.se}});
      ++cell;
    }
  }
  return result;
}

ExperimentResult plugin_study(const ExperimentConfig& config) {
  config.validate();
  const SpectralProblem problem = config.make_problem();
  const TruthSpec truth = config.make_truth();
  const auto s2 = sigma_squared(problem);

  // Planner values are shared across cells; overrides win when given.
  long M = config.M_override;
  double eps_sigma = config.eps_sigma_override;
  if (M < 0 || eps_sigma < 0.0) {
    const TruncationPlan plan =
        truncation_planner(config.m, config.gamma, config.noise_scale, config.c0);
    if (M < 0) M = plan.M;
    if (eps_sigma < 0.0) eps_sigma = plan.eps_sigma;
  }

  ExperimentResult result;
  result.mode = mode_name(ExperimentMode::plugin_study);
  result.extra = {{"M", M}, {"eps_sigma", eps_sigma}, {"m", config.m}};
  long cell = 0;
  for (double alpha : config.alphas) {
    const PriorSpec prior{alpha, config.tau};
    const auto lambda = prior.lambdas(config.n);
    for (double eps0 : config.eps) {
      if (!(eps0 > 0.0))
        throw std::invalid_argument("plugin_study: eps0 must be > 0");
      const double eps_bar = eps0 / std::sqrt(static_cast<double>(config.m));
      std::vector<double> ratios(config.replicates, 0.0);
      parallel_for(config.replicates, [&](std::size_t r) {
        const auto rep = simulate_replicated(problem, truth, eps0, config.m,
                                             rng::derive(config.seed, cell, r));
        const SampleStats stats = sample_stats(rep);
        // s_i^2 estimates Var(Y_ij) = eps0^2 sigma_i^2; rescale so the
        // truncated estimator targets sigma_i^2 itself.
        std::vector<double> s2_hat = stats.var;
        for (double& v : s2_hat) v /= eps0 * eps0;
        const VarianceEstimate est =
            truncated_estimator(s2_hat, M, eps_sigma, config.c0, config.m);
        const auto plug = conjugate_posterior_seq(stats.mean, problem.k,
                                                  lambda, est.tilde, eps_bar);
        const auto known = conjugate_posterior_seq(stats.mean, problem.k,
                                                   lambda, s2, eps_bar);
        ratios[r] = posterior_l2_risk(plug, truth) /
                    posterior_l2_risk(known, truth);
      });
      const MeanSe ms = mean_se(ratios);
      result.rows.push_back({cell, eps0, alpha, config.tau, ms.mean, ms.se});
      ++cell;
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.mode) {
    case ExperimentMode::risk_curve: return risk_curve(config);
    case ExperimentMode::contraction_prob:
      return contraction_probability(config, config.m_factor);
    case ExperimentMode::coverage: return coverage_study(config);
    case ExperimentMode::eb_sweep: return eb_sweep(config);
    case ExperimentMode::plugin_study: return plugin_study(config);
  }
  throw std::logic_error("unreachable");
}

}  // namespace seqinv
