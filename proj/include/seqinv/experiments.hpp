#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "seqinv/model.hpp"
#include "seqinv/spectral.hpp"

#include "json.hpp"

namespace seqinv {

enum class ExperimentMode {
  risk_curve,
  contraction_prob,
  coverage,
  eb_sweep,
  plugin_study,
};

const char* mode_name(ExperimentMode m);
ExperimentMode mode_from_name(const std::string& name);

// One grid specification drives all study modes; unused knobs are ignored
// by modes that do not need them.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::risk_curve;

  std::size_t n = 2000;
  bool volterra = true;      // else power-law forward k_i = k_scale i^-p
  double p = 1.0;
  double k_scale = 1.0;
  double gamma = 0.5;
  double noise_scale = 2.0;  // sigma_i = noise_scale i^gamma
  double beta = 1.0;         // truth smoothness; beta=1 uses the i^-3/2 sin(i) truth

  std::vector<double> alphas = {1.0};
  double tau = 1.0;
  std::vector<double> eps;   // strictly decreasing; eps = n_obs^-1/2 accepted too
  std::size_t replicates = 100;
  std::uint64_t seed = 0;

  std::size_t draws = 500;    // posterior draws per data set
  double level = 0.95;        // credible level
  std::size_t x_points = 101; // coverage grid resolution
  double m_factor = 5.0;      // contraction radius multiplier

  std::size_t m = 100;        // replicates per index (plugin-study)
  double c0 = 1.0;
  long M_override = -1;           // plugin-study: <0 means use the planner
  double eps_sigma_override = -1; // plugin-study: <0 means use the planner
  double slope_tol = 0.15;    // slope-vs-theory pass window in the summary

  void validate() const;
  SpectralProblem make_problem() const;
  TruthSpec make_truth() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct CellResult {
  long cell = 0;
  double eps = 0.0;
  double alpha = 0.0;
  double tau = 0.0;
  double statistic = 0.0;
  double se = 0.0;
};

struct ExperimentResult {
  std::string mode;
  std::vector<CellResult> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_se = std::numeric_limits<double>::quiet_NaN();
  double theory_exponent = std::numeric_limits<double>::quiet_NaN();
  double slope_tol = 0.15;
  std::vector<long> dropped_cells;
  nlohmann::json extra;  // per-mode details (quantiles, diagnostics, ...)

  void write_csv(std::ostream& os) const;  // one row per cell
  nlohmann::json summary_json() const;
};

struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
  std::vector<long> dropped;
};

// Mean posterior L2 risk at the truth, per (alpha, eps) cell.
ExperimentResult risk_curve(const ExperimentConfig& config);

// OLS of log statistic on log eps; drops the largest-eps cell when doing so
// shrinks the RMS residual by more than 20% (the drop is recorded).
SlopeFit slope(const ExperimentResult& result);

// Posterior mass outside the m_factor * theoretical-rate ball around the
// truth, averaged over data replicates.
ExperimentResult contraction_probability(const ExperimentConfig& config,
                                         double m_factor);

// Fraction of grid points whose pointwise band contains the truncated truth.
ExperimentResult coverage_study(const ExperimentConfig& config);

// Marginal-likelihood tau-hat sampling distribution and plug-in risk.
ExperimentResult eb_sweep(const ExperimentConfig& config);

// Plug-in posterior risk relative to the known-variance posterior on shared
// replicated data; the eps grid holds the per-replicate noise level eps0 and
// the posterior runs on row means at eps0/sqrt(m).
ExperimentResult plugin_study(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

// Worker-pool size: SEQINV_THREADS caps it, 0 or unset means auto.
std::size_t worker_count();

}  // namespace seqinv
