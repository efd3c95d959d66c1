#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "seqinv/ebayes.hpp"
#include "seqinv/experiments.hpp"
#include "seqinv/io.hpp"
#include "seqinv/model.hpp"
#include "seqinv/posterior.hpp"
#include "seqinv/rates.hpp"
#include "seqinv/rng.hpp"
#include "seqinv/varest.hpp"

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared flags describing the spectral problem.
struct ProblemFlags {
  std::size_t n = 2000;
  std::string forward = "volterra";
  double p = 1.0;
  double k_scale = 1.0;
  double gamma = 0.5;
  double noise_scale = 2.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n, "truncation level N")->capture_default_str();
    cmd->add_option("--forward", forward, "forward operator: volterra | power-law")
        ->check(CLI::IsMember({"volterra", "power-law"}))
        ->capture_default_str();
    cmd->add_option("--p", p, "ill-posedness exponent (power-law forward)")
        ->capture_default_str();
    cmd->add_option("--k-scale", k_scale, "forward scale (power-law forward)")
        ->capture_default_str();
    cmd->add_option("--gamma", gamma, "noise exponent: sigma_i = scale i^gamma")
        ->capture_default_str();
    cmd->add_option("--noise-scale", noise_scale, "noise scale")
        ->capture_default_str();
  }

  seqinv::SpectralProblem make() const {
    return forward == "volterra"
               ? seqinv::volterra_problem(n, gamma, noise_scale)
               : seqinv::power_law_problem(n, p, k_scale, gamma, noise_scale);
  }
};

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file;
  std::ostream& os = open_output(file, path);
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path);
}

seqinv::Observations load_observations(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open input file: " + path);
  return seqinv::io::read_observations(is);
}

json observations_json(const seqinv::Observations& obs) {
  return json{{"eps", obs.eps}, {"seed", obs.seed}, {"n", obs.n()}, {"y", obs.y}};
}

int run(int argc, char** argv) {
  CLI::App app{"Conjugate Bayesian inference for mildly ill-posed inverse "
               "problems with heterogeneous Gaussian noise"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "draw one data set from the sequence model");
  ProblemFlags sim_pf;
  sim_pf.attach(sim);
  double sim_eps = 1e-3, sim_beta = 1.0;
  std::uint64_t sim_seed = 0;
  std::string sim_out, sim_format = "csv";
  sim->add_option("--beta", sim_beta, "truth smoothness")->capture_default_str();
  sim->add_option("--eps", sim_eps, "noise level")->capture_default_str();
  sim->add_option("--seed", sim_seed, "RNG seed")->required();
  sim->add_option("-o,--output", sim_out, "output path (default stdout)")
      ->capture_default_str();
  sim->add_option("--format", sim_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // ---- posterior ----
  auto* post = app.add_subcommand("posterior", "conjugate posterior from an observation file");
  ProblemFlags post_pf;
  post_pf.attach(post);
  std::string post_in, post_out, post_bands, post_samples, post_format = "csv";
  double post_alpha = 1.0, post_tau = 1.0, post_level = 0.95;
  std::size_t post_xpoints = 101, post_sample = 0;
  std::uint64_t post_seed = 0;
  bool post_seed_set = false;
  post->add_option("--input", post_in, "observations CSV")->required();
  post->add_option("--alpha", post_alpha, "prior smoothness")->capture_default_str();
  post->add_option("--tau", post_tau, "prior scale (sd)")->capture_default_str();
  post->add_option("-o,--output", post_out, "posterior CSV (default stdout)")
      ->capture_default_str();
  post->add_option("--bands", post_bands, "also write pointwise bands to this path")
      ->capture_default_str();
  post->add_option("--level", post_level, "credible level")->capture_default_str();
  post->add_option("--x-points", post_xpoints, "band grid resolution")
      ->capture_default_str();
  post->add_option("--sample", post_sample, "also draw this many posterior samples")
      ->capture_default_str();
  post->add_option("--samples-out", post_samples, "sample output path")
      ->capture_default_str();
  post->add_option("--seed", post_seed, "RNG seed (required with --sample)")
      ->each([&](const std::string&) { post_seed_set = true; });
  post->add_option("--format", post_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // ---- rates ----
  auto* rates_cmd = app.add_subcommand("rates", "theoretical rate report (JSON)");
  double r_alpha = 1.0, r_tau = 1.0, r_beta = 1.0, r_p = 1.0, r_gamma = 0.5;
  double r_eps = 1e-3, r_eps_sigma = -1.0, r_c0 = 1.0;
  std::string r_out;
  rates_cmd->add_option("--alpha", r_alpha, "prior smoothness")->capture_default_str();
  rates_cmd->add_option("--tau", r_tau, "prior scale (sd)")->capture_default_str();
  rates_cmd->add_option("--beta", r_beta, "truth smoothness")->capture_default_str();
  rates_cmd->add_option("--p", r_p, "ill-posedness exponent")->capture_default_str();
  rates_cmd->add_option("--gamma", r_gamma, "noise exponent")->capture_default_str();
  rates_cmd->add_option("--eps", r_eps, "noise level")->capture_default_str();
  rates_cmd->add_option("--eps-sigma", r_eps_sigma,
                        "variance-estimation error level (adds plug-in rates)")
      ->capture_default_str();
  rates_cmd->add_option("--c0", r_c0, "plug-in floor constant")->capture_default_str();
  rates_cmd->add_option("-o,--output", r_out, "output path (default stdout)")
      ->capture_default_str();

  // ---- minimax ----
  auto* mm = app.add_subcommand("minimax", "minimax rate (JSON)");
  double mm_beta = 1.0, mm_p = 1.0, mm_gamma = 0.5, mm_eps = 1e-3;
  std::string mm_out;
  mm->add_option("--beta", mm_beta, "truth smoothness")->capture_default_str();
  mm->add_option("--p", mm_p, "ill-posedness exponent")->capture_default_str();
  mm->add_option("--gamma", mm_gamma, "noise exponent")->capture_default_str();
  mm->add_option("--eps", mm_eps, "noise level")->capture_default_str();
  mm->add_option("-o,--output", mm_out, "output path (default stdout)")
      ->capture_default_str();

  // ---- eb ----
  auto* eb = app.add_subcommand("eb", "empirical Bayes tau-hat from an observation file");
  ProblemFlags eb_pf;
  eb_pf.attach(eb);
  std::string eb_in, eb_out, eb_post_out;
  double eb_alpha = 1.0, eb_lo = 1e-8, eb_hi = 1e8, eb_tol = 1e-6;
  eb->add_option("--input", eb_in, "observations CSV")->required();
  eb->add_option("--alpha", eb_alpha, "prior smoothness")->capture_default_str();
  eb->add_option("--lo", eb_lo, "search bracket lower end")->capture_default_str();
  eb->add_option("--hi", eb_hi, "search bracket upper end")->capture_default_str();
  eb->add_option("--tol", eb_tol, "relative tolerance")->capture_default_str();
  eb->add_option("-o,--output", eb_out, "EB result JSON (default stdout)")
      ->capture_default_str();
  eb->add_option("--posterior-out", eb_post_out, "also write the plug-in posterior CSV")
      ->capture_default_str();

  // ---- varest ----
  auto* ve = app.add_subcommand("varest", "variance estimation from simulated repeated observations");
  ProblemFlags ve_pf;
  ve_pf.gamma = -1.0;
  ve_pf.attach(ve);
  std::size_t ve_m = 100;
  double ve_eps0 = 1.0, ve_c0 = 1.0, ve_eps_sigma = -1.0, ve_c_sigma = -1.0;
  double ve_beta = 1.0;
  long ve_M = -1;
  std::uint64_t ve_seed = 0;
  std::string ve_out, ve_json, ve_format = "csv";
  ve->add_option("--m", ve_m, "replicates per index")->capture_default_str();
  ve->add_option("--beta", ve_beta, "truth smoothness")->capture_default_str();
  ve->add_option("--eps0", ve_eps0, "per-replicate noise level")->capture_default_str();
  ve->add_option("--c0", ve_c0, "floor constant")->capture_default_str();
  ve->add_option("--M", ve_M, "truncation index (default: planner)")
      ->capture_default_str();
  ve->add_option("--eps-sigma", ve_eps_sigma,
                 "variance error level (default: planner)")
      ->capture_default_str();
  ve->add_option("--c-sigma", ve_c_sigma,
                 "sup of sigma_i^2 for the consistency bound (default: sigma_1^2)")
      ->capture_default_str();
  ve->add_option("--seed", ve_seed, "RNG seed")->required();
  ve->add_option("-o,--output", ve_out, "estimate CSV (default stdout)")
      ->capture_default_str();
  ve->add_option("--json", ve_json, "also write planner/bound diagnostics JSON")
      ->capture_default_str();
  ve->add_option("--format", ve_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // ---- experiment ----
  auto* ex = app.add_subcommand("experiment", "Monte Carlo study driven by a JSON config");
  std::string ex_config, ex_out, ex_summary, ex_mode;
  std::uint64_t ex_seed = 0;
  bool ex_seed_set = false;
  long ex_replicates = -1;
  ex->add_option("--config", ex_config, "config JSON (flags override file values)")
      ->capture_default_str();
  ex->add_option("--mode", ex_mode,
                 "risk-curve | contraction-prob | coverage | eb-sweep | plugin-study")
      ->capture_default_str();
  ex->add_option("--seed", ex_seed, "RNG seed")
      ->each([&](const std::string&) { ex_seed_set = true; });
  ex->add_option("--replicates", ex_replicates, "replicates per cell")
      ->capture_default_str();
  ex->add_option("-o,--output", ex_out, "result CSV (default stdout)")
      ->capture_default_str();
  ex->add_option("--summary", ex_summary, "summary JSON path")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      const auto problem = sim_pf.make();
      const auto truth = seqinv::smooth_truth(sim_pf.n, sim_beta);
      const auto obs = seqinv::simulate(problem, truth, sim_eps, sim_seed);
      if (sim_format == "json") {
        write_text(sim_out, observations_json(obs).dump(2) + "\n");
      } else {
        std::ostringstream ss;
        seqinv::io::write_observations(ss, obs);
        write_text(sim_out, ss.str());
      }
    } else if (post->parsed()) {
      const auto obs = load_observations(post_in);
      post_pf.n = obs.n();
      const auto problem = post_pf.make();
      const seqinv::PriorSpec prior{post_alpha, post_tau};
      const auto summary =
          seqinv::conjugate_posterior(problem, prior, obs.eps, obs);
      if (post_format == "json") {
        write_text(post_out, json{{"eps", summary.eps},
                                  {"mean", summary.mean},
                                  {"variance", summary.variance}}
                                     .dump(2) +
                                 "\n");
      } else {
        std::ostringstream ss;
        seqinv::io::write_posterior(ss, summary);
        write_text(post_out, ss.str());
      }
      if (!post_bands.empty()) {
        std::vector<double> grid(post_xpoints);
        for (std::size_t j = 0; j < post_xpoints; ++j)
          grid[j] = static_cast<double>(j) / static_cast<double>(post_xpoints - 1);
        const auto band = seqinv::credible_bands(summary, grid, post_level);
        std::ostringstream ss;
        seqinv::io::write_band(ss, band);
        write_text(post_bands, ss.str());
      }
      if (post_sample > 0) {
        if (!post_seed_set)
          throw UsageError("--sample requires --seed (flag --seed is missing)");
        const auto draws = seqinv::sample_posterior(summary, post_sample, post_seed);
        std::ostringstream ss;
        ss << "draw,i,value\n";
        for (std::size_t d = 0; d < draws.draws; ++d)
          for (std::size_t i = 0; i < draws.n; ++i)
            ss << (d + 1) << "," << (i + 1) << ","
               << seqinv::io::fmt(draws.draw(d)[i]) << "\n";
        write_text(post_samples, ss.str());
      }
    } else if (rates_cmd->parsed()) {
      json out;
      const auto regime = seqinv::classify_regime(r_p, r_gamma);
      out["regime"] = seqinv::regime_name(regime);
      out["minimax"] = seqinv::io::rate_report_json(
          seqinv::minimax_rate(r_beta, r_p, r_gamma, r_eps));
      try {
        out["contraction"] = seqinv::io::rate_report_json(
            seqinv::polynomial_contraction_rate(r_alpha, r_tau, r_beta, r_p,
                                                r_gamma, r_eps));
      } catch (const seqinv::UnsupportedRegime& e) {
        out["contraction"] = {{"error", e.what()}};
      }
      if (r_eps_sigma >= 0.0) {
        try {
          out["plugin"] = seqinv::io::rate_report_json(
              seqinv::plugin_rate_polynomial(r_alpha, r_tau, r_beta, r_p,
                                             r_gamma, r_eps, r_eps_sigma));
        } catch (const seqinv::UnsupportedRegime& e) {
          out["plugin"] = {{"error", e.what()}};
        }
      }
      json choices = json::array();
      for (const auto& c : seqinv::optimal_prior(r_beta, r_p, r_gamma, r_alpha)) {
        choices.push_back({{"family", c.family},
                           {"alpha_rule", c.alpha_rule},
                           {"tau_rule", c.tau_rule},
                           {"achievable", c.achievable}});
      }
      out["optimal_prior"] = choices;
      write_text(r_out, out.dump(2) + "\n");
    } else if (mm->parsed()) {
      write_text(mm_out, seqinv::io::rate_report_json(
                             seqinv::minimax_rate(mm_beta, mm_p, mm_gamma, mm_eps))
                                 .dump(2) +
                             "\n");
    } else if (eb->parsed()) {
      const auto obs = load_observations(eb_in);
      eb_pf.n = obs.n();
      const auto problem = eb_pf.make();
      seqinv::EbSearch search;
      search.lo = eb_lo;
      search.hi = eb_hi;
      search.rel_tol = eb_tol;
      seqinv::EbResult result;
      const auto posterior = seqinv::eb_posterior(obs.y, problem, eb_alpha,
                                                  obs.eps, &result, search);
      write_text(eb_out, seqinv::io::eb_result_json(result).dump(2) + "\n");
      if (!eb_post_out.empty()) {
        std::ostringstream ss;
        seqinv::io::write_posterior(ss, posterior);
        write_text(eb_post_out, ss.str());
      }
    } else if (ve->parsed()) {
      const auto problem = ve_pf.make();
      const auto truth = seqinv::smooth_truth(ve_pf.n, ve_beta);
      long M = ve_M;
      double eps_sigma = ve_eps_sigma;
      json diag;
      if (M < 0 || eps_sigma < 0.0) {
        const auto plan = seqinv::truncation_planner(ve_m, ve_pf.gamma,
                                                     ve_pf.noise_scale, ve_c0);
        if (M < 0) M = plan.M;
        if (eps_sigma < 0.0) eps_sigma = plan.eps_sigma;
        diag["planner"] = {{"M", plan.M},
                           {"eps_sigma", plan.eps_sigma},
                           {"m_eps2", plan.m_eps2},
                           {"logM_over_m_eps2", plan.logM_over_m_eps2},
                           {"ok", plan.ok}};
      }
      const auto rep =
          seqinv::simulate_replicated(problem, truth, ve_eps0, ve_m, ve_seed);
      const auto stats = seqinv::sample_stats(rep);
      const auto est =
          seqinv::truncated_estimator(stats.var, M, eps_sigma, ve_c0, ve_m);
      const double c_sigma =
          ve_c_sigma > 0.0 ? ve_c_sigma : problem.sigma[0] * problem.sigma[0];
      const auto bound =
          seqinv::consistency_bound(ve_m, M, eps_sigma, ve_c0, c_sigma);
      diag["consistency_bound"] = {{"bound", bound.bound},
                                   {"condition_ok", bound.condition_ok},
                                   {"c_sigma", c_sigma}};
      diag["M"] = M;
      diag["eps_sigma"] = eps_sigma;
      if (ve_format == "json") {
        json out = diag;
        out["s2"] = est.s2;
        out["hat"] = est.hat;
        out["tilde"] = est.tilde;
        write_text(ve_out, out.dump(2) + "\n");
      } else {
        std::ostringstream ss;
        seqinv::io::write_variance_estimate(ss, est);
        write_text(ve_out, ss.str());
      }
      if (!ve_json.empty()) write_text(ve_json, diag.dump(2) + "\n");
    } else if (ex->parsed()) {
      json j = json::object();
      if (!ex_config.empty()) {
        std::ifstream is(ex_config);
        if (!is) throw std::runtime_error("cannot open config file: " + ex_config);
        is >> j;
      }
      if (!ex_mode.empty()) j["mode"] = ex_mode;
      if (ex_seed_set) j["seed"] = ex_seed;
      if (ex_replicates >= 0) j["replicates"] = ex_replicates;
      if (!j.contains("seed"))
        throw UsageError("experiment: --seed (or a seed in --config) is required");
      const auto config = seqinv::ExperimentConfig::from_json(j);
      const auto result = seqinv::run_experiment(config);
      std::ostringstream ss;
      result.write_csv(ss);
      write_text(ex_out, ss.str());
      if (!ex_summary.empty()) {
        json summary = result.summary_json();
        summary["config"] = config.to_json();
        write_text(ex_summary, summary.dump(2) + "\n");
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
