#include "seqinv/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace seqinv::io {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_observations(std::ostream& os, const Observations& obs) {
  os << "# eps=" << fmt(obs.eps) << ",seed=" << obs.seed << ",n=" << obs.n()
     << "\n";
  os << "i,y\n";
  for (std::size_t j = 0; j < obs.n(); ++j)
    os << (j + 1) << "," << fmt(obs.y[j]) << "\n";
}

Observations read_observations(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# eps=", 0) != 0)
    throw std::runtime_error("observations: missing metadata header line");
  Observations obs;
  std::size_t n = 0;
  {
    std::string body = line.substr(2);
    std::istringstream meta(body);
    std::string field;
    while (std::getline(meta, field, ',')) {
      const auto pos = field.find('=');
      if (pos == std::string::npos)
        throw std::runtime_error("observations: malformed metadata field");
      const std::string key = field.substr(0, pos);
      const std::string value = field.substr(pos + 1);
      if (key == "eps") obs.eps = std::stod(value);
      else if (key == "seed") obs.seed = std::stoull(value);
      else if (key == "n") n = std::stoul(value);
    }
  }
  if (!std::getline(is, line) || line != "i,y")
    throw std::runtime_error("observations: missing i,y header");
  obs.y.reserve(n);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto pos = line.find(',');
    if (pos == std::string::npos)
      throw std::runtime_error("observations: malformed row: " + line);
    obs.y.push_back(std::stod(line.substr(pos + 1)));
  }
  if (n != 0 && obs.y.size() != n)
    throw std::runtime_error("observations: row count disagrees with header n");
  return obs;
}

void write_posterior(std::ostream& os, const PosteriorSummary& s) {
  os << "i,mean,variance\n";
  for (std::size_t j = 0; j < s.n(); ++j)
    os << (j + 1) << "," << fmt(s.mean[j]) << "," << fmt(s.variance[j]) << "\n";
}

void write_band(std::ostream& os, const Band& band) {
  os << "x,mean,lower,upper\n";
  for (std::size_t j = 0; j < band.x.size(); ++j)
    os << fmt(band.x[j]) << "," << fmt(band.mean[j]) << "," << fmt(band.lower[j])
       << "," << fmt(band.upper[j]) << "\n";
}

void write_variance_estimate(std::ostream& os, const VarianceEstimate& est) {
  os << "i,s2,hat,tilde\n";
  for (std::size_t j = 0; j < est.s2.size(); ++j)
    os << (j + 1) << "," << fmt(est.s2[j]) << "," << fmt(est.hat[j]) << ","
       << fmt(est.tilde[j]) << "\n";
}

nlohmann::json rate_report_json(const RateReport& r) {
  nlohmann::json j;
  j["regime"] = regime_name(r.regime);
  j["rate"] = r.rate;
  if (std::isnan(r.exponent))
    j["exponent"] = nullptr;
  else
    j["exponent"] = r.exponent;
  j["cutoff"] = r.cutoff;
  j["terms"] = nlohmann::json::object();
  for (const auto& [name, value] : r.terms) j["terms"][name] = value;
  return j;
}

nlohmann::json eb_result_json(const EbResult& r) {
  return nlohmann::json{{"tau_hat", r.tau_hat},   {"objective", r.objective},
                        {"bracket_lo", r.lo},     {"bracket_hi", r.hi},
                        {"iterations", r.iterations},
                        {"converged", r.converged}};
}

}  // namespace seqinv::io
