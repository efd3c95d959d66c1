#pragma once

#include <iosfwd>
#include <string>

#include "seqinv/ebayes.hpp"
#include "seqinv/model.hpp"
#include "seqinv/posterior.hpp"
#include "seqinv/rates.hpp"
#include "seqinv/varest.hpp"

#include "json.hpp"

namespace seqinv::io {

// Floats print with 17 significant digits so CSV round-trips are exact.
std::string fmt(double v);

// Observations CSV: one metadata comment line (# eps=..,seed=..,n=..),
// then header i,y and one row per index.
void write_observations(std::ostream& os, const Observations& obs);
Observations read_observations(std::istream& is);

void write_posterior(std::ostream& os, const PosteriorSummary& s);   // i,mean,variance
void write_band(std::ostream& os, const Band& band);                 // x,mean,lower,upper
void write_variance_estimate(std::ostream& os, const VarianceEstimate& est);  // i,s2,hat,tilde

nlohmann::json rate_report_json(const RateReport& r);
nlohmann::json eb_result_json(const EbResult& r);

}  // namespace seqinv::io
