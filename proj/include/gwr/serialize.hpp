#pragma once

#include <string>

#include <json.hpp>

#include "gwr/exact_reduced.hpp"
#include "gwr/simulator.hpp"

namespace gwr {

// {law, kind, n, m, C, epsilon, pmf: [...], mass_accounted, event_prob}
nlohmann::json to_json(const ReducedLawTable& table);
// header "j,p" then one row per j
std::string to_csv(const ReducedLawTable& table);

// Summary, acceptance statistics and histograms; no per-replicate arrays.
nlohmann::json to_json(const SimBatch& batch);
// One row per accepted replicate: replicate_id,Z_n,d_n,Z_<m>_n...
std::string to_csv(const SimBatch& batch);

}  // namespace gwr
