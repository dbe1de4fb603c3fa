#include "gwr/serialize.hpp"

#include <map>
#include <sstream>

namespace gwr {

namespace {

template <class T>
nlohmann::json histogram(const std::vector<T>& values) {
  std::map<T, std::uint64_t> counts;
  for (const T& v : values) ++counts[v];
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [value, count] : counts) out.push_back({value, count});
  return out;
}

}  // namespace

nlohmann::json to_json(const ReducedLawTable& table) {
  nlohmann::json j;
  j["law"] = table.law;
  j["kind"] = std::string(kind_name(table.kind));
  j["n"] = table.n;
  j["m"] = table.m;
  j["C"] = table.bound ? nlohmann::json(*table.bound) : nlohmann::json(nullptr);
  j["epsilon"] = table.epsilon;
  j["pmf"] = table.pmf;
  j["mass_accounted"] = table.mass_accounted;
  j["event_prob"] = table.event_prob;
  return j;
}

std::string to_csv(const ReducedLawTable& table) {
  std::ostringstream os;
  os.precision(17);
  os << "j,p\n";
  for (int j = 1; j <= table.j_max(); ++j) os << j << ',' << table.p(j) << '\n';
  return os.str();
}

nlohmann::json to_json(const SimBatch& b) {
  nlohmann::json j;
  j["law"] = b.law;
  j["n"] = b.n;
  j["C"] = b.C;
  j["query_generations"] = b.query_generations;
  j["seed"] = b.seed;
  j["stream_derivation"] = "xoshiro256** state = splitmix64 expansion of splitmix64(seed) ^ splitmix64(replicate_id + 1)";
  j["target_accepted"] = b.target_accepted;
  j["max_replicates"] = b.max_replicates;
  j["replicates"] = b.replicates;
  j["accepted"] = b.accepted;
  j["budget_rejected"] = b.budget_rejected;
  j["low_confidence"] = b.low_confidence;
  j["acceptance_rate"] = b.acceptance_rate();
  j["acceptance_se"] = b.acceptance_se();
  j["budget_bias_bound"] = b.budget_bias_bound();
  j["terminal_size_histogram"] = histogram(b.terminal_sizes);
  j["mrca_distance_histogram"] = histogram(b.mrca_distances);
  nlohmann::json reduced = nlohmann::json::array();
  for (std::size_t q = 0; q < b.query_generations.size(); ++q) {
    std::vector<std::uint64_t> column;
    column.reserve(b.reduced_counts.size());
    for (const auto& row : b.reduced_counts) column.push_back(row[q]);
    reduced.push_back({{"m", b.query_generations[q]}, {"histogram", histogram(column)}});
  }
  j["reduced_count_histograms"] = std::move(reduced);
  return j;
}

std::string to_csv(const SimBatch& b) {
  std::ostringstream os;
  os << "replicate_id,Z_n,d_n";
  for (int m : b.query_generations) os << ",Z_" << m << "_n";
  os << '\n';
  for (std::size_t i = 0; i < b.replicate_ids.size(); ++i) {
    os << b.replicate_ids[i] << ',' << b.terminal_sizes[i] << ',' << b.mrca_distances[i];
    for (std::uint64_t c : b.reduced_counts[i]) os << ',' << c;
    os << '\n';
  }
  return os.str();
}

}  // namespace gwr
