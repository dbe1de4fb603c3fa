#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwr/errors.hpp"
#include "gwr/offspring_law.hpp"
#include "gwr/rng.hpp"

namespace gwr {

// Inversion sampler for a single offspring count.
class OffspringSampler {
 public:
  explicit OffspringSampler(const OffspringLaw& law);
  std::uint32_t operator()(Rng& rng) const;

 private:
  Family family_;
  bool geometric_half_ = false;  // linear fractional with B = 1
  double lf_ratio_ = 0.0;        // P(xi > k | xi >= k), k >= 1
  double lf_f0_ = 0.0;
  std::vector<double> cdf_;      // inversion table
};

// Per-generation offspring counts of one Galton-Watson tree with Z(0) = 1.
// offspring_counts[g][i] is the number of children of the i-th individual of
// generation g (children are numbered consecutively in parent order).
struct GenealogyRecord {
  std::vector<std::vector<std::uint32_t>> offspring_counts;
  std::vector<std::uint64_t> sizes;  // Z(0..n)

  int n() const { return static_cast<int>(sizes.size()) - 1; }
};

// Nodes allowed per replicate before it is discarded.
inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

class NodeBudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Simulates generations 0..n. Stops drawing once the population is extinct.
// Throws NodeBudgetExceeded if more than node_budget individuals are created.
GenealogyRecord simulate_tree(const OffspringLaw& law, int n, Rng& rng,
                              std::uint64_t node_budget = kDefaultNodeBudget);

// In-place variant reusing the record's storage; returns false when the node
// budget was exceeded (the record is then incomplete).
bool simulate_tree_into(GenealogyRecord& record, const OffspringSampler& sample, int n, Rng& rng,
                        std::uint64_t node_budget);

// Z(m,n) for every m = 0..n via backward marking of individuals with a
// descendant alive at generation n.
std::vector<std::uint64_t> reduced_profile(const GenealogyRecord& record);

// Z(m,n) for the requested m.
std::vector<std::uint64_t> reduced_counts(const GenealogyRecord& record, const std::vector<int>& query_generations);

// d(n) = n - max{m < n : Z(m,n) = 1}; nullopt when Z(n) = 0.
std::optional<int> mrca_distance(const GenealogyRecord& record);
std::optional<int> mrca_distance_from_profile(const std::vector<std::uint64_t>& profile);

// Z(n) only, drawing each generation's total offspring in one shot.
std::uint64_t simulate_population_size(const OffspringLaw& law, int n, Rng& rng);

struct SimBatch {
  std::string law;
  int n = 0;
  int C = 0;
  std::vector<int> query_generations;
  std::uint64_t seed = 0;
  std::uint64_t target_accepted = 0;
  std::uint64_t max_replicates = 0;

  std::uint64_t replicates = 0;       // attempted (replicate ids 0..replicates-1)
  std::uint64_t accepted = 0;         // 0 < Z(n) <= C
  std::uint64_t budget_rejected = 0;  // discarded by the node budget
  bool low_confidence = false;        // fewer than 10 acceptances at max_replicates

  // One entry per accepted replicate, in replicate order.
  std::vector<std::uint64_t> replicate_ids;
  std::vector<std::uint64_t> terminal_sizes;
  std::vector<int> mrca_distances;
  std::vector<std::vector<std::uint64_t>> reduced_counts;  // [accepted][query]

  double acceptance_rate() const;
  // Binomial standard error of acceptance_rate().
  double acceptance_se() const;
  // Upper bound on the acceptance-rate bias from budget-rejected replicates.
  double budget_bias_bound() const;
};

struct BatchOptions {
  std::uint64_t node_budget = kDefaultNodeBudget;
  // Replicates simulated between merge points; does not affect results.
  std::uint64_t chunk = 1 << 16;
};

// Rejection sampler for {0 < Z(n) <= C}. Replicates run in parallel (OpenMP);
// the result is identical for any thread count.
SimBatch run_conditioned_batch(const OffspringLaw& law, int n, int C, const std::vector<int>& query_generations,
                               std::uint64_t target_accepted, std::uint64_t max_replicates, std::uint64_t seed,
                               const BatchOptions& options = {});

// Single-threaded reference implementation of run_conditioned_batch.
SimBatch run_conditioned_batch_serial(const OffspringLaw& law, int n, int C,
                                      const std::vector<int>& query_generations, std::uint64_t target_accepted,
                                      std::uint64_t max_replicates, std::uint64_t seed,
                                      const BatchOptions& options = {});

}  // namespace gwr
