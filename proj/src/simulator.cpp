#include "gwr/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace gwr {

namespace {

enum class Status : std::uint8_t { Rejected, Accepted, BudgetRejected };

struct Outcome {
  Status status = Status::Rejected;
  std::uint64_t terminal = 0;
  int mrca = 0;
  std::vector<std::uint64_t> counts;
};

void check_batch_args(int n, int C, const std::vector<int>& queries, std::uint64_t target) {
  if (n < 1) throw DomainError("simulation needs n >= 1");
  if (C < 1) throw DomainError("bound C must be at least 1");
  if (target < 1) throw DomainError("target_accepted must be at least 1");
  for (int m : queries) {
    if (m < 0 || m > n) throw DomainError("query generations must lie in [0, n]");
  }
}

// Simulates one replicate and classifies it against {0 < Z(n) <= C}.
Outcome run_replicate(GenealogyRecord& record, const OffspringSampler& sample, int n, int C,
                      const std::vector<int>& queries, std::uint64_t seed, std::uint64_t id,
                      std::uint64_t node_budget) {
  Outcome out;
  Rng rng(seed, id);
  if (!simulate_tree_into(record, sample, n, rng, node_budget)) {
    out.status = Status::BudgetRejected;
    return out;
  }
  const std::uint64_t zn = record.sizes[n];
  if (zn == 0 || zn > static_cast<std::uint64_t>(C)) return out;
  out.status = Status::Accepted;
  out.terminal = zn;
  std::vector<std::uint64_t> profile = reduced_profile(record);
  out.mrca = *mrca_distance_from_profile(profile);
  out.counts.reserve(queries.size());
  for (int m : queries) out.counts.push_back(profile[m]);
  return out;
}

SimBatch make_batch(const OffspringLaw& law, int n, int C, const std::vector<int>& queries, std::uint64_t target,
                    std::uint64_t max_replicates, std::uint64_t seed) {
  SimBatch b;
  b.law = law.id();
  b.n = n;
  b.C = C;
  b.query_generations = queries;
  b.seed = seed;
  b.target_accepted = target;
  b.max_replicates = max_replicates;
  return b;
}

// Folds one outcome into the batch; returns true once the target is met.
bool absorb(SimBatch& b, std::uint64_t id, Outcome&& o) {
  b.replicates = id + 1;
  if (o.status == Status::BudgetRejected) {
    ++b.budget_rejected;
  } else if (o.status == Status::Accepted) {
    ++b.accepted;
    b.replicate_ids.push_back(id);
    b.terminal_sizes.push_back(o.terminal);
    b.mrca_distances.push_back(o.mrca);
    b.reduced_counts.push_back(std::move(o.counts));
  }
  return b.accepted >= b.target_accepted;
}

// Every accepted replicate must satisfy 0 < Z(n) <= C, 1 <= Z(m,n) <= Z(n)
// with Z(m,n) nondecreasing in m, and 1 <= d(n) <= n.
void verify_batch(const SimBatch& b) {
  std::vector<std::size_t> order(b.query_generations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return b.query_generations[x] < b.query_generations[y]; });
  for (std::size_t r = 0; r < b.accepted; ++r) {
    const std::uint64_t zn = b.terminal_sizes[r];
    bool ok = zn >= 1 && zn <= static_cast<std::uint64_t>(b.C) && b.mrca_distances[r] >= 1 && b.mrca_distances[r] <= b.n;
    std::uint64_t prev = 1;
    for (std::size_t i : order) {
      const std::uint64_t z = b.reduced_counts[r][i];
      ok = ok && z >= prev && z <= zn;
      prev = z;
    }
    if (!ok) {
      std::string dump = "law=" + b.law + " n=" + std::to_string(b.n) + " C=" + std::to_string(b.C) +
                         " seed=" + std::to_string(b.seed) + " replicate=" + std::to_string(b.replicate_ids[r]) +
                         " Z(n)=" + std::to_string(zn) + " d(n)=" + std::to_string(b.mrca_distances[r]) + " Z(m,n):";
      for (std::size_t i = 0; i < b.query_generations.size(); ++i)
        dump += " m=" + std::to_string(b.query_generations[i]) + ":" + std::to_string(b.reduced_counts[r][i]);
      throw InvariantViolation("accepted replicate violates the reduced-process invariants", dump);
    }
  }
}

void finish(SimBatch& b) {
  b.low_confidence = b.accepted < 10 && b.accepted < b.target_accepted;
  verify_batch(b);
}

}  // namespace

OffspringSampler::OffspringSampler(const OffspringLaw& law) : family_(law.family()) {
  if (family_ == Family::LinearFractional) {
    const double B = law.B();
    geometric_half_ = B == 1.0;
    lf_f0_ = B / (1.0 + B);
    lf_ratio_ = B / (1.0 + B);
    return;
  }
  double acc = 0.0;
  for (int k = 0;; ++k) {
    acc += law.pmf(k);
    cdf_.push_back(acc);
    if (law.finite_support() ? k == law.max_support() : (acc >= 1.0 - 1e-17 || k >= 60)) break;
  }
}

std::uint32_t OffspringSampler::operator()(Rng& rng) const {
  if (family_ == Family::LinearFractional) {
    if (geometric_half_) {
      // P(leading zeros >= k) = 2^{-k}, so P(result = k) = 2^{-(k+1)}.
      std::uint32_t k = 0;
      for (;;) {
        std::uint64_t word = rng();
        if (word != 0) return k + static_cast<std::uint32_t>(std::countl_zero(word));
        k += 64;
      }
    }
    double u = rng.uniform();
    if (u < lf_f0_) return 0;
    double v = (u - lf_f0_) / (1.0 - lf_f0_);
    return 1 + static_cast<std::uint32_t>(std::floor(std::log1p(-v) / std::log(lf_ratio_)));
  }
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
}

bool simulate_tree_into(GenealogyRecord& record, const OffspringSampler& sample, int n, Rng& rng,
                        std::uint64_t node_budget) {
  record.sizes.assign(static_cast<std::size_t>(n) + 1, 0);
  record.offspring_counts.resize(static_cast<std::size_t>(n));
  for (auto& gen : record.offspring_counts) gen.clear();
  record.sizes[0] = 1;
  std::uint64_t nodes = 1;
  for (int g = 0; g < n; ++g) {
    const std::uint64_t z = record.sizes[g];
    if (z == 0) break;
    auto& counts = record.offspring_counts[g];
    counts.resize(z);
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < z; ++i) {
      const std::uint32_t c = sample(rng);
      counts[i] = c;
      total += c;
    }
    nodes += total;
    if (nodes > node_budget) return false;
    record.sizes[g + 1] = total;
  }
  return true;
}

GenealogyRecord simulate_tree(const OffspringLaw& law, int n, Rng& rng, std::uint64_t node_budget) {
  if (n < 0) throw DomainError("generation must be nonnegative");
  GenealogyRecord record;
  OffspringSampler sample(law);
  if (!simulate_tree_into(record, sample, n, rng, node_budget)) {
    throw NodeBudgetExceeded("tree exceeded the node budget of " + std::to_string(node_budget));
  }
  return record;
}

std::vector<std::uint64_t> reduced_profile(const GenealogyRecord& record) {
  const int n = record.n();
  std::vector<std::uint64_t> profile(static_cast<std::size_t>(n) + 1, 0);
  if (record.sizes[n] == 0) return profile;
  profile[n] = record.sizes[n];
  std::vector<std::uint8_t> marked(record.sizes[n], 1), parent_marked;
  for (int g = n - 1; g >= 0; --g) {
    const auto& counts = record.offspring_counts[g];
    parent_marked.assign(counts.size(), 0);
    std::uint64_t offset = 0, alive = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const std::uint64_t end = offset + counts[i];
      std::uint8_t any = 0;
      for (std::uint64_t c = offset; c < end && !any; ++c) any = marked[c];
      parent_marked[i] = any;
      alive += any;
      offset = end;
    }
    profile[g] = alive;
    marked.swap(parent_marked);
  }
  return profile;
}

std::vector<std::uint64_t> reduced_counts(const GenealogyRecord& record, const std::vector<int>& query_generations) {
  std::vector<std::uint64_t> profile = reduced_profile(record);
  std::vector<std::uint64_t> out;
  out.reserve(query_generations.size());
  for (int m : query_generations) {
    if (m < 0 || m > record.n()) throw DomainError("query generation outside [0, n]");
    out.push_back(profile[m]);
  }
  return out;
}

std::optional<int> mrca_distance_from_profile(const std::vector<std::uint64_t>& profile) {
  const int n = static_cast<int>(profile.size()) - 1;
  if (n < 1 || profile[n] == 0) return std::nullopt;
  for (int m = n - 1; m >= 0; --m) {
    if (profile[m] == 1) return n - m;
  }
  return std::nullopt;  // unreachable: Z(0,n) = 1 on survival
}

std::optional<int> mrca_distance(const GenealogyRecord& record) {
  return mrca_distance_from_profile(reduced_profile(record));
}

std::uint64_t simulate_population_size(const OffspringLaw& law, int n, Rng& rng) {
  std::uint64_t z = 1;
  for (int g = 0; g < n && z > 0; ++g) {
    switch (law.family()) {
      case Family::Poisson: {
        std::poisson_distribution<std::uint64_t> d(static_cast<double>(z));
        z = d(rng);
        break;
      }
      case Family::LinearFractional: {
        // nonzero parents ~ Bin(z, 1/(1+B)); each contributes 1 + Geometric
        const double p = 1.0 / (1.0 + law.B());
        std::binomial_distribution<std::uint64_t> parents(z, p);
        std::uint64_t k = parents(rng);
        if (k == 0) {
          z = 0;
          break;
        }
        std::negative_binomial_distribution<std::uint64_t> extra(k, p);
        z = k + extra(rng);
        break;
      }
      default: {
        // multinomial split of z parents over the support
        std::uint64_t remaining = z, total = 0;
        double rest = 1.0;
        const int d = law.max_support();
        for (int k = 0; k < d && remaining > 0; ++k) {
          const double pk = law.pmf(k);
          const double prob = rest > 0.0 ? std::clamp(pk / rest, 0.0, 1.0) : 1.0;
          std::binomial_distribution<std::uint64_t> draw(remaining, prob);
          const std::uint64_t nk = draw(rng);
          total += static_cast<std::uint64_t>(k) * nk;
          remaining -= nk;
          rest -= pk;
        }
        total += static_cast<std::uint64_t>(d) * remaining;
        z = total;
        break;
      }
    }
  }
  return z;
}

double SimBatch::acceptance_rate() const {
  return replicates ? static_cast<double>(accepted) / static_cast<double>(replicates) : 0.0;
}

double SimBatch::acceptance_se() const {
  if (replicates == 0) return 0.0;
  const double p = acceptance_rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(replicates));
}

double SimBatch::budget_bias_bound() const {
  return replicates ? static_cast<double>(budget_rejected) / static_cast<double>(replicates) : 0.0;
}

SimBatch run_conditioned_batch(const OffspringLaw& law, int n, int C, const std::vector<int>& query_generations,
                               std::uint64_t target_accepted, std::uint64_t max_replicates, std::uint64_t seed,
                               const BatchOptions& options) {
  check_batch_args(n, C, query_generations, target_accepted);
  SimBatch batch = make_batch(law, n, C, query_generations, target_accepted, max_replicates, seed);
  const OffspringSampler sample(law);
  const std::uint64_t chunk = std::max<std::uint64_t>(1, options.chunk);
  std::vector<Outcome> outcomes;

  for (std::uint64_t start = 0; start < max_replicates;) {
    const std::uint64_t end = std::min(max_replicates, start + chunk);
    const auto count = static_cast<std::int64_t>(end - start);
    outcomes.assign(static_cast<std::size_t>(count), Outcome{});
#pragma omp parallel
    {
      GenealogyRecord record;
#pragma omp for schedule(dynamic, 256)
      for (std::int64_t i = 0; i < count; ++i) {
        outcomes[i] = run_replicate(record, sample, n, C, query_generations, seed, start + i, options.node_budget);
      }
    }
    bool done = false;
    for (std::int64_t i = 0; i < count && !done; ++i) {
      done = absorb(batch, start + i, std::move(outcomes[i]));
    }
    if (done) break;
    start = end;
  }
  finish(batch);
  return batch;
}

SimBatch run_conditioned_batch_serial(const OffspringLaw& law, int n, int C,
                                      const std::vector<int>& query_generations, std::uint64_t target_accepted,
                                      std::uint64_t max_replicates, std::uint64_t seed,
                                      const BatchOptions& options) {
  check_batch_args(n, C, query_generations, target_accepted);
  SimBatch batch = make_batch(law, n, C, query_generations, target_accepted, max_replicates, seed);
  const OffspringSampler sample(law);
  GenealogyRecord record;
  for (std::uint64_t id = 0; id < max_replicates; ++id) {
    if (absorb(batch, id,
               run_replicate(record, sample, n, C, query_generations, seed, id, options.node_budget))) {
      break;
    }
  }
  finish(batch);
  return batch;
}

}  // namespace gwr
