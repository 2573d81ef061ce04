#pragma once

#include "piff/polymatrix.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace piff {

// A population of `total` agents bucketed by flat state. The counts are the
// whole story: agents are exchangeable, so the chain on configurations is
// lossless with respect to the agent-level product chain.
struct PopulationConfig {
  long long total = 0;
  std::vector<long long> counts;
};

// Everything monte_carlo produces. Trajectories are kept as raw counts so the
// empirical occupancies stay exact (denominator = population); mean and sd are
// the per-(time, state) aggregates over replicas, sd the sample deviation
// (zero when there is a single replica).
struct SimResult {
  long long population = 0;
  std::vector<std::uint64_t> seeds;                              // one per replica
  std::vector<std::vector<std::vector<long long>>> trajectories; // [replica][t][state]
  Eigen::MatrixXd mean; // (steps+1) x dim
  Eigen::MatrixXd sd;
};

// One synchronous step: evaluate the kernel at the empirical occupancy
// (exact rationals), then split each state's bucket multinomially over its
// row. Throws MatrixError if a row fails to be a distribution at the current
// configuration.
PopulationConfig exact_step(const PolyMatrix& m, const PopulationConfig& cfg,
                            std::mt19937_64& rng);

// Independent replicas of the T-step chain from cfg0. Replica r draws from
// its own generator whose seed derives from `seed` and r alone, so results
// are identical for any thread count (PIFF_THREADS caps the worker pool).
SimResult monte_carlo(const PolyMatrix& m, const PopulationConfig& cfg0, int steps,
                      int replicas, std::uint64_t seed);

} // namespace piff
