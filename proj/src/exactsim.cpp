#include "piff/exactsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace piff {

namespace {

void validate_config(const PolyMatrix& m, const PopulationConfig& cfg) {
  if (static_cast<int>(cfg.counts.size()) != m.dim())
    throw MatrixError("population config has " + std::to_string(cfg.counts.size()) +
                      " states, matrix has " + std::to_string(m.dim()));
  if (cfg.total < 1) throw MatrixError("population must be positive");
  long long sum = 0;
  for (long long c : cfg.counts) {
    if (c < 0) throw MatrixError("population config has a negative count");
    sum += c;
  }
  if (sum != cfg.total)
    throw MatrixError("population config counts sum to " + std::to_string(sum) +
                      ", total says " + std::to_string(cfg.total));
}

// splitmix64 finalizer; replica r's seed is the r-th output of the stream
// started at `seed`, which keeps replica streams decorrelated without any
// coordination between workers
std::uint64_t replica_seed(std::uint64_t seed, int r) {
  std::uint64_t x = seed + (static_cast<std::uint64_t>(r) + 1) * 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

int worker_count(int replicas) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PIFF_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      // unreadable override: keep the hardware default
    }
  }
  return std::clamp(n, 1, std::max(replicas, 1));
}

} // namespace

PopulationConfig exact_step(const PolyMatrix& m, const PopulationConfig& cfg,
                            std::mt19937_64& rng) {
  validate_config(m, cfg);
  const int n = m.dim();

  std::vector<Rational> mu(n);
  for (int i = 0; i < n; ++i) mu[i] = Rational(cfg.counts[i], cfg.total);
  const auto k = eval_matrix_exact(m, mu);

  PopulationConfig next;
  next.total = cfg.total;
  next.counts.assign(n, 0);

  for (int z = 0; z < n; ++z) {
    long long pending = cfg.counts[z];
    if (pending == 0) continue;

    Rational mass = 0;
    for (int c = 0; c < n; ++c) {
      if (k[z][c] < 0)
        throw MatrixError("entry '" + m.states[z] + "' -> '" + m.states[c] +
                          "' is negative at the current configuration");
      mass += k[z][c];
    }
    if (mass != 1)
      throw MatrixError("row '" + m.states[z] +
                        "' does not evaluate to a distribution at the current configuration");

    // Multinomial split as a chain of conditional binomials, columns in
    // ascending order. `left` is exact, so the final nonzero column always
    // satisfies p == left and absorbs whatever remains: counts are conserved
    // by construction, not by correction.
    Rational left = 1;
    for (int c = 0; c < n && pending > 0; ++c) {
      const Rational& p = k[z][c];
      if (p == 0) continue;
      if (p == left) {
        next.counts[c] += pending;
        pending = 0;
        break;
      }
      double q = std::clamp(to_double(p / left), 0.0, 1.0);
      std::binomial_distribution<long long> bin(pending, q);
      long long take = bin(rng);
      next.counts[c] += take;
      pending -= take;
      left -= p;
    }
  }
  return next;
}

SimResult monte_carlo(const PolyMatrix& m, const PopulationConfig& cfg0, int steps,
                      int replicas, std::uint64_t seed) {
  if (steps < 0) throw std::invalid_argument("step count must be nonnegative");
  if (replicas < 1) throw std::invalid_argument("need at least one replica");
  validate_config(m, cfg0);
  const int n = m.dim();

  SimResult res;
  res.population = cfg0.total;
  res.seeds.resize(replicas);
  res.trajectories.assign(replicas, {});
  for (int r = 0; r < replicas; ++r) res.seeds[r] = replica_seed(seed, r);

  // replicas are handed out by index; every slot is written by exactly one
  // worker, so the only shared mutable state is the ticket counter
  std::atomic<int> ticket{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run_replicas = [&] {
    for (;;) {
      int r = ticket.fetch_add(1);
      if (r >= replicas || failed.load()) break;
      try {
        std::mt19937_64 rng(res.seeds[r]);
        auto& traj = res.trajectories[r];
        traj.reserve(steps + 1);
        PopulationConfig cfg = cfg0;
        traj.push_back(cfg.counts);
        for (int t = 0; t < steps; ++t) {
          cfg = exact_step(m, cfg, rng);
          traj.push_back(cfg.counts);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        break;
      }
    }
  };

  const int workers = worker_count(replicas);
  if (workers == 1) {
    run_replicas();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_replicas);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // aggregate strictly in replica order: the result must not depend on which
  // worker finished first
  const double N = static_cast<double>(cfg0.total);
  res.mean = Eigen::MatrixXd::Zero(steps + 1, n);
  res.sd = Eigen::MatrixXd::Zero(steps + 1, n);
  for (int t = 0; t <= steps; ++t)
    for (int z = 0; z < n; ++z) {
      double acc = 0;
      for (int r = 0; r < replicas; ++r) acc += res.trajectories[r][t][z] / N;
      double mean = acc / replicas;
      res.mean(t, z) = mean;
      if (replicas > 1) {
        double var = 0;
        for (int r = 0; r < replicas; ++r) {
          double d = res.trajectories[r][t][z] / N - mean;
          var += d * d;
        }
        res.sd(t, z) = std::sqrt(var / (replicas - 1));
      }
    }
  return res;
}

} // namespace piff
