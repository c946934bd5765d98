#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "abm/sim/config.hpp"
#include "abm/sim/model_ab.hpp"
#include "abm/sim/model_c.hpp"
#include "abm/sim/model_d.hpp"
#include "abm/sim/output.hpp"

namespace abm::sim {

inline SimOutput run_model(const ModelConfig& cfg, ModelKind model) {
  switch (model) {
    case ModelKind::a: return run_model_a(cfg);
    case ModelKind::b: return run_model_b(cfg);
    case ModelKind::c: return run_model_c(cfg);
    case ModelKind::d: return run_model_d(cfg);
  }
  throw Error(ErrorKind::config, "unknown model");
}

/// Seeds seed, seed + 1, ..., seed + count - 1.
inline std::vector<std::uint64_t> ensemble_seeds(std::uint64_t seed, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = seed + i;
  return s;
}

/// Runs one simulation per seed on up to `jobs` threads. Results come back
/// in seed order whatever the thread count; each run owns its own RNG.
inline std::vector<SimOutput> run_ensemble(const ModelConfig& base, ModelKind model,
                                           const std::vector<std::uint64_t>& seeds,
                                           std::size_t jobs = 1) {
  validate(base, model);
  std::vector<SimOutput> out(seeds.size());
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(seeds.size(), 1));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        ModelConfig cfg = base;
        cfg.seed = seeds[i];
        out[i] = run_model(cfg, model);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace abm::sim
