#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

namespace pointclimb {

// Inputs of the task sampler: tc classes split into tasks of low..high
// classes each, shuffled and partitioned under one seed.
struct SamplerConfig {
  int tc = 0;
  int low = 0;
  int high = 0;
  uint64_t seed = 0;
};

// An ordered class-incremental scenario: tasks[t] holds the class ids taught
// at step t. Tasks are pairwise disjoint and jointly cover a permutation of
// the sampled classes.
struct Scenario {
  uint64_t seed = 0;
  std::vector<std::vector<int>> tasks;

  int num_tasks() const { return static_cast<int>(tasks.size()); }
  std::vector<int> sizes() const;
  // cumulative class counts M^t, one entry per task
  std::vector<int> cumulative() const;
  int total_classes() const;
};

// Draws task sizes: repeatedly draw base in [low, high] (both inclusive);
// once the remainder can no longer fill a draw, the entire remainder becomes
// the final task. sum(result) == tc always. The final size may fall below
// low; every other size is in [low, high].
std::vector<int> sample_task_sizes(const SamplerConfig& config);

// Shuffles class ids 0..tc-1, then partitions them into consecutive slices
// sized by sample_task_sizes. Deterministic per seed; the shuffle and the
// size draws use independent streams derived from it, so either half can be
// recomputed on its own.
Scenario build_scenario(const SamplerConfig& config);

// Same shuffle as build_scenario for the seed, but the slice sizes are given
// explicitly; the first sum(sizes) shuffled classes are used. Models the
// fixed benchmark shapes (20+5x4, 10+5x6, 4x10).
Scenario fixed_scenario(int tc, const std::vector<int>& sizes, uint64_t seed);

nlohmann::ordered_json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace pointclimb
