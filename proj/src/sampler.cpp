#include "pointclimb/sampler.hpp"

#include <numeric>
#include <stdexcept>

#include "pointclimb/rng.hpp"

namespace pointclimb {

namespace {

void check_config(const SamplerConfig& c) {
  if (!(1 <= c.low && c.low <= c.high && c.high <= c.tc)) {
    throw std::invalid_argument("sampler config requires 1 <= low <= high <= tc");
  }
}

std::vector<int> shuffled_classes(int tc, uint64_t seed) {
  std::vector<int> classes(static_cast<size_t>(tc));
  std::iota(classes.begin(), classes.end(), 0);
  Rng rng(mix(seed, "sampler/classes"));
  rng.shuffle(classes);
  return classes;
}

// Consecutive slices at cumulative offsets. The source pseudocode indexes
// slice starts through the size list itself, which does not partition; the
// stated disjoint-cover invariants force this cumulative form.
std::vector<std::vector<int>> slice(const std::vector<int>& classes,
                                    const std::vector<int>& sizes) {
  std::vector<std::vector<int>> tasks;
  tasks.reserve(sizes.size());
  int offset = 0;
  for (int size : sizes) {
    tasks.emplace_back(classes.begin() + offset, classes.begin() + offset + size);
    offset += size;
  }
  return tasks;
}

}  // namespace

std::vector<int> Scenario::sizes() const {
  std::vector<int> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) out.push_back(static_cast<int>(t.size()));
  return out;
}

std::vector<int> Scenario::cumulative() const {
  std::vector<int> out;
  out.reserve(tasks.size());
  int m = 0;
  for (const auto& t : tasks) {
    m += static_cast<int>(t.size());
    out.push_back(m);
  }
  return out;
}

int Scenario::total_classes() const {
  return tasks.empty() ? 0 : cumulative().back();
}

std::vector<int> sample_task_sizes(const SamplerConfig& config) {
  check_config(config);
  Rng rng(mix(config.seed, "sampler/sizes"));

  std::vector<int> sizes;
  int tc = config.tc;
  int condition = 0;
  // The guard never exits the loop (the break branch always fires first);
  // kept anyway to mirror the published control flow.
  while (tc != 0 && condition >= 0) {
    const int base = rng.next_int(config.low, config.high);
    condition = tc - base;
    if (condition <= 0) {
      sizes.push_back(tc);  // remainder, possibly below low, becomes the last task
      break;
    }
    sizes.push_back(base);
    tc = condition;
  }
  return sizes;
}

Scenario build_scenario(const SamplerConfig& config) {
  const auto sizes = sample_task_sizes(config);
  Scenario s;
  s.seed = config.seed;
  s.tasks = slice(shuffled_classes(config.tc, config.seed), sizes);
  return s;
}

Scenario fixed_scenario(int tc, const std::vector<int>& sizes, uint64_t seed) {
  if (sizes.empty()) throw std::invalid_argument("fixed_scenario: no task sizes");
  int total = 0;
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("fixed_scenario: task sizes must be positive");
    total += s;
  }
  if (total > tc) throw std::invalid_argument("fixed_scenario: sizes sum past the class count");

  Scenario s;
  s.seed = seed;
  s.tasks = slice(shuffled_classes(tc, seed), sizes);
  return s;
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["sizes"] = s.sizes();
  j["tasks"] = s.tasks;
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.seed = j.at("seed").get<uint64_t>();
  s.tasks = j.at("tasks").get<std::vector<std::vector<int>>>();
  if (j.contains("sizes") && j["sizes"].get<std::vector<int>>() != s.sizes()) {
    throw std::invalid_argument("scenario json: sizes disagree with tasks");
  }
  return s;
}

}  // namespace pointclimb
