#ifndef ISCHED_GENERATOR_HPP_
#define ISCHED_GENERATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "isched/model.hpp"

namespace isched {

struct GenConfig {
  std::size_t processes = 3;   // n, exact number of weakly connected components
  std::size_t min_tasks = 6;   // |T| is drawn uniformly from [min_tasks, max_tasks]
  std::size_t max_tasks = 9;
  std::size_t num_resources = 1;
  /// Probability that a task gets a second predecessor besides its
  /// spanning-tree parent.
  double precedence_density = 0.3;
  /// Window slack on each side of the seed start, as a multiple of d.
  double slack = 1.0;
  /// Per-process slack is drawn from slack × [1 − v, 1 + v]; 0 keeps it uniform.
  double slack_variation = 0.0;
  /// Process release times are spread over spread × mean process length.
  double spread = 1.0;
  Time min_duration = 1;
  Time max_duration = 5;
  Units max_demand = 4;
  std::int64_t min_cost = 1;
  std::int64_t max_cost = 5;
  std::uint64_t seed = 0;
};

struct GeneratedInstance {
  Instance instance;
  Schedule witness;  // feasible by construction
};

/// Lays out a feasible seed schedule process by process, then derives the
/// windows around it. Throws isched::Error for an unsatisfiable config.
GeneratedInstance generate_instance(const GenConfig& cfg);

/// Earliest-start schedule under windows and precedence, ignoring
/// resources; nullopt when the temporal constraints are unsatisfiable.
std::optional<Schedule> earliest_start_schedule(const Instance& inst);

/// Perturbs the duration, window or demands of ⌈fraction·|T|⌉ distinct
/// tasks such that the earliest-start schedule of `inst` stays feasible.
ReconfigDelta generate_delta(const Instance& inst, double fraction, std::uint64_t seed);

enum class Difficulty { kEasy, kNormal, kHard, kUnclassified };

/// Table 1 strata: Easy n=100, |T|∈[2634,3589]; Normal n=200,
/// [5566,6572]; Hard n=300, [8929,9509].
Difficulty classify(std::size_t processes, std::size_t tasks);
std::string difficulty_name(Difficulty d);
/// Generator settings whose output falls in the given stratum.
GenConfig difficulty_config(Difficulty d, std::uint64_t seed);

}  // namespace isched

#endif  // ISCHED_GENERATOR_HPP_
