#ifndef ISCHED_BENCH_HPP_
#define ISCHED_BENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isched/episode.hpp"

namespace isched {

struct BenchMethod {
  std::string policy;    // rl | ccpm | mrrr | dum | rand
  std::string selector;  // learned | mad | tv | mct | rand

  std::string label() const { return policy + "+" + selector; }
};

struct BenchConfig {
  std::vector<std::string> files;
  std::vector<BenchMethod> methods;
  /// Overrides the default budget of 0.1·|T| seconds.
  std::optional<double> time_limit;
  std::uint64_t seed = 0;
  std::size_t pool_size = kDefaultPoolSize;
  std::shared_ptr<const QNetworkParams> qnet;
  std::shared_ptr<const SelectorParams> selector;
  unsigned threads = 1;
};

struct BenchRow {
  std::string instance;
  std::string method;
  std::optional<Rational> objective;  // only set for verified schedules
  double seconds = 0.0;
  double budget = 0.0;
  bool over_budget = false;
  bool feasible = false;
  std::optional<double> ratio;  // objective / bound
  std::size_t iterations = 0;
  std::string note;
};

struct BenchAggregate {
  std::string method;
  std::size_t runs = 0;
  std::size_t feasible = 0;
  double mean_objective = 0.0;
  double std_objective = 0.0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
  double mean_ratio = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;

  /// Per method, over feasible rows only.
  std::vector<BenchAggregate> aggregates() const;
  /// Comma-separated table with a commented header. Timing columns are
  /// blanked when include_timing is false, which makes the bytes
  /// reproducible.
  std::string to_csv(bool include_timing = true) const;
  /// JSON summary record with the aggregates.
  std::string summary_json(bool include_timing = true) const;
};

/// Re-verifies `sched` with check_schedule; the objective is only recorded
/// for feasible schedules.
BenchRow make_row(const Instance& inst, const std::string& instance_id, const std::string& method,
                  const Schedule& sched, double seconds, double budget, std::size_t iterations);

/// Loads every file (aborting with the path on failure) and runs each method
/// from a cold start. Wall-clock time covers the solve call only.
BenchReport run_bench(const BenchConfig& cfg);

}  // namespace isched

#endif  // ISCHED_BENCH_HPP_
