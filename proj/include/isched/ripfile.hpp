#ifndef ISCHED_RIPFILE_HPP_
#define ISCHED_RIPFILE_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "isched/model.hpp"

namespace isched {

struct RipMetadata {
  std::optional<Rational> best_cost;
  std::optional<double> time;
  std::optional<Rational> bound;
  std::string producer;  // written as `_producer`, informational only
};

/// One L-RIPLIB style record.
struct RipRecord {
  Instance instance;
  std::optional<Schedule> prior;        // Task_start
  std::optional<ReconfigDelta> delta;   // Modified_data
  RipMetadata meta;
};

struct LoadedRip {
  RipRecord record;
  /// Verdict on the embedded Task_start, when present. Partial assignments
  /// are reported as infeasible.
  std::optional<FeasibilityReport> prior_check;
};

/// Structural decoding only; throws ParseError with the offending field.
/// The instance itself is not validated.
LoadedRip parse_instance(std::string_view text);

/// Reads, decodes and validates. Throws ParseError, or ConstraintError when
/// the decoded instance violates the model invariants.
LoadedRip load_instance(const std::string& path);

/// Canonical form: tasks in id order, two-space indentation, keys in the
/// L-RIPLIB order, integers unquoted, non-integral costs as "p/q" strings.
std::string serialize_instance(const RipRecord& record);
void save_instance(const std::string& path, const RipRecord& record);

}  // namespace isched

#endif  // ISCHED_RIPFILE_HPP_
