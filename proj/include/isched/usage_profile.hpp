#ifndef ISCHED_USAGE_PROFILE_HPP_
#define ISCHED_USAGE_PROFILE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isched/rational.hpp"

namespace isched {

using Time = std::int64_t;
using Units = std::int64_t;

struct Task;
struct ResourceKind;

/// Per-resource usage u_k(t) over a discrete horizon [begin, begin + span).
/// Unit step t covers the half-open interval [t, t + 1). Reads outside the
/// horizon return zero.
class UsageProfile {
 public:
  UsageProfile() = default;
  UsageProfile(std::size_t num_resources, Time begin, Time span);

  std::size_t num_resources() const { return num_resources_; }
  Time begin() const { return begin_; }
  Time end() const { return begin_ + span_; }
  Time span() const { return span_; }

  Units at(std::size_t k, Time t) const;
  std::span<const Units> row(std::size_t k) const;

  /// Adds the demand of `task` over [start, start + duration).
  void add(const Task& task, Time start);
  /// Inverse of add(); throws if any entry would become negative.
  void remove(const Task& task, Time start);

  UsageProfile& operator+=(const UsageProfile& other);
  UsageProfile& operator-=(const UsageProfile& other);
  friend UsageProfile operator+(UsageProfile a, const UsageProfile& b) { return a += b; }

  Units peak(std::size_t k) const;
  std::vector<Units> peaks() const;
  /// Σ_k c_k · max_t u_k(t).
  Rational peak_cost(std::span<const ResourceKind> resources) const;

  /// Σ_{t=from}^{to} u_k(t), both ends inclusive, clipped to the horizon.
  Units window_sum(std::size_t k, Time from, Time to) const;

  bool is_zero() const;

  friend bool operator==(const UsageProfile&, const UsageProfile&) = default;

 private:
  void check_shape(const UsageProfile& other) const;

  std::size_t num_resources_ = 0;
  Time begin_ = 0;
  Time span_ = 0;
  std::vector<Units> data_;  // resource-major, span_ entries per resource
};

}  // namespace isched

#endif  // ISCHED_USAGE_PROFILE_HPP_
