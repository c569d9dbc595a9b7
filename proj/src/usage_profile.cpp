#include "isched/usage_profile.hpp"

#include <algorithm>

#include "isched/error.hpp"
#include "isched/model.hpp"

namespace isched {

UsageProfile::UsageProfile(std::size_t num_resources, Time begin, Time span)
    : num_resources_(num_resources), begin_(begin), span_(span) {
  if (span < 0) throw Error("usage profile with negative span");
  data_.assign(num_resources_ * static_cast<std::size_t>(span_), 0);
}

Units UsageProfile::at(std::size_t k, Time t) const {
  if (k >= num_resources_ || t < begin_ || t >= end()) return 0;
  return data_[k * static_cast<std::size_t>(span_) + static_cast<std::size_t>(t - begin_)];
}

std::span<const Units> UsageProfile::row(std::size_t k) const {
  return std::span<const Units>(data_).subspan(k * static_cast<std::size_t>(span_),
                                               static_cast<std::size_t>(span_));
}

void UsageProfile::add(const Task& task, Time start) {
  if (task.demands.size() != num_resources_) {
    throw Error("task '" + task.id + "' demand arity does not match profile");
  }
  if (start < begin_ || start + task.duration > end()) {
    throw Error("task '" + task.id + "' at " + std::to_string(start) + " lies outside the horizon");
  }
  const auto offset = static_cast<std::size_t>(start - begin_);
  for (std::size_t k = 0; k < num_resources_; ++k) {
    Units r = task.demands[k];
    if (r == 0) continue;
    Units* base = data_.data() + k * static_cast<std::size_t>(span_) + offset;
    for (Time t = 0; t < task.duration; ++t) base[t] += r;
  }
}

void UsageProfile::remove(const Task& task, Time start) {
  if (task.demands.size() != num_resources_) {
    throw Error("task '" + task.id + "' demand arity does not match profile");
  }
  if (start < begin_ || start + task.duration > end()) {
    throw Error("task '" + task.id + "' at " + std::to_string(start) + " lies outside the horizon");
  }
  const auto offset = static_cast<std::size_t>(start - begin_);
  for (std::size_t k = 0; k < num_resources_; ++k) {
    const Units* base = data_.data() + k * static_cast<std::size_t>(span_) + offset;
    for (Time t = 0; t < task.duration; ++t) {
      if (base[t] < task.demands[k]) throw Error("usage would become negative removing '" + task.id + "'");
    }
  }
  for (std::size_t k = 0; k < num_resources_; ++k) {
    Units* base = data_.data() + k * static_cast<std::size_t>(span_) + offset;
    for (Time t = 0; t < task.duration; ++t) base[t] -= task.demands[k];
  }
}

void UsageProfile::check_shape(const UsageProfile& other) const {
  if (other.num_resources_ != num_resources_ || other.begin_ != begin_ || other.span_ != span_) {
    throw Error("usage profiles have different shapes");
  }
}

UsageProfile& UsageProfile::operator+=(const UsageProfile& other) {
  check_shape(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

UsageProfile& UsageProfile::operator-=(const UsageProfile& other) {
  check_shape(other);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] < other.data_[i]) throw Error("usage would become negative");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Units UsageProfile::peak(std::size_t k) const {
  auto r = row(k);
  if (r.empty()) return 0;
  return *std::max_element(r.begin(), r.end());
}

std::vector<Units> UsageProfile::peaks() const {
  std::vector<Units> out(num_resources_);
  for (std::size_t k = 0; k < num_resources_; ++k) out[k] = peak(k);
  return out;
}

Rational UsageProfile::peak_cost(std::span<const ResourceKind> resources) const {
  if (resources.size() != num_resources_) throw Error("cost vector does not match profile");
  Rational total;
  for (std::size_t k = 0; k < num_resources_; ++k) total += resources[k].unit_cost * Rational(peak(k));
  return total;
}

Units UsageProfile::window_sum(std::size_t k, Time from, Time to) const {
  from = std::max(from, begin_);
  to = std::min(to, end() - 1);
  Units total = 0;
  for (Time t = from; t <= to; ++t) total += at(k, t);
  return total;
}

bool UsageProfile::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](Units u) { return u == 0; });
}

}  // namespace isched
