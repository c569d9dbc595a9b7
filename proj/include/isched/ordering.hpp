#ifndef ISCHED_ORDERING_HPP_
#define ISCHED_ORDERING_HPP_

#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include "isched/decomposition.hpp"
#include "isched/qnet.hpp"

namespace isched {

enum class OrderingKind { kCcpm, kMrrr, kDum, kRand, kRl };

/// Picks the next process from the candidate set.
///   CCPM  min (LF, -PT, id)
///   MRRR  max Σ_{i∈P} Σ_k c_k r_ik d_i, ties to the smaller id
///   DUM   max |T_P|, ties to the smaller id
///   RAND  uniform, private seeded generator
///   RL    argmax Q, ties to the smaller id
class OrderingPolicy {
 public:
  static OrderingPolicy ccpm();
  static OrderingPolicy mrrr();
  static OrderingPolicy dum();
  static OrderingPolicy random(std::uint64_t seed);
  static OrderingPolicy rl(std::shared_ptr<const QNetworkParams> params);
  /// rl | ccpm | mrrr | dum | rand
  static OrderingPolicy from_name(const std::string& name, std::uint64_t seed,
                                  std::shared_ptr<const QNetworkParams> params = nullptr);

  OrderingKind kind() const { return kind_; }
  std::string name() const;

  ProcessId select_next(const ProcessGraph& graph, const Instance& inst, const UsageProfile& rpu,
                        int iteration = 0);

 private:
  explicit OrderingPolicy(OrderingKind kind) : kind_(kind) {}

  OrderingKind kind_;
  std::shared_ptr<const QNetworkParams> params_;
  std::mt19937_64 rng_;
};

/// Σ_{i∈P} Σ_k c_k r_ik d_i, exact.
Rational resource_requirement(const Process& proc, const Instance& inst);

}  // namespace isched

#endif  // ISCHED_ORDERING_HPP_
