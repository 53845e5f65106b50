#pragma once

#include "homing/common/random.hpp"
#include "homing/common/types.hpp"

#include <array>
#include <span>

namespace homing::nn {

// Independent two-way categorical per thruster. Logits are stored pairwise
// as [off_0, on_0, off_1, on_1, ...].
class MultiCategorical {
 public:
  static constexpr int kLogits = 2 * kNumThrusters;

  explicit MultiCategorical(std::span<const double> logits);

  const std::array<double, kLogits>& logits() const { return logits_; }

  /// log p(category) for thruster i, computed with a stable log-sum-exp.
  double log_prob(int thruster, int category) const;
  double prob(int thruster, int category) const;
  double log_prob(const ThrusterAction& action) const;

  ThrusterAction sample(Rng& rng) const;
  /// Per-pair argmax; exact ties resolve to off.
  ThrusterAction greedy() const;

  double entropy() const;

  // d log_prob(action) / d logits, written into out (size kLogits).
  void grad_log_prob(const ThrusterAction& action, std::span<double> out) const;

 private:
  std::array<double, kLogits> logits_;
};

/// KL(p || q) summed over the independent thruster distributions.
double kl_divergence(const MultiCategorical& p, const MultiCategorical& q);

}  // namespace homing::nn
