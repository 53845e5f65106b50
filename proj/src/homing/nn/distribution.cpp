#include "homing/nn/distribution.hpp"

#include "homing/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace homing::nn {

namespace {

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

MultiCategorical::MultiCategorical(std::span<const double> logits) {
  if (logits.size() != static_cast<std::size_t>(kLogits))
    throw Error(ErrorCode::kConfig, "multi-categorical: expected 2 logits per thruster");
  std::copy(logits.begin(), logits.end(), logits_.begin());
}

double MultiCategorical::log_prob(int i, int category) const {
  const double a = logits_[2 * i];
  const double b = logits_[2 * i + 1];
  return (category ? b : a) - log_sum_exp(a, b);
}

double MultiCategorical::prob(int i, int category) const { return std::exp(log_prob(i, category)); }

double MultiCategorical::log_prob(const ThrusterAction& action) const {
  double lp = 0.0;
  for (int i = 0; i < kNumThrusters; ++i) lp += log_prob(i, action[i] ? 1 : 0);
  return lp;
}

ThrusterAction MultiCategorical::sample(Rng& rng) const {
  ThrusterAction a{};
  for (int i = 0; i < kNumThrusters; ++i) {
    const double u = std::generate_canonical<double, 64>(rng);
    a[i] = u < prob(i, 1) ? 1 : 0;
  }
  return a;
}

ThrusterAction MultiCategorical::greedy() const {
  ThrusterAction a{};
  for (int i = 0; i < kNumThrusters; ++i) a[i] = logits_[2 * i + 1] > logits_[2 * i] ? 1 : 0;
  return a;
}

double MultiCategorical::entropy() const {
  double h = 0.0;
  for (int i = 0; i < kNumThrusters; ++i)
    for (int c = 0; c < 2; ++c) h -= prob(i, c) * log_prob(i, c);
  return h;
}

void MultiCategorical::grad_log_prob(const ThrusterAction& action, std::span<double> out) const {
  for (int i = 0; i < kNumThrusters; ++i) {
    const int chosen = action[i] ? 1 : 0;
    for (int c = 0; c < 2; ++c) out[2 * i + c] = (c == chosen ? 1.0 : 0.0) - prob(i, c);
  }
}

double kl_divergence(const MultiCategorical& p, const MultiCategorical& q) {
  double kl = 0.0;
  for (int i = 0; i < kNumThrusters; ++i)
    for (int c = 0; c < 2; ++c) kl += p.prob(i, c) * (p.log_prob(i, c) - q.log_prob(i, c));
  return kl;
}

}  // namespace homing::nn
