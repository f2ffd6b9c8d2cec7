#pragma once

#include <span>
#include <string>
#include <vector>

#include "asvlab/common.hpp"

namespace asvlab::policy {

struct AdvantageReturns {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation over one environment's time-ordered
/// samples. dones[t] != 0 means the episode ended after step t, so neither the
/// value nor the advantage of step t + 1 leaks back across the boundary.
/// `bootstrap` is V(s_T) for the observation following the last step.
inline AdvantageReturns gae(std::span<const double> rewards, std::span<const double> values,
                            std::span<const double> dones, double bootstrap, double gamma,
                            double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw SimulationFault("gae: rewards/values/dones size mismatch (" + std::to_string(n) + "/" +
                          std::to_string(values.size()) + "/" + std::to_string(dones.size()) +
                          ")");
  }
  AdvantageReturns out{std::vector<double>(n), std::vector<double>(n)};
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double not_done = 1.0 - dones[i];
    const double next_value = (i + 1 == n) ? bootstrap : values[i + 1];
    const double delta = rewards[i] + gamma * next_value * not_done - values[i];
    next_adv = delta + gamma * lambda * not_done * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
  }
  return out;
}

}  // namespace asvlab::policy
