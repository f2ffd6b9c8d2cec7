#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "asvlab/common.hpp"
#include "asvlab/policy/mlp.hpp"

namespace asvlab::policy {

inline constexpr int kObsDim = 8;
inline constexpr int kActDim = 2;
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline const double kLog2Pi = std::log(2.0 * kPi);

struct NetShape {
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  friend bool operator==(const NetShape&, const NetShape&) = default;
};

/// Actor-critic pair with a state-independent log standard deviation. All
/// trainable values share one flat vector: [actor | log_std | critic].
class PolicyNet {
 public:
  PolicyNet() : PolicyNet(NetShape{}) {}

  explicit PolicyNet(const NetShape& shape) : shape_(shape) {
    std::vector<int> a{kObsDim};
    a.insert(a.end(), shape.actor_hidden.begin(), shape.actor_hidden.end());
    a.push_back(kActDim);
    actor_ = Mlp(a, 0);
    log_std_offset_ = actor_.size();
    std::vector<int> c{kObsDim};
    c.insert(c.end(), shape.critic_hidden.begin(), shape.critic_hidden.end());
    c.push_back(1);
    critic_ = Mlp(c, log_std_offset_ + kActDim);
    params_ = Vector::Zero(static_cast<Eigen::Index>(critic_.offset() + critic_.size()));
  }

  void initialize(Rng& rng, double init_std) {
    actor_.initialize(params_, rng);
    critic_.initialize(params_, rng);
    for (int i = 0; i < kActDim; ++i) log_std(i) = std::log(init_std);
  }

  const NetShape& shape() const { return shape_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  Eigen::Index num_params() const { return params_.size(); }
  std::size_t log_std_offset() const { return log_std_offset_; }

  double& log_std(int i) { return params_[static_cast<Eigen::Index>(log_std_offset_ + i)]; }
  double log_std(int i) const { return params_[static_cast<Eigen::Index>(log_std_offset_ + i)]; }

  void clamp_log_std() {
    for (int i = 0; i < kActDim; ++i) log_std(i) = std::clamp(log_std(i), kLogStdMin, kLogStdMax);
  }

  Matrix action_mean(const Matrix& obs, MlpCache* cache = nullptr) const {
    return actor_.forward(params_, obs, cache);
  }

  Matrix value(const Matrix& obs, MlpCache* cache = nullptr) const {
    return critic_.forward(params_, obs, cache);
  }

  bool finite() const { return params_.allFinite(); }

  friend bool operator==(const PolicyNet& a, const PolicyNet& b) {
    return a.shape_ == b.shape_ && a.params_ == b.params_;
  }

 private:
  NetShape shape_;
  Mlp actor_;
  Mlp critic_;
  std::size_t log_std_offset_ = 0;
  Vector params_;
};

struct ForwardResult {
  Matrix mean;       // kActDim x N
  std::array<double, kActDim> log_std;
  Matrix value;      // 1 x N
};

/// Deterministic forward pass; throws SimulationFault on non-finite outputs.
inline ForwardResult forward(const PolicyNet& net, const Matrix& obs) {
  ForwardResult out{net.action_mean(obs), {}, net.value(obs)};
  for (int i = 0; i < kActDim; ++i) out.log_std[i] = net.log_std(i);
  if (!out.mean.allFinite() || !out.value.allFinite()) {
    throw SimulationFault("policy forward pass produced non-finite activations");
  }
  return out;
}

inline double gaussian_log_prob(const double* x, const double* mean,
                                const std::array<double, kActDim>& log_std) {
  double lp = 0.0;
  for (int i = 0; i < kActDim; ++i) {
    const double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - 0.5 * kLog2Pi;
  }
  return lp;
}

struct SampledAction {
  std::array<double, kActDim> raw;       // unclamped Gaussian draw
  std::array<double, kActDim> executed;  // clamped to [-1, 1]
  double log_prob;                       // of the unclamped draw
};

inline SampledAction sample_action(const double* mean, const std::array<double, kActDim>& log_std,
                                   Rng& rng) {
  SampledAction s{};
  for (int i = 0; i < kActDim; ++i) {
    s.raw[i] = mean[i] + std::exp(log_std[i]) * normal(rng);
    s.executed[i] = std::clamp(s.raw[i], -1.0, 1.0);
  }
  s.log_prob = gaussian_log_prob(s.raw.data(), mean, log_std);
  return s;
}

}  // namespace asvlab::policy
