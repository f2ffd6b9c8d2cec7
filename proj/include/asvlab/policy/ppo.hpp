#pragma once

// Clipped-surrogate PPO with clipped value loss, an Adam optimizer and a
// KL-adaptive learning rate. Gradients are computed analytically through the
// actor and critic networks.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "asvlab/common.hpp"
#include "asvlab/policy/gae.hpp"
#include "asvlab/policy/policy_net.hpp"

namespace asvlab::policy {

struct PpoConfig {
  int horizon = 48;
  int iterations = 200;
  int num_envs = 256;
  double learning_rate = 5e-4;
  bool adaptive_lr = true;
  int epochs = 5;
  int minibatches = 4;
  double clip = 0.2;
  double value_coef = 1.0;
  bool clip_value = true;
  double entropy_coef = 0.0;
  double gamma = 0.99;
  double lambda = 0.95;
  double desired_kl = 0.01;
  double init_std = 1.0;
  double max_grad_norm = 1.0;
  double lr_min = 1e-6;
  double lr_max = 1e-2;

  void validate() const {
    if (horizon < 1) throw ConfigError("ppo.horizon must be >= 1");
    if (iterations < 0) throw ConfigError("ppo.iterations must be >= 0");
    if (num_envs < 1) throw ConfigError("ppo.num_envs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("ppo.learning_rate must be > 0");
    if (epochs < 1) throw ConfigError("ppo.epochs must be >= 1");
    if (minibatches < 1) throw ConfigError("ppo.minibatches must be >= 1");
    if (!(clip > 0.0)) throw ConfigError("ppo.clip must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo.gamma must be in (0, 1]");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("ppo.lambda must be in (0, 1]");
    if (!(desired_kl > 0.0)) throw ConfigError("ppo.desired_kl must be > 0");
    if (!(init_std > 0.0)) throw ConfigError("ppo.init_std must be > 0");
    if (!(value_coef >= 0.0)) throw ConfigError("ppo.value_coef must be >= 0");
    if (!(max_grad_norm >= 0.0)) throw ConfigError("ppo.max_grad_norm must be >= 0");
  }
  friend bool operator==(const PpoConfig&, const PpoConfig&) = default;
};

/// Samples laid out column-wise; column index = step * num_envs + env.
struct RolloutBuffer {
  int num_envs = 0;
  int horizon = 0;
  Matrix observations;  // kObsDim x N
  Matrix actions;       // kActDim x N, unclamped draws
  Matrix means;         // kActDim x N, behaviour policy means
  std::array<double, kActDim> log_std{};
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> dones;
  std::vector<double> advantages;
  std::vector<double> returns;

  RolloutBuffer() = default;
  RolloutBuffer(int envs, int steps) : num_envs(envs), horizon(steps) {
    const Eigen::Index n = static_cast<Eigen::Index>(envs) * steps;
    observations = Matrix::Zero(kObsDim, n);
    actions = Matrix::Zero(kActDim, n);
    means = Matrix::Zero(kActDim, n);
    log_probs.assign(static_cast<std::size_t>(n), 0.0);
    rewards = values = dones = advantages = returns = log_probs;
  }

  std::size_t size() const { return log_probs.size(); }
  std::size_t index(int step, int env) const {
    return static_cast<std::size_t>(step) * num_envs + env;
  }

  /// GAE per environment; `bootstrap[e]` is V of the observation after the
  /// last stored step of env e.
  void compute_advantages(const std::vector<double>& bootstrap, double gamma, double lambda) {
    std::vector<double> r(horizon), v(horizon), d(horizon);
    for (int e = 0; e < num_envs; ++e) {
      for (int t = 0; t < horizon; ++t) {
        const auto i = index(t, e);
        r[t] = rewards[i];
        v[t] = values[i];
        d[t] = dones[i];
      }
      const auto ar = gae(r, v, d, bootstrap[e], gamma, lambda);
      for (int t = 0; t < horizon; ++t) {
        advantages[index(t, e)] = ar.advantages[t];
        returns[index(t, e)] = ar.returns[t];
      }
    }
  }
};

/// One minibatch gathered from a buffer.
struct Minibatch {
  Matrix obs;
  Matrix actions;
  Matrix old_means;
  std::array<double, kActDim> old_log_std{};
  std::vector<double> old_log_probs;
  std::vector<double> advantages;  // normalized
  std::vector<double> returns;
  std::vector<double> old_values;
};

/// In-place standardization to zero mean, unit (population) std.
inline void normalize(std::vector<double>& x) {
  if (x.empty()) return;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double a : x) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / n);
  for (double& a : x) a = (a - mean) / (stddev + 1e-12);
  // Second pass removes the residual mean left by rounding.
  const double residual = std::accumulate(x.begin(), x.end(), 0.0) / n;
  for (double& a : x) a -= residual;
}

inline Minibatch gather(const RolloutBuffer& buf, const std::vector<std::size_t>& idx,
                        bool normalize_advantages = true) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Minibatch mb;
  mb.obs.resize(kObsDim, n);
  mb.actions.resize(kActDim, n);
  mb.old_means.resize(kActDim, n);
  mb.old_log_std = buf.log_std;
  mb.old_log_probs.resize(idx.size());
  mb.advantages.resize(idx.size());
  mb.returns.resize(idx.size());
  mb.old_values.resize(idx.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto j = idx[static_cast<std::size_t>(k)];
    const auto c = static_cast<Eigen::Index>(j);
    mb.obs.col(k) = buf.observations.col(c);
    mb.actions.col(k) = buf.actions.col(c);
    mb.old_means.col(k) = buf.means.col(c);
    mb.old_log_probs[k] = buf.log_probs[j];
    mb.advantages[k] = buf.advantages[j];
    mb.returns[k] = buf.returns[j];
    mb.old_values[k] = buf.values[j];
  }
  if (normalize_advantages) normalize(mb.advantages);
  return mb;
}

struct LossTerms {
  double surrogate = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
};

/// Total PPO loss  surrogate + value_coef * value - entropy_coef * entropy.
/// When `grad` is non-null it receives dLoss/dparams (overwritten).
inline LossTerms ppo_loss(const PolicyNet& net, const Minibatch& mb, const PpoConfig& cfg,
                          Vector* grad) {
  const Eigen::Index n = mb.obs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  MlpCache actor_cache, critic_cache;
  const Matrix mean = net.action_mean(mb.obs, grad ? &actor_cache : nullptr);
  const Matrix value = net.value(mb.obs, grad ? &critic_cache : nullptr);
  std::array<double, kActDim> log_std{};
  std::array<double, kActDim> inv_var{};
  for (int i = 0; i < kActDim; ++i) {
    log_std[i] = net.log_std(i);
    inv_var[i] = std::exp(-2.0 * log_std[i]);
  }

  LossTerms out;
  Matrix d_mean;
  Matrix d_value;
  std::array<double, kActDim> d_log_std{};
  if (grad) {
    d_mean = Matrix::Zero(kActDim, n);
    d_value = Matrix::Zero(1, n);
  }
  int clipped = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lp = gaussian_log_prob(mb.actions.col(k).data(), mean.col(k).data(), log_std);
    const double ratio = std::exp(lp - mb.old_log_probs[k]);
    const double adv = mb.advantages[k];
    const double s1 = ratio * adv;
    const double s2 = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
    out.surrogate -= std::min(s1, s2) * inv_n;
    const bool unclipped = s1 <= s2;
    if (!unclipped) ++clipped;

    const double v = value(0, k);
    const double ret = mb.returns[k];
    double dv = 0.0;
    if (cfg.clip_value) {
      const double v_old = mb.old_values[k];
      const double v_clip = v_old + std::clamp(v - v_old, -cfg.clip, cfg.clip);
      const double l1 = (v - ret) * (v - ret);
      const double l2 = (v_clip - ret) * (v_clip - ret);
      out.value += std::max(l1, l2) * inv_n;
      dv = l1 >= l2 ? 2.0 * (v - ret) * inv_n : 0.0;
    } else {
      out.value += (v - ret) * (v - ret) * inv_n;
      dv = 2.0 * (v - ret) * inv_n;
    }

    if (grad) {
      // dL/dlogp = -ratio * adv / n on the unclipped branch, 0 otherwise.
      const double g_lp = unclipped ? -ratio * adv * inv_n : 0.0;
      for (int i = 0; i < kActDim; ++i) {
        const double diff = mb.actions(i, k) - mean(i, k);
        d_mean(i, k) = g_lp * diff * inv_var[i];
        d_log_std[i] += g_lp * (diff * diff * inv_var[i] - 1.0);
      }
      d_value(0, k) = cfg.value_coef * dv;
    }
  }
  for (int i = 0; i < kActDim; ++i) out.entropy += log_std[i] + 0.5 * (kLog2Pi + 1.0);
  out.total = out.surrogate + cfg.value_coef * out.value - cfg.entropy_coef * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) * inv_n;

  if (grad) {
    grad->setZero(net.num_params());
    net.actor().backward(net.params(), actor_cache, d_mean, *grad);
    net.critic().backward(net.params(), critic_cache, d_value, *grad);
    for (int i = 0; i < kActDim; ++i) {
      (*grad)[static_cast<Eigen::Index>(net.log_std_offset() + i)] +=
          d_log_std[i] - cfg.entropy_coef;
    }
  }
  return out;
}

/// Mean KL(old || new) between diagonal Gaussians over the given samples.
inline double mean_kl(const Matrix& old_means, const std::array<double, kActDim>& old_log_std,
                      const Matrix& new_means, const std::array<double, kActDim>& new_log_std) {
  const Eigen::Index n = old_means.cols();
  double kl = 0.0;
  for (int i = 0; i < kActDim; ++i) {
    const double var_old = std::exp(2.0 * old_log_std[i]);
    const double var_new = std::exp(2.0 * new_log_std[i]);
    const double sq = (old_means.row(i) - new_means.row(i)).squaredNorm() / n;
    kl += new_log_std[i] - old_log_std[i] + (var_old + sq) / (2.0 * var_new) - 0.5;
  }
  return kl;
}

class Adam {
 public:
  Adam() = default;
  explicit Adam(Eigen::Index n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : m_(Vector::Zero(n)), v_(Vector::Zero(n)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Vector& params, const Vector& grad, double lr) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  long steps() const { return t_; }

 private:
  Vector m_;
  Vector v_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
};

struct UpdateStats {
  double surrogate = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double kl = 0.0;          // after the last epoch
  double learning_rate = 0.0;
  double clip_fraction = 0.0;
};

/// Applies the KL rule to the current learning rate.
inline double adapt_learning_rate(double lr, double kl, const PpoConfig& cfg) {
  if (kl > 1.5 * cfg.desired_kl) {
    lr *= 0.5;
  } else if (kl < cfg.desired_kl / 1.5) {
    lr *= 1.5;
  }
  return std::clamp(lr, cfg.lr_min, cfg.lr_max);
}

/// epochs x minibatches of Adam steps on the PPO loss. `lr` carries the
/// adaptive learning rate across updates. Throws SimulationFault on a
/// non-finite loss, leaving `net` at its pre-update parameters.
inline UpdateStats ppo_update(const RolloutBuffer& buf, PolicyNet& net, Adam& opt, double& lr,
                              const PpoConfig& cfg, Rng& rng) {
  const std::size_t n = buf.size();
  const Vector before = net.params();
  std::vector<std::size_t> order(n);
  UpdateStats stats;
  int count = 0;
  Vector grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t per = n / static_cast<std::size_t>(cfg.minibatches);
    for (int b = 0; b < cfg.minibatches; ++b) {
      const auto first = order.begin() + static_cast<std::ptrdiff_t>(b * per);
      const auto last = (b + 1 == cfg.minibatches) ? order.end()
                                                   : first + static_cast<std::ptrdiff_t>(per);
      const Minibatch mb = gather(buf, std::vector<std::size_t>(first, last));
      const LossTerms loss = ppo_loss(net, mb, cfg, &grad);
      if (!std::isfinite(loss.total) || !grad.allFinite()) {
        net.params() = before;
        throw SimulationFault("ppo_update: non-finite loss in epoch " + std::to_string(epoch) +
                              ", minibatch " + std::to_string(b));
      }
      if (cfg.max_grad_norm > 0.0) {
        const double norm = grad.norm();
        if (norm > cfg.max_grad_norm) grad *= cfg.max_grad_norm / norm;
      }
      opt.step(net.params(), grad, lr);
      net.clamp_log_std();
      stats.surrogate += loss.surrogate;
      stats.value += loss.value;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
      ++count;
    }
    std::array<double, kActDim> new_log_std{};
    for (int i = 0; i < kActDim; ++i) new_log_std[i] = net.log_std(i);
    stats.kl = mean_kl(buf.means, buf.log_std, net.action_mean(buf.observations), new_log_std);
    if (cfg.adaptive_lr) lr = adapt_learning_rate(lr, stats.kl, cfg);
  }
  stats.surrogate /= count;
  stats.value /= count;
  stats.entropy /= count;
  stats.clip_fraction /= count;
  stats.learning_rate = lr;
  return stats;
}

}  // namespace asvlab::policy
