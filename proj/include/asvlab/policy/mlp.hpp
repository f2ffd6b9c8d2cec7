#pragma once

// Fully connected network over a flat parameter vector. Hidden layers use ELU
// (alpha = 1), the output layer is linear. Samples are stored column-wise.

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <vector>

#include "asvlab/common.hpp"

namespace asvlab::policy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Vector>;
using ConstVectorMap = Eigen::Map<const Vector>;

struct LayerShape {
  int in;
  int out;
  std::size_t weight_offset;
  std::size_t bias_offset;
};

/// Activations kept from the forward pass for backpropagation.
struct MlpCache {
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post[0] = input, post[i + 1] = output of layer i
};

class Mlp {
 public:
  Mlp() = default;

  /// `sizes` lists layer widths including input and output. Parameters live in
  /// an external flat vector starting at `offset`.
  Mlp(const std::vector<int>& sizes, std::size_t offset) {
    std::size_t cursor = offset;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      LayerShape l{sizes[i], sizes[i + 1], cursor, 0};
      cursor += static_cast<std::size_t>(l.in) * l.out;
      l.bias_offset = cursor;
      cursor += static_cast<std::size_t>(l.out);
      layers_.push_back(l);
    }
    offset_ = offset;
    size_ = cursor - offset;
  }

  std::size_t offset() const { return offset_; }
  std::size_t size() const { return size_; }
  int input_dim() const { return layers_.front().in; }
  int output_dim() const { return layers_.back().out; }
  const std::vector<LayerShape>& layers() const { return layers_; }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void initialize(Vector& params, Rng& rng) const {
    for (const auto& l : layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
      for (std::size_t k = 0; k < static_cast<std::size_t>(l.in) * l.out; ++k) {
        params[static_cast<Eigen::Index>(l.weight_offset + k)] = uniform(rng, -bound, bound);
      }
      for (int k = 0; k < l.out; ++k) {
        params[static_cast<Eigen::Index>(l.bias_offset + k)] = uniform(rng, -bound, bound);
      }
    }
  }

  static double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
  static double elu_grad_from_pre(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

  Matrix forward(const Vector& params, const Matrix& input, MlpCache* cache = nullptr) const {
    Matrix h = input;
    if (cache) {
      cache->pre.resize(layers_.size());
      cache->post.resize(layers_.size() + 1);
      cache->post[0] = input;
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      ConstMatrixMap W(params.data() + l.weight_offset, l.out, l.in);
      ConstVectorMap b(params.data() + l.bias_offset, l.out);
      Matrix z = W * h;
      z.colwise() += b;
      const bool hidden = i + 1 < layers_.size();
      if (cache) cache->pre[i] = z;
      if (hidden) z = z.unaryExpr(&Mlp::elu);
      if (cache) cache->post[i + 1] = z;
      h = std::move(z);
    }
    return h;
  }

  /// Accumulates dLoss/dparams into `grad` given dLoss/doutput.
  void backward(const Vector& params, const MlpCache& cache, const Matrix& d_output,
                Vector& grad) const {
    Matrix delta = d_output;
    for (std::size_t ii = layers_.size(); ii-- > 0;) {
      const auto& l = layers_[ii];
      const bool hidden = ii + 1 < layers_.size();
      if (hidden) {
        delta.array() *= cache.pre[ii].unaryExpr(&Mlp::elu_grad_from_pre).array();
      }
      MatrixMap gW(grad.data() + l.weight_offset, l.out, l.in);
      VectorMap gb(grad.data() + l.bias_offset, l.out);
      gW.noalias() += delta * cache.post[ii].transpose();
      gb += delta.rowwise().sum();
      if (ii > 0) {
        ConstMatrixMap W(params.data() + l.weight_offset, l.out, l.in);
        delta = W.transpose() * delta;
      }
    }
  }

 private:
  std::vector<LayerShape> layers_;
  std::size_t offset_ = 0;
  std::size_t size_ = 0;
};

}  // namespace asvlab::policy
