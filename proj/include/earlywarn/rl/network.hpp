#pragma once

// Dense feed-forward network with tanh hidden layers and a linear output
// layer, plus the Adam optimizer. Parameters live in one flat vector so the
// optimizer, gradient checks and checkpoints can treat them uniformly.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "earlywarn/errors.hpp"
#include "earlywarn/random.hpp"

namespace earlywarn::rl {

class Mlp {
 public:
  /// Per-layer activations of one forward pass. activations[0] is the input,
  /// the last entry is the (linear) output.
  struct Cache {
    std::vector<std::vector<double>> activations;
  };

  Mlp() = default;

  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ConfigError("network needs at least input and output layers");
    std::size_t total = 0;
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
      if (sizes_[k] < 1 || sizes_[k + 1] < 1) throw ConfigError("layer sizes must be positive");
      offsets_.push_back(total);
      total += static_cast<std::size_t>(sizes_[k + 1]) * static_cast<std::size_t>(sizes_[k] + 1);
    }
    params_.assign(total, 0.0);
  }

  /// Hidden layers uniform in +-1/sqrt(fan_in); the output layer starts at zero.
  void initialize(Rng& rng) {
    for (std::size_t k = 0; k < layers(); ++k) {
      const bool last = k + 1 == layers();
      const double bound = 1.0 / std::sqrt(static_cast<double>(in_size(k)));
      auto w = weights(k);
      for (auto& x : w) x = last ? 0.0 : uniform(rng, -bound, bound);
      for (auto& x : biases(k)) x = 0.0;
    }
  }

  std::size_t layers() const noexcept { return offsets_.size(); }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  int input_size() const noexcept { return sizes_.front(); }
  int output_size() const noexcept { return sizes_.back(); }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  void forward(std::span<const double> input, Cache& cache) const {
    cache.activations.resize(sizes_.size());
    cache.activations[0].assign(input.begin(), input.end());
    for (std::size_t k = 0; k < layers(); ++k) {
      const std::size_t n_in = in_size(k);
      const std::size_t n_out = out_size(k);
      const double* w = params_.data() + offsets_[k];
      const double* b = w + n_in * n_out;
      const auto& x = cache.activations[k];
      auto& y = cache.activations[k + 1];
      y.resize(n_out);
      const bool last = k + 1 == layers();
      for (std::size_t o = 0; o < n_out; ++o) {
        const double* row = w + o * n_in;
        double s = b[o];
        for (std::size_t i = 0; i < n_in; ++i) s += row[i] * x[i];
        y[o] = last ? s : std::tanh(s);
      }
    }
  }

  std::vector<double> forward(std::span<const double> input) const {
    Cache cache;
    forward(input, cache);
    return cache.activations.back();
  }

  /// Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
  void backward(const Cache& cache, std::span<const double> grad_output,
                std::span<double> grad) const {
    std::vector<double> g(grad_output.begin(), grad_output.end());
    std::vector<double> g_in;
    for (std::size_t k = layers(); k-- > 0;) {
      const std::size_t n_in = in_size(k);
      const std::size_t n_out = out_size(k);
      const double* w = params_.data() + offsets_[k];
      double* gw = grad.data() + offsets_[k];
      double* gb = gw + n_in * n_out;
      const auto& x = cache.activations[k];
      g_in.assign(n_in, 0.0);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double go = g[o];
        if (go == 0.0) continue;
        gb[o] += go;
        const double* row = w + o * n_in;
        double* grow = gw + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) {
          grow[i] += go * x[i];
          g_in[i] += row[i] * go;
        }
      }
      if (k == 0) break;
      // x is tanh output of the previous layer: d tanh = 1 - y^2.
      for (std::size_t i = 0; i < n_in; ++i) g_in[i] *= 1.0 - x[i] * x[i];
      g.swap(g_in);
    }
  }

  bool operator==(const Mlp&) const = default;

 private:
  std::size_t in_size(std::size_t k) const noexcept { return static_cast<std::size_t>(sizes_[k]); }
  std::size_t out_size(std::size_t k) const noexcept {
    return static_cast<std::size_t>(sizes_[k + 1]);
  }
  std::span<double> weights(std::size_t k) noexcept {
    return {params_.data() + offsets_[k], in_size(k) * out_size(k)};
  }
  std::span<double> biases(std::size_t k) noexcept {
    return {params_.data() + offsets_[k] + in_size(k) * out_size(k), out_size(k)};
  }

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, double learning_rate) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      params[i] -= learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

  long long steps() const noexcept { return t_; }
  const std::vector<double>& first_moment() const noexcept { return m_; }
  const std::vector<double>& second_moment() const noexcept { return v_; }

  /// Restores a checkpointed optimizer state.
  void restore(long long t, std::vector<double> m, std::vector<double> v) {
    if (m.size() != m_.size() || v.size() != v_.size()) {
      throw ValidationError("optimizer state size mismatch");
    }
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

  bool operator==(const Adam&) const = default;

 private:
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace earlywarn::rl
