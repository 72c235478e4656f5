/*
Copyright 2026 The ebdoa Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Small differentiable kernel set: dense and transposed-convolution layers,
// ReLU, fused sigmoid + binary cross-entropy, Adam and finite-difference
// gradient checking. Every layer exposes explicit forward/backward passes.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#if defined(__SSE__) || defined(__x86_64__)
#include <xmmintrin.h>
#endif

#include "ebdoa/errors.hpp"
#include "ebdoa/rng.hpp"

namespace ebdoa::nn {

// Storage aligned to Eigen's widest packet. Eigen picks vectorised or scalar
// code paths from the runtime alignment of a buffer, so aligned storage is
// what makes results bit-identical between runs.
template <class T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

/// Dense NCHW tensor with up to four dimensions; unused trailing
/// dimensions are 1.
template <class T>
class Tensor {
 public:
  using Shape = std::array<int, 4>;

  Tensor() : shape_{0, 1, 1, 1} {}
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape) {
    for (int d : shape_)
      if (d < 0) throw DomainError("Tensor: negative dimension");
    data_.assign(count(shape_), fill);
  }
  Tensor(Shape shape, std::span<const T> values) : shape_(shape), data_(values.begin(), values.end()) {
    if (data_.size() != count(shape_)) throw DomainError("Tensor: value count does not match shape");
  }

  static std::size_t count(const Shape& s) {
    return static_cast<std::size_t>(s[0]) * static_cast<std::size_t>(s[1]) *
           static_cast<std::size_t>(s[2]) * static_cast<std::size_t>(s[3]);
  }

  const Shape& shape() const { return shape_; }
  int batch() const { return shape_[0]; }
  int channels() const { return shape_[1]; }
  int height() const { return shape_[2]; }
  int width() const { return shape_[3]; }
  // Features per batch item.
  int item_size() const { return shape_[1] * shape_[2] * shape_[3]; }
  std::size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  AlignedVector<T>& values() { return data_; }
  const AlignedVector<T>& values() const { return data_; }

  T& operator()(int n, int c, int h, int w) { return data_[offset(n, c, h, w)]; }
  T operator()(int n, int c, int h, int w) const { return data_[offset(n, c, h, w)]; }

  /// Same values under a new shape with the same element count.
  Tensor reshaped(Shape shape) const {
    if (count(shape) != data_.size()) throw DomainError("Tensor: reshape changes element count");
    return Tensor(shape, data_);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

 private:
  std::size_t offset(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * static_cast<std::size_t>(shape_[1]) +
             static_cast<std::size_t>(c)) * static_cast<std::size_t>(shape_[2]) +
            static_cast<std::size_t>(h)) * static_cast<std::size_t>(shape_[3]) +
           static_cast<std::size_t>(w);
  }

  Shape shape_;
  AlignedVector<T> data_;
};

enum class LayerKind : std::uint8_t { Dense = 0, Deconv2d = 1 };

struct DenseGeometry {
  int in_features = 0;
  int out_features = 0;
  friend bool operator==(const DenseGeometry&, const DenseGeometry&) = default;
};

/// Transposed convolution geometry. Output size per axis is
/// (in - 1) * stride - 2 * pad + kernel + output_pad.
struct DeconvGeometry {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 1, kernel_w = 1;
  int stride_h = 1, stride_w = 1;
  int pad_h = 0, pad_w = 0;
  int output_pad_h = 0, output_pad_w = 0;

  int out_height(int in) const { return (in - 1) * stride_h - 2 * pad_h + kernel_h + output_pad_h; }
  int out_width(int in) const { return (in - 1) * stride_w - 2 * pad_w + kernel_w + output_pad_w; }

  void validate() const {
    if (in_channels <= 0 || out_channels <= 0 || kernel_h <= 0 || kernel_w <= 0 || stride_h <= 0 ||
        stride_w <= 0 || pad_h < 0 || pad_w < 0 || output_pad_h < 0 || output_pad_w < 0)
      throw ConfigError("DeconvGeometry: non-positive size or negative padding");
    if (output_pad_h >= stride_h || output_pad_w >= stride_w)
      throw ConfigError("DeconvGeometry: output padding must be smaller than the stride");
  }
  friend bool operator==(const DeconvGeometry&, const DeconvGeometry&) = default;
};

/// Weights and bias of one layer. Dense weights are (out, in) row-major;
/// deconv weights are (in_channels, out_channels, kernel_h, kernel_w).
template <class T>
struct LayerParams {
  LayerKind kind = LayerKind::Dense;
  DenseGeometry dense;
  DeconvGeometry deconv;
  AlignedVector<T> weight;
  AlignedVector<T> bias;

  static LayerParams make_dense(int in, int out) {
    if (in <= 0 || out <= 0) throw ConfigError("dense layer needs positive feature counts");
    LayerParams p;
    p.kind = LayerKind::Dense;
    p.dense = {in, out};
    p.weight.assign(static_cast<std::size_t>(in) * static_cast<std::size_t>(out), T(0));
    p.bias.assign(static_cast<std::size_t>(out), T(0));
    return p;
  }
  static LayerParams make_deconv(const DeconvGeometry& g) {
    g.validate();
    LayerParams p;
    p.kind = LayerKind::Deconv2d;
    p.deconv = g;
    p.weight.assign(static_cast<std::size_t>(g.in_channels) * g.out_channels * g.kernel_h * g.kernel_w,
                    T(0));
    p.bias.assign(static_cast<std::size_t>(g.out_channels), T(0));
    return p;
  }

  /// Same geometry, all-zero values.
  LayerParams zeros_like() const {
    LayerParams p = *this;
    std::fill(p.weight.begin(), p.weight.end(), T(0));
    std::fill(p.bias.begin(), p.bias.end(), T(0));
    return p;
  }

  std::size_t expected_weight_count() const {
    if (kind == LayerKind::Dense)
      return static_cast<std::size_t>(dense.in_features) * static_cast<std::size_t>(dense.out_features);
    return static_cast<std::size_t>(deconv.in_channels) * deconv.out_channels * deconv.kernel_h *
           deconv.kernel_w;
  }
  std::size_t expected_bias_count() const {
    return static_cast<std::size_t>(kind == LayerKind::Dense ? dense.out_features
                                                             : deconv.out_channels);
  }
  void check() const {
    if (weight.size() != expected_weight_count() || bias.size() != expected_bias_count())
      throw DomainError("LayerParams: weight/bias sizes do not match the layer geometry");
  }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

template <class T>
struct LayerBackward {
  Tensor<T> grad_input;
  LayerParams<T> grad_params;
};

// ---------------------------------------------------------------------------
// Dense

template <class T>
Tensor<T> dense(const LayerParams<T>& p, const Tensor<T>& input) {
  if (p.kind != LayerKind::Dense) throw DomainError("dense: layer is not dense");
  p.check();
  if (input.item_size() != p.dense.in_features)
    throw DomainError("dense: expected " + std::to_string(p.dense.in_features) +
                      " input features, got " + std::to_string(input.item_size()));
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const int batch = input.batch();
  const int in = p.dense.in_features;
  const int out = p.dense.out_features;
  Tensor<T> output({batch, out, 1, 1});
  Eigen::Map<const RowMat> w(p.weight.data(), out, in);
  Eigen::Map<const Vec> b(p.bias.data(), out);
  Eigen::Map<const Mat> x(input.data(), in, batch);
  Eigen::Map<Mat> y(output.data(), out, batch);
  y.noalias() = w * x;
  y.colwise() += b;
  return output;
}

template <class T>
LayerBackward<T> dense_backward(const LayerParams<T>& p, const Tensor<T>& input,
                                const Tensor<T>& grad_out) {
  if (p.kind != LayerKind::Dense) throw DomainError("dense_backward: layer is not dense");
  p.check();
  const int batch = input.batch();
  const int in = p.dense.in_features;
  const int out = p.dense.out_features;
  if (input.item_size() != in || grad_out.item_size() != out || grad_out.batch() != batch)
    throw DomainError("dense_backward: shape mismatch");
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  LayerBackward<T> r{Tensor<T>(input.shape()), p.zeros_like()};
  Eigen::Map<const RowMat> w(p.weight.data(), out, in);
  Eigen::Map<const Mat> x(input.data(), in, batch);
  Eigen::Map<const Mat> gy(grad_out.data(), out, batch);
  Eigen::Map<RowMat> gw(r.grad_params.weight.data(), out, in);
  Eigen::Map<Vec> gb(r.grad_params.bias.data(), out);
  Eigen::Map<Mat> gx(r.grad_input.data(), in, batch);
  gw.noalias() = gy * x.transpose();
  gb = gy.rowwise().sum();
  gx.noalias() = w.transpose() * gy;
  return r;
}

// ---------------------------------------------------------------------------
// Transposed convolution

namespace detail {

template <class T>
void check_deconv(const LayerParams<T>& p, const Tensor<T>& input) {
  if (p.kind != LayerKind::Deconv2d) throw DomainError("deconv2d: layer is not a deconvolution");
  p.check();
  if (input.channels() != p.deconv.in_channels)
    throw DomainError("deconv2d: expected " + std::to_string(p.deconv.in_channels) +
                      " input channels, got " + std::to_string(input.channels()));
  if (p.deconv.out_height(input.height()) <= 0 || p.deconv.out_width(input.width()) <= 0)
    throw DomainError("deconv2d: geometry yields an empty output");
}

}  // namespace detail

/// Transposed convolution: each input pixel (ih, iw) scatters
/// in * W[ci][co] onto output (ih*sh - ph + ki, iw*sw - pw + kj).
/// Per sample, the (co, ki, kj) x pixel products come from one matrix
/// product and are then scattered onto the output grid.
template <class T>
Tensor<T> deconv2d(const LayerParams<T>& p, const Tensor<T>& input) {
  detail::check_deconv(p, input);
  using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const DeconvGeometry& g = p.deconv;
  const int batch = input.batch(), ih = input.height(), iw = input.width();
  const int oh = g.out_height(ih), ow = g.out_width(iw);
  const int taps = g.out_channels * g.kernel_h * g.kernel_w;
  const int pixels = ih * iw;
  Tensor<T> output({batch, g.out_channels, oh, ow});
  const std::size_t plane = static_cast<std::size_t>(oh) * static_cast<std::size_t>(ow);
  Eigen::Map<const RowMat> w(p.weight.data(), g.in_channels, taps);
  RowMat cols(taps, pixels);
  for (int n = 0; n < batch; ++n) {
    Eigen::Map<const RowMat> x(input.data() + static_cast<std::size_t>(n) * g.in_channels * pixels,
                               g.in_channels, pixels);
    cols.noalias() = w.transpose() * x;
    T* out_n = output.data() + static_cast<std::size_t>(n) * g.out_channels * plane;
    for (int co = 0; co < g.out_channels; ++co) {
      T* out_c = out_n + co * plane;
      std::fill(out_c, out_c + plane, p.bias[static_cast<std::size_t>(co)]);
      for (int ki = 0; ki < g.kernel_h; ++ki) {
        for (int kj = 0; kj < g.kernel_w; ++kj) {
          const T* src = cols.data() + static_cast<std::size_t>((co * g.kernel_h + ki) * g.kernel_w + kj) * pixels;
          for (int y = 0; y < ih; ++y) {
            const int oy = y * g.stride_h - g.pad_h + ki;
            if (oy < 0 || oy >= oh) continue;
            T* row = out_c + static_cast<std::size_t>(oy) * ow;
            for (int x = 0; x < iw; ++x) {
              const int ox = x * g.stride_w - g.pad_w + kj;
              if (ox >= 0 && ox < ow) row[ox] += src[y * iw + x];
            }
          }
        }
      }
    }
  }
  return output;
}

template <class T>
LayerBackward<T> deconv2d_backward(const LayerParams<T>& p, const Tensor<T>& input,
                                   const Tensor<T>& grad_out) {
  detail::check_deconv(p, input);
  using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const DeconvGeometry& g = p.deconv;
  const int batch = input.batch(), ih = input.height(), iw = input.width();
  const int oh = g.out_height(ih), ow = g.out_width(iw);
  if (grad_out.shape() != typename Tensor<T>::Shape{batch, g.out_channels, oh, ow})
    throw DomainError("deconv2d_backward: gradient shape does not match the forward output");
  const int taps = g.out_channels * g.kernel_h * g.kernel_w;
  const int pixels = ih * iw;
  LayerBackward<T> r{Tensor<T>(input.shape()), p.zeros_like()};
  const std::size_t plane = static_cast<std::size_t>(oh) * static_cast<std::size_t>(ow);
  Eigen::Map<const RowMat> w(p.weight.data(), g.in_channels, taps);
  Eigen::Map<RowMat> gw(r.grad_params.weight.data(), g.in_channels, taps);
  RowMat gcols(taps, pixels);
  for (int n = 0; n < batch; ++n) {
    const T* gout_n = grad_out.data() + static_cast<std::size_t>(n) * g.out_channels * plane;
    for (int co = 0; co < g.out_channels; ++co) {
      const T* gc = gout_n + co * plane;
      T acc = T(0);
      for (std::size_t i = 0; i < plane; ++i) acc += gc[i];
      r.grad_params.bias[static_cast<std::size_t>(co)] += acc;
      for (int ki = 0; ki < g.kernel_h; ++ki) {
        for (int kj = 0; kj < g.kernel_w; ++kj) {
          T* dst = gcols.data() + static_cast<std::size_t>((co * g.kernel_h + ki) * g.kernel_w + kj) * pixels;
          for (int y = 0; y < ih; ++y) {
            const int oy = y * g.stride_h - g.pad_h + ki;
            const bool row_ok = oy >= 0 && oy < oh;
            const T* row = gc + static_cast<std::size_t>(row_ok ? oy : 0) * ow;
            for (int x = 0; x < iw; ++x) {
              const int ox = x * g.stride_w - g.pad_w + kj;
              dst[y * iw + x] = (row_ok && ox >= 0 && ox < ow) ? row[ox] : T(0);
            }
          }
        }
      }
    }
    const std::size_t in_off = static_cast<std::size_t>(n) * g.in_channels * pixels;
    Eigen::Map<const RowMat> x(input.data() + in_off, g.in_channels, pixels);
    Eigen::Map<RowMat> gx(r.grad_input.data() + in_off, g.in_channels, pixels);
    gx.noalias() = w * gcols;
    gw.noalias() += x * gcols.transpose();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Activations and loss

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (T& v : y.values()) v = std::max(v, T(0));
  return y;
}

/// Gradient through ReLU given the forward input.
template <class T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  if (input.size() != grad_out.size()) throw DomainError("relu_backward: shape mismatch");
  Tensor<T> g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(input.values()[i] > T(0))) g.values()[i] = T(0);
  return g;
}

template <class T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;  // d loss / d logits
};

/// Mean binary cross-entropy of sigmoid(logits) against soft targets,
/// evaluated as max(x, 0) - x t + log1p(exp(-|x|)).
template <class T>
LossResult<T> sigmoid_bce(const Tensor<T>& logits, const Tensor<T>& targets) {
  if (logits.shape() != targets.shape()) throw DomainError("sigmoid_bce: shape mismatch");
  if (logits.size() == 0) throw DomainError("sigmoid_bce: empty input");
  LossResult<T> r{0.0, Tensor<T>(logits.shape())};
  const double inv = 1.0 / static_cast<double>(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const T x = logits.values()[i];
    const T t = targets.values()[i];
    if (!(t >= T(0) && t <= T(1)))
      throw DomainError("sigmoid_bce: target outside [0, 1] at index " + std::to_string(i));
    const double xd = static_cast<double>(x);
    total += std::max(xd, 0.0) - xd * static_cast<double>(t) + std::log1p(std::exp(-std::abs(xd)));
    r.grad.values()[i] = static_cast<T>((sigmoid(x) - t) * static_cast<T>(inv));
  }
  r.loss = total * inv;
  return r;
}

// ---------------------------------------------------------------------------
// Floating-point mode

/// Scoped flush-to-zero / denormals-are-zero. Late in training, gradients
/// and Adam moments drift into the subnormal range where x86 arithmetic is
/// many times slower; flushing them changes nothing measurable.
class FlushDenormals {
 public:
  FlushDenormals() {
#if defined(__SSE__) || defined(__x86_64__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040u);  // FTZ | DAZ
#endif
  }
  ~FlushDenormals() {
#if defined(__SSE__) || defined(__x86_64__)
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  unsigned saved_ = 0;
};

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-parameter first/second moments. Blocks are addressed by position, so
/// the parameter list passed to adam_step must keep a fixed order.
template <class T>
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<std::vector<T>> first;
  std::vector<std::vector<T>> second;

  AdamState() = default;
  AdamState(const AdamConfig& cfg, const std::vector<std::size_t>& block_sizes) : config(cfg) {
    for (std::size_t n : block_sizes) {
      first.emplace_back(n, T(0));
      second.emplace_back(n, T(0));
    }
  }
};

/// One bias-corrected Adam update of every parameter block.
template <class T>
void adam_step(AdamState<T>& state, const std::vector<std::span<T>>& params,
               const std::vector<std::span<const T>>& grads) {
  if (params.size() != grads.size() || params.size() != state.first.size())
    throw DomainError("adam_step: parameter/gradient/state block counts differ");
  state.step += 1;
  const AdamConfig& c = state.config;
  const double corr1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
  const T step_size = static_cast<T>(c.learning_rate / corr1);
  const T inv_sqrt_corr2 = static_cast<T>(1.0 / std::sqrt(corr2));
  const T eps = static_cast<T>(c.epsilon);
  for (std::size_t b = 0; b < params.size(); ++b) {
    std::span<T> p = params[b];
    std::span<const T> g = grads[b];
    std::vector<T>& m = state.first[b];
    std::vector<T>& v = state.second[b];
    if (p.size() != g.size() || p.size() != m.size())
      throw DomainError("adam_step: block " + std::to_string(b) + " size mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      p[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_corr2 + eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Gradient checking

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t skipped_kinks = 0;  // coordinates excluded by kink detection
};

/// Central-difference check of analytic gradients on a random subsample of
/// parameter coordinates. `loss` re-evaluates the objective with the current
/// parameter values. Relative error is |a - n| / max(|a|, |n|, floor).
/// With skip_kinks, a coordinate whose one-sided slopes differ by more than
/// kink_tolerance of their magnitude straddles a non-differentiable point
/// (a ReLU switching) and is counted in skipped_kinks instead.
template <class T, class LossFn>
GradCheckResult gradient_check(const std::vector<std::span<T>>& params,
                               const std::vector<std::span<const T>>& analytic, LossFn&& loss,
                               std::size_t samples = 200, std::uint64_t seed = 1,
                               double step = 1e-5, double floor = 1e-8, bool skip_kinks = false,
                               double kink_tolerance = 0.1) {
  if (params.size() != analytic.size()) throw DomainError("gradient_check: block count mismatch");
  std::vector<std::size_t> offsets{0};
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != analytic[b].size())
      throw DomainError("gradient_check: block " + std::to_string(b) + " size mismatch");
    offsets.push_back(offsets.back() + params[b].size());
  }
  const std::size_t total = offsets.back();
  if (total == 0) return {};
  std::vector<std::size_t> coords(total);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  Rng rng(seed);
  if (samples < total) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(samples);
  }
  GradCheckResult result;
  const double center = skip_kinks ? static_cast<double>(loss()) : 0.0;
  for (std::size_t flat : coords) {
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), flat);
    const auto b = static_cast<std::size_t>(it - offsets.begin()) - 1;
    const std::size_t i = flat - offsets[b];
    T& x = params[b][i];
    const T saved = x;
    x = static_cast<T>(saved + step);
    const double up = loss();
    x = static_cast<T>(saved - step);
    const double down = loss();
    x = saved;
    if (skip_kinks) {
      const double right = (up - center) / step, left = (center - down) / step;
      if (std::abs(right - left) > kink_tolerance * std::max({std::abs(right), std::abs(left), floor})) {
        ++result.skipped_kinks;
        continue;
      }
    }
    const double numeric = (up - down) / (2.0 * step);
    const double a = static_cast<double>(analytic[b][i]);
    const double denom = std::max({std::abs(a), std::abs(numeric), floor});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    ++result.coordinates;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Initialisation

/// He-scaled normal weights, zero bias. For deconvolutions the fan-in is the
/// number of input taps that reach one output pixel.
template <class T>
void he_init(LayerParams<T>& p, Rng& rng) {
  double fan_in = 1.0;
  if (p.kind == LayerKind::Dense) {
    fan_in = p.dense.in_features;
  } else {
    const DeconvGeometry& g = p.deconv;
    fan_in = static_cast<double>(g.in_channels) * g.kernel_h * g.kernel_w /
             (static_cast<double>(g.stride_h) * g.stride_w);
  }
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (T& w : p.weight) w = static_cast<T>(dist(rng));
  std::fill(p.bias.begin(), p.bias.end(), T(0));
}

}  // namespace ebdoa::nn
