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

// Deconvolution network mapping a flattened HOA covariance to a 60 x 120
// spatial pseudo-spectrum: four dense layers, a reshape to a coarse
// channel grid and three transposed convolutions.
//
// Model file layout: a text header of "key = value" lines starting with
// "EBDOA-MODEL" and ending with "end_header", then every layer's weight and
// bias as little-endian f32 in layer order.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ebdoa/augment.hpp"
#include "ebdoa/dataset.hpp"
#include "ebdoa/errors.hpp"
#include "ebdoa/metrics.hpp"
#include "ebdoa/nn.hpp"
#include "ebdoa/rng.hpp"
#include "ebdoa/sps.hpp"

namespace ebdoa {

enum class HiddenActivation : std::uint8_t { Relu, Identity };

inline std::string activation_name(HiddenActivation a) {
  return a == HiddenActivation::Relu ? "relu" : "identity";
}

inline HiddenActivation parse_activation(const std::string& s) {
  if (s == "relu") return HiddenActivation::Relu;
  if (s == "identity") return HiddenActivation::Identity;
  throw ConfigError("unknown hidden activation '" + s + "' (expected relu or identity)");
}

struct ModelConfig {
  int hoa_order = 4;
  std::vector<int> fc_widths{625, 256, 256, 512, 7200};
  int reshape_channels = 16, reshape_height = 15, reshape_width = 30;
  std::vector<nn::DeconvGeometry> deconvs{
      {16, 8, 4, 4, 2, 2, 1, 1, 0, 0},
      {8, 4, 4, 4, 2, 2, 1, 1, 0, 0},
      {4, 1, 3, 3, 1, 1, 1, 1, 0, 0},
  };
  GridSpec grid{};
  HiddenActivation activation = HiddenActivation::Relu;
  // Initial bias of the last layer, a logit prior for the sparse label maps.
  double output_bias_init = 0.0;

  int input_size() const { return fc_widths.empty() ? 0 : fc_widths.front(); }
  int output_size() const { return grid.size(); }

  void validate() const {
    if (hoa_order < 0) throw ConfigError("ModelConfig: negative HOA order");
    if (fc_widths.size() < 2) throw ConfigError("ModelConfig: need at least one dense layer");
    for (int w : fc_widths)
      if (w <= 0) throw ConfigError("ModelConfig: dense widths must be positive");
    const int m = channel_count(hoa_order);
    if (fc_widths.front() != m * m)
      throw GeometryError("ModelConfig: first dense input must be (N+1)^4 = " + std::to_string(m * m) +
                          ", got " + std::to_string(fc_widths.front()));
    if (reshape_channels <= 0 || reshape_height <= 0 || reshape_width <= 0)
      throw ConfigError("ModelConfig: reshape geometry must be positive");
    const int grid_cells = reshape_channels * reshape_height * reshape_width;
    if (fc_widths.back() != grid_cells)
      throw GeometryError("ModelConfig: last dense output must equal channels*height*width = " +
                          std::to_string(grid_cells) + ", got " + std::to_string(fc_widths.back()));
    if (deconvs.empty()) throw ConfigError("ModelConfig: need at least one deconvolution");
    int c = reshape_channels, h = reshape_height, w = reshape_width;
    for (const auto& g : deconvs) {
      g.validate();
      if (g.in_channels != c)
        throw GeometryError("ModelConfig: deconvolution expects " + std::to_string(g.in_channels) +
                            " channels, previous layer gives " + std::to_string(c));
      c = g.out_channels;
      h = g.out_height(h);
      w = g.out_width(w);
      if (h <= 0 || w <= 0) throw GeometryError("ModelConfig: deconvolution output is empty");
    }
    grid.validate();
    if (c != 1 || h != grid.elevation_bins || w != grid.azimuth_bins)
      throw GeometryError("ModelConfig: deconvolution chain yields " + std::to_string(c) + "x" +
                          std::to_string(h) + "x" + std::to_string(w) + ", expected 1x" +
                          std::to_string(grid.elevation_bins) + "x" + std::to_string(grid.azimuth_bins));
  }

  /// Geometry equality; the bias prior only affects initialisation.
  bool same_geometry(const ModelConfig& o) const {
    return hoa_order == o.hoa_order && fc_widths == o.fc_widths && reshape_channels == o.reshape_channels &&
           reshape_height == o.reshape_height && reshape_width == o.reshape_width && deconvs == o.deconvs &&
           grid.elevation_bins == o.grid.elevation_bins && grid.azimuth_bins == o.grid.azimuth_bins &&
           grid.resolution_deg == o.grid.resolution_deg && activation == o.activation;
  }
};

template <class T>
struct Model {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<nn::LayerParams<T>> layers;  // dense layers, then deconvolutions

  std::size_t dense_count() const { return config.fc_widths.size() - 1; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.parameter_count();
    return n;
  }

  /// Weight and bias of every layer, in file order.
  std::vector<std::span<T>> parameter_blocks() {
    std::vector<std::span<T>> out;
    for (auto& l : layers) {
      out.emplace_back(l.weight);
      out.emplace_back(l.bias);
    }
    return out;
  }
  std::vector<std::size_t> block_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& l : layers) {
      out.push_back(l.weight.size());
      out.push_back(l.bias.size());
    }
    return out;
  }
};

namespace detail {

template <class T>
std::vector<nn::LayerParams<T>> empty_layers(const ModelConfig& cfg) {
  std::vector<nn::LayerParams<T>> layers;
  for (std::size_t i = 0; i + 1 < cfg.fc_widths.size(); ++i)
    layers.push_back(nn::LayerParams<T>::make_dense(cfg.fc_widths[i], cfg.fc_widths[i + 1]));
  for (const auto& g : cfg.deconvs) layers.push_back(nn::LayerParams<T>::make_deconv(g));
  return layers;
}

}  // namespace detail

/// He-initialised model; identical for identical (config, seed).
template <class T = float>
Model<T> build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model<T> m{cfg, seed, detail::empty_layers<T>(cfg)};
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    nn::he_init(m.layers[i], rng);
  }
  std::fill(m.layers.back().bias.begin(), m.layers.back().bias.end(), static_cast<T>(cfg.output_bias_init));
  return m;
}

/// Same model at another floating-point precision.
template <class U, class T>
Model<U> cast_model(const Model<T>& m) {
  Model<U> out{m.config, m.seed, detail::empty_layers<U>(m.config)};
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    std::transform(m.layers[i].weight.begin(), m.layers[i].weight.end(), out.layers[i].weight.begin(),
                   [](T v) { return static_cast<U>(v); });
    std::transform(m.layers[i].bias.begin(), m.layers[i].bias.end(), out.layers[i].bias.begin(),
                   [](T v) { return static_cast<U>(v); });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward and backward

template <class T>
struct ForwardCache {
  std::vector<nn::Tensor<T>> inputs;  // input of each layer
  std::vector<nn::Tensor<T>> pre;     // output of each layer before its activation
  nn::Tensor<T> logits;               // (batch, 1, 60, 120)
};

/// Batched forward pass. `input` holds batch x (N+1)^4 features. With
/// `gates`, each hidden ReLU keeps the on/off pattern of that earlier pass
/// instead of its own; the result is the smooth local piece of the network.
template <class T>
ForwardCache<T> forward(const Model<T>& m, const nn::Tensor<T>& input,
                        const ForwardCache<T>* gates = nullptr) {
  if (input.item_size() != m.config.input_size())
    throw DomainError("forward: expected feature length " + std::to_string(m.config.input_size()) +
                      ", got " + std::to_string(input.item_size()));
  const bool relu = m.config.activation == HiddenActivation::Relu;
  const std::size_t nd = m.dense_count();
  ForwardCache<T> c;
  nn::Tensor<T> x = input;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    if (i == nd)
      x = x.reshaped({x.batch(), m.config.reshape_channels, m.config.reshape_height, m.config.reshape_width});
    c.inputs.push_back(x);
    nn::Tensor<T> y = i < nd ? nn::dense(m.layers[i], x) : nn::deconv2d(m.layers[i], x);
    const bool last = i + 1 == m.layers.size();
    if (last || !relu) {
      x = y;
    } else if (gates) {
      x = y;
      const auto& ref = gates->pre[i].values();
      if (ref.size() != x.size()) throw DomainError("forward: gate pattern has a different shape");
      for (std::size_t j = 0; j < ref.size(); ++j)
        if (!(ref[j] > T(0))) x.values()[j] = T(0);
    } else {
      x = nn::relu(y);
    }
    c.pre.push_back(std::move(y));
  }
  c.logits = x;
  return c;
}

/// Parameter gradients given d loss / d logits.
template <class T>
std::vector<nn::LayerParams<T>> backward(const Model<T>& m, const ForwardCache<T>& c,
                                         const nn::Tensor<T>& grad_logits) {
  const bool relu = m.config.activation == HiddenActivation::Relu;
  const std::size_t nd = m.dense_count();
  std::vector<nn::LayerParams<T>> grads(m.layers.size());
  nn::Tensor<T> g = grad_logits;
  for (std::size_t k = m.layers.size(); k-- > 0;) {
    const bool last = k + 1 == m.layers.size();
    if (!last && relu) g = nn::relu_backward(c.pre[k], g);
    nn::LayerBackward<T> b = k < nd ? nn::dense_backward(m.layers[k], c.inputs[k], g)
                                    : nn::deconv2d_backward(m.layers[k], c.inputs[k], g);
    grads[k] = std::move(b.grad_params);
    g = std::move(b.grad_input);
    if (k == nd) g = g.reshaped({g.batch(), g.item_size(), 1, 1});
  }
  return grads;
}

/// Spatial pseudo-spectrum of one feature vector; values are sigmoid outputs.
template <class T>
SpsGrid model_forward(const Model<T>& m, std::span<const float> feature) {
  if (static_cast<int>(feature.size()) != m.config.input_size())
    throw DomainError("model_forward: expected feature length " + std::to_string(m.config.input_size()) +
                      ", got " + std::to_string(feature.size()));
  nn::Tensor<T> x({1, static_cast<int>(feature.size()), 1, 1});
  std::transform(feature.begin(), feature.end(), x.values().begin(), [](float v) { return static_cast<T>(v); });
  const auto c = forward(m, x);
  SpsGrid out(m.config.grid, SpsKind::NetworkOutput);
  for (std::size_t i = 0; i < c.logits.size(); ++i)
    out.values[i] = static_cast<double>(nn::sigmoid(c.logits.values()[i]));
  return out;
}

/// Mean sigmoid-BCE of a batch plus its parameter gradients.
template <class T>
std::pair<double, std::vector<nn::LayerParams<T>>> loss_and_gradients(const Model<T>& m,
                                                                      const nn::Tensor<T>& input,
                                                                      const nn::Tensor<T>& targets) {
  const auto c = forward(m, input);
  const auto l = nn::sigmoid_bce(c.logits, targets);
  return {l.loss, backward(m, c, l.grad)};
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int epochs = 40;
  int batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  int checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints
  std::filesystem::path checkpoint_path;
  // Present each training record under a random rotation/mirror of the
  // sound field (see augment.hpp). Validation records are never transformed.
  bool augment = true;

  void validate() const {
    if (epochs < 0) throw ConfigError("TrainConfig: epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning rate must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw ConfigError("TrainConfig: validation fraction must lie in [0, 1)");
    if (checkpoint_every < 0) throw ConfigError("TrainConfig: checkpoint cadence must be >= 0");
    if (checkpoint_every > 0 && checkpoint_path.empty())
      throw ConfigError("TrainConfig: checkpoint cadence set without a checkpoint path");
  }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_recall;
  std::optional<double> val_precision;
};

struct TrainHistory {
  double initial_train_loss = 0.0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_recall;
  std::vector<double> val_precision;
  int best_epoch = 0;  // 1-based epoch of the retained parameters, 0 = initial

  /// One line per epoch, stable formatting for byte-level comparisons.
  std::string to_text() const {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "initial_train_loss=%.9g\n", initial_train_loss);
    os << buf;
    for (std::size_t e = 0; e < train_loss.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "epoch=%zu train_loss=%.9g", e + 1, train_loss[e]);
      os << buf;
      if (e < val_loss.size()) {
        std::snprintf(buf, sizeof(buf), " val_loss=%.9g val_recall=%.6f val_precision=%.6f", val_loss[e],
                      val_recall[e], val_precision[e]);
        os << buf;
      }
      os << "\n";
    }
    os << "best_epoch=" << best_epoch << "\n";
    return os.str();
  }
};

namespace detail {

template <class T>
void fill_batch(std::span<const DatasetRecord> records, std::span<const std::size_t> idx,
                nn::Tensor<T>& input, nn::Tensor<T>& targets, Rng* augment_rng = nullptr,
                int order = kDatasetOrder, const GridSpec& spec = {}) {
  const std::size_t fsz = static_cast<std::size_t>(input.item_size());
  const std::size_t lsz = static_cast<std::size_t>(targets.item_size());
  std::vector<float> feature(fsz), label(lsz);
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const DatasetRecord& r = records[idx[b]];
    std::span<const float> f = r.feature, l = r.label;
    if (augment_rng) {
      const FieldTransform t = random_transform(*augment_rng, spec);
      if (!t.identity()) {
        transform_feature(r.feature, feature, channel_transform(order, t, spec));
        transform_grid<float>(r.label, label, t, spec);
        f = feature;
        l = label;
      }
    }
    std::transform(f.begin(), f.end(), input.data() + b * fsz, [](float v) { return static_cast<T>(v); });
    std::transform(l.begin(), l.end(), targets.data() + b * lsz, [](float v) { return static_cast<T>(v); });
  }
}

struct Evaluation {
  double loss = 0.0;
  std::optional<double> recall;
  std::optional<double> precision;
};

/// Mean loss and 25-degree recall/precision of raw network outputs.
template <class T>
Evaluation evaluate_subset(const Model<T>& m, std::span<const DatasetRecord> records,
                           std::span<const std::size_t> idx, int batch_size) {
  Evaluation ev;
  if (idx.empty()) return ev;
  const int fin = m.config.input_size(), lout = m.config.output_size();
  double total = 0.0;
  std::vector<MatchResult> matches;
  for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(batch_size)) {
    const auto chunk = idx.subspan(start, std::min<std::size_t>(batch_size, idx.size() - start));
    const int n = static_cast<int>(chunk.size());
    nn::Tensor<T> input({n, fin, 1, 1});
    nn::Tensor<T> targets({n, 1, m.config.grid.elevation_bins, m.config.grid.azimuth_bins});
    fill_batch(records, chunk, input, targets);
    const auto c = forward(m, input);
    total += nn::sigmoid_bce(c.logits, targets).loss * n;
    for (int b = 0; b < n; ++b) {
      SpsGrid sps(m.config.grid, SpsKind::NetworkOutput);
      for (int i = 0; i < lout; ++i)
        sps.values[static_cast<std::size_t>(i)] =
            static_cast<double>(nn::sigmoid(c.logits.values()[static_cast<std::size_t>(b * lout + i)]));
      matches.push_back(match_doas(extract_peaks(normalize_map(sps)), records[chunk[static_cast<std::size_t>(b)]].truth));
    }
  }
  ev.loss = total / static_cast<double>(idx.size());
  const MetricsReport r = compute_metrics(matches);
  ev.recall = r.recall;
  ev.precision = r.precision;
  return ev;
}

}  // namespace detail

template <class T>
void save_model(const Model<T>& m, const std::filesystem::path& path);

/// Mini-batch Adam on sigmoid-BCE. A seeded fraction of the records is held
/// out for validation; the parameters with the lowest validation loss are
/// returned (the final ones when nothing is held out).
template <class T>
std::pair<Model<T>, TrainHistory> train(Model<T> model, std::span<const DatasetRecord> records,
                                        const TrainConfig& cfg,
                                        const std::function<void(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (records.empty()) throw DomainError("train: empty dataset");
  const nn::FlushDenormals flush;
  const int fin = model.config.input_size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (static_cast<int>(records[i].feature.size()) != fin)
      throw GeometryError("train: model expects feature length " + std::to_string(fin) + ", record " +
                          std::to_string(i) + " has " + std::to_string(records[i].feature.size()));
    if (static_cast<int>(records[i].label.size()) != model.config.output_size())
      throw GeometryError("train: model output size " + std::to_string(model.config.output_size()) +
                          " differs from label size " + std::to_string(records[i].label.size()));
  }

  std::vector<std::size_t> train_idx(records.size());
  std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  std::vector<std::size_t> val_idx;
  const auto n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * records.size()));
  if (n_val > 0) {
    if (n_val >= records.size()) throw DomainError("train: validation split leaves no training records");
    Rng split_rng(derive_seed(cfg.seed, 0));
    std::shuffle(train_idx.begin(), train_idx.end(), split_rng);
    val_idx.assign(train_idx.begin(), train_idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.erase(train_idx.begin(), train_idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
  }

  TrainHistory hist;
  hist.initial_train_loss = detail::evaluate_subset(model, records, train_idx, cfg.batch_size).loss;
  Model<T> best = model;
  double best_val = std::numeric_limits<double>::infinity();
  if (!val_idx.empty()) best_val = detail::evaluate_subset(model, records, val_idx, cfg.batch_size).loss;

  nn::AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  nn::AdamState<T> adam(adam_cfg, model.block_sizes());
  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  Rng augment_rng(derive_seed(cfg.seed, 2));
  const int lh = model.config.grid.elevation_bins, lw = model.config.grid.azimuth_bins;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), shuffle_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::span<const std::size_t> chunk(
          train_idx.data() + start, std::min<std::size_t>(cfg.batch_size, train_idx.size() - start));
      const int n = static_cast<int>(chunk.size());
      nn::Tensor<T> input({n, fin, 1, 1});
      nn::Tensor<T> targets({n, 1, lh, lw});
      detail::fill_batch(records, chunk, input, targets, cfg.augment ? &augment_rng : nullptr,
                         model.config.hoa_order, model.config.grid);
      auto [loss, grads] = loss_and_gradients(model, input, targets);
      if (!std::isfinite(loss))
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                             std::to_string(start));
      total += loss * n;
      std::vector<std::span<const T>> gblocks;
      for (const auto& g : grads) {
        gblocks.emplace_back(g.weight);
        gblocks.emplace_back(g.bias);
      }
      nn::adam_step(adam, model.parameter_blocks(), gblocks);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = total / static_cast<double>(train_idx.size());
    hist.train_loss.push_back(stats.train_loss);
    if (!val_idx.empty()) {
      const auto ev = detail::evaluate_subset(model, records, val_idx, cfg.batch_size);
      stats.val_loss = ev.loss;
      stats.val_recall = ev.recall;
      stats.val_precision = ev.precision;
      hist.val_loss.push_back(ev.loss);
      hist.val_recall.push_back(ev.recall.value_or(0.0));
      hist.val_precision.push_back(ev.precision.value_or(0.0));
      if (ev.loss < best_val) {
        best_val = ev.loss;
        best = model;
        hist.best_epoch = epoch;
      }
    } else {
      best = model;
      hist.best_epoch = epoch;
    }
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) save_model(best, cfg.checkpoint_path);
    if (on_epoch) on_epoch(stats);
  }
  return {std::move(best), std::move(hist)};
}

// ---------------------------------------------------------------------------
// Model file

inline constexpr int kModelFormatVersion = 1;
inline constexpr char kModelMagic[] = "EBDOA-MODEL";

namespace detail {

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::vector<int> deconv_fields(const nn::DeconvGeometry& g) {
  return {g.in_channels, g.out_channels, g.kernel_h, g.kernel_w, g.stride_h,
          g.stride_w,    g.pad_h,        g.pad_w,    g.output_pad_h, g.output_pad_w};
}

template <class Int>
Int parse_int(const std::string& s, const std::string& key) {
  Int v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw FormatError("model header: bad integer '" + s + "' for " + key);
  return v;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
  std::vector<int> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.push_back(parse_int<int>(s.substr(start, comma - start), key));
    if (comma == std::string::npos) break;
    start = comma + 1;
    if (out.size() > 64) throw FormatError("model header: list too long for " + key);
  }
  return out;
}

inline nn::DeconvGeometry parse_deconv(const std::string& s) {
  const auto f = parse_int_list(s, "deconv");
  if (f.size() != 10) throw FormatError("model header: deconv needs 10 fields, got " + std::to_string(f.size()));
  return {f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9]};
}

}  // namespace detail

inline std::string model_header(const ModelConfig& cfg, std::uint64_t seed, std::size_t parameters) {
  std::ostringstream os;
  os << kModelMagic << "\n"
     << "version = " << kModelFormatVersion << "\n"
     << "hoa_order = " << cfg.hoa_order << "\n"
     << "fc_widths = " << detail::join_ints(cfg.fc_widths) << "\n"
     << "reshape = " << cfg.reshape_channels << "," << cfg.reshape_height << "," << cfg.reshape_width << "\n";
  for (const auto& g : cfg.deconvs) os << "deconv = " << detail::join_ints(detail::deconv_fields(g)) << "\n";
  os << "grid = " << cfg.grid.elevation_bins << "," << cfg.grid.azimuth_bins << "\n"
     << "hidden_activation = " << activation_name(cfg.activation) << "\n"
     << "seed = " << seed << "\n"
     << "created_by = ebdoa\n"
     << "dtype = f32le\n"
     << "parameters = " << parameters << "\n"
     << "end_header\n";
  return os.str();
}

template <class T>
void save_model(const Model<T>& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  const std::string header = model_header(m.config, m.seed, m.parameter_count());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  detail::ByteSink sink(out);
  for (const auto& l : m.layers) {
    for (T v : l.weight) sink.f32(static_cast<float>(v));
    for (T v : l.bias) sink.f32(static_cast<float>(v));
  }
  out.close();
  if (out.fail()) throw FormatError("failed writing " + path.string());
}

/// Reads a model file. With `expected`, a geometry difference raises a
/// GeometryError naming both values.
inline Model<float> load_model(const std::filesystem::path& path,
                               const std::optional<ModelConfig>& expected = std::nullopt) {
  constexpr std::size_t kMaxLine = 1024;
  constexpr int kMaxLines = 64;
  constexpr std::size_t kMaxParameters = std::size_t{1} << 28;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model " + path.string());
  const std::string where = path.string();

  auto read_line = [&](std::string& line) {
    line.clear();
    char ch;
    while (in.get(ch)) {
      if (ch == '\n') return true;
      if (line.size() >= kMaxLine) throw FormatError(where + ": header line too long");
      line.push_back(ch);
    }
    return false;
  };

  std::string line;
  if (!read_line(line) || line != kModelMagic) throw FormatError(where + ": bad magic, not an ebdoa model");
  std::map<std::string, std::string> kv;
  std::vector<std::string> deconv_lines;
  bool ended = false;
  for (int n = 0; n < kMaxLines && !ended; ++n) {
    if (!read_line(line)) throw FormatError(where + ": truncated header");
    if (line == "end_header") {
      ended = true;
      break;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw FormatError(where + ": malformed header line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
    if (key == "deconv") {
      deconv_lines.push_back(value);
    } else if (!kv.emplace(key, value).second) {
      throw FormatError(where + ": duplicate header key " + key);
    }
  }
  if (!ended) throw FormatError(where + ": header has no end_header line");
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(where + ": header is missing " + key);
    return it->second;
  };

  const int version = detail::parse_int<int>(get("version"), "version");
  if (version != kModelFormatVersion)
    throw FormatError(where + ": unsupported model version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  if (get("dtype") != "f32le") throw FormatError(where + ": unsupported dtype " + get("dtype"));

  ModelConfig cfg;
  cfg.hoa_order = detail::parse_int<int>(get("hoa_order"), "hoa_order");
  cfg.fc_widths = detail::parse_int_list(get("fc_widths"), "fc_widths");
  const auto reshape = detail::parse_int_list(get("reshape"), "reshape");
  if (reshape.size() != 3) throw FormatError(where + ": reshape needs 3 fields");
  cfg.reshape_channels = reshape[0];
  cfg.reshape_height = reshape[1];
  cfg.reshape_width = reshape[2];
  cfg.deconvs.clear();
  for (const auto& d : deconv_lines) cfg.deconvs.push_back(detail::parse_deconv(d));
  const auto grid = detail::parse_int_list(get("grid"), "grid");
  if (grid.size() != 2) throw FormatError(where + ": grid needs 2 fields");
  cfg.grid.elevation_bins = grid[0];
  cfg.grid.azimuth_bins = grid[1];
  try {
    cfg.activation = parse_activation(get("hidden_activation"));
  } catch (const ConfigError& e) {
    throw FormatError(where + ": " + e.what());
  }
  const auto seed = detail::parse_int<std::uint64_t>(get("seed"), "seed");
  const auto declared = detail::parse_int<std::size_t>(get("parameters"), "parameters");

  if (cfg.hoa_order < 0 || cfg.hoa_order > kMaxShOrder)
    throw FormatError(where + ": HOA order " + std::to_string(cfg.hoa_order) + " out of range");
  if (expected) {
    if (cfg.hoa_order != expected->hoa_order)
      throw GeometryError(where + ": expected HOA order " + std::to_string(expected->hoa_order) + ", got " +
                          std::to_string(cfg.hoa_order));
    if (!cfg.same_geometry(*expected))
      throw GeometryError(where + ": expected fc_widths " + detail::join_ints(expected->fc_widths) + ", got " +
                          detail::join_ints(cfg.fc_widths) + " (or other layer geometry differs)");
  }
  // Bound sizes before validate() so hostile headers cannot request huge allocations.
  std::size_t total = 0;
  for (int w : cfg.fc_widths)
    if (w <= 0 || w > (1 << 20)) throw FormatError(where + ": dense width out of range");
  for (std::size_t i = 0; i + 1 < cfg.fc_widths.size(); ++i)
    total += static_cast<std::size_t>(cfg.fc_widths[i]) * static_cast<std::size_t>(cfg.fc_widths[i + 1]) +
             static_cast<std::size_t>(cfg.fc_widths[i + 1]);
  for (const auto& g : cfg.deconvs) {
    for (int f : detail::deconv_fields(g))
      if (f < 0 || f > 4096) throw FormatError(where + ": deconvolution field out of range");
    total += static_cast<std::size_t>(g.in_channels) * g.out_channels * g.kernel_h * g.kernel_w +
             static_cast<std::size_t>(g.out_channels);
  }
  if (total > kMaxParameters) throw FormatError(where + ": parameter count too large");
  try {
    cfg.validate();
  } catch (const GeometryError&) {
    throw;
  } catch (const ConfigError& e) {
    throw FormatError(where + ": invalid geometry: " + e.what());
  }
  if (declared != total)
    throw FormatError(where + ": header declares " + std::to_string(declared) + " parameters, geometry needs " +
                      std::to_string(total));

  Model<float> m{cfg, seed, detail::empty_layers<float>(cfg)};
  detail::ByteSource src(in, where);
  for (auto& l : m.layers) {
    for (auto* block : {&l.weight, &l.bias})
      for (float& v : *block) {
        v = src.f32("parameters");
        if (!std::isfinite(v)) throw FormatError(where + ": non-finite parameter");
      }
  }
  if (!src.at_end()) throw FormatError(where + ": trailing bytes after parameters");
  return m;
}

}  // namespace ebdoa
