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

// JSON configuration files for the command-line tool. Missing keys keep
// their defaults; unknown keys and wrong types raise ConfigError.

#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "ebdoa/dataset.hpp"
#include "ebdoa/dcnn.hpp"
#include "ebdoa/errors.hpp"
#include "json.hpp"

namespace ebdoa::cli {

using Json = nlohmann::json;

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("config file " + path.string() + ": " + e.what());
  }
}

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read_value(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline void read_point(const Json& j, const char* key, Point3& out, const std::string& where) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read_value(j, key, v, where);
  if (v.size() != 3) throw ConfigError(where + "." + key + ": expected three numbers");
  out = Point3(v[0], v[1], v[2]);
}

inline GenConfig gen_config_from_json(const Json& j) {
  const std::string where = "gen config";
  check_keys(j,
             {"count", "min_sources", "max_sources", "t60_min", "t60_max", "room_min", "room_max",
              "sample_rate", "frame_length", "hoa_order", "image_order", "source", "source_file",
              "wall_margin", "min_separation", "label_variance", "threads"},
             where);
  GenConfig cfg;
  read_value(j, "count", cfg.count, where);
  read_value(j, "min_sources", cfg.min_sources, where);
  read_value(j, "max_sources", cfg.max_sources, where);
  read_value(j, "t60_min", cfg.t60_min, where);
  read_value(j, "t60_max", cfg.t60_max, where);
  read_point(j, "room_min", cfg.room_min, where);
  read_point(j, "room_max", cfg.room_max, where);
  read_value(j, "sample_rate", cfg.sample_rate, where);
  read_value(j, "frame_length", cfg.frame_length, where);
  read_value(j, "hoa_order", cfg.hoa_order, where);
  read_value(j, "image_order", cfg.image_order, where);
  std::string source = source_kind_name(cfg.source.kind), file;
  read_value(j, "source", source, where);
  read_value(j, "source_file", file, where);
  cfg.source.kind = parse_source_kind(source);
  cfg.source.file = file;
  read_value(j, "wall_margin", cfg.wall_margin, where);
  read_value(j, "min_separation", cfg.min_separation, where);
  read_value(j, "label_variance", cfg.label_variance, where);
  read_value(j, "threads", cfg.threads, where);
  cfg.validate();
  return cfg;
}

inline ModelConfig model_config_from_json(const Json& j) {
  const std::string where = "train config: model";
  check_keys(j, {"hoa_order", "fc_widths", "reshape", "deconvs", "hidden_activation", "output_bias_init"}, where);
  ModelConfig cfg;
  read_value(j, "hoa_order", cfg.hoa_order, where);
  read_value(j, "fc_widths", cfg.fc_widths, where);
  if (j.contains("reshape")) {
    std::vector<int> r;
    read_value(j, "reshape", r, where);
    if (r.size() != 3) throw ConfigError(where + ".reshape: expected [channels, height, width]");
    cfg.reshape_channels = r[0];
    cfg.reshape_height = r[1];
    cfg.reshape_width = r[2];
  }
  if (j.contains("deconvs")) {
    std::vector<std::vector<int>> layers;
    read_value(j, "deconvs", layers, where);
    cfg.deconvs.clear();
    for (const auto& f : layers) {
      if (f.size() != 10)
        throw ConfigError(where +
                          ".deconvs: each layer needs [in, out, kh, kw, sh, sw, ph, pw, oph, opw]");
      cfg.deconvs.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9]});
    }
  }
  std::string act = activation_name(cfg.activation);
  read_value(j, "hidden_activation", act, where);
  cfg.activation = parse_activation(act);
  read_value(j, "output_bias_init", cfg.output_bias_init, where);
  cfg.validate();
  return cfg;
}

inline TrainConfig train_config_from_json(const Json& j) {
  const std::string where = "train config: train";
  check_keys(j,
             {"epochs", "batch_size", "learning_rate", "validation_fraction", "checkpoint_every",
              "checkpoint_path", "augment"},
             where);
  TrainConfig cfg;
  read_value(j, "epochs", cfg.epochs, where);
  read_value(j, "batch_size", cfg.batch_size, where);
  read_value(j, "learning_rate", cfg.learning_rate, where);
  read_value(j, "validation_fraction", cfg.validation_fraction, where);
  read_value(j, "checkpoint_every", cfg.checkpoint_every, where);
  std::string ckpt;
  read_value(j, "checkpoint_path", ckpt, where);
  cfg.checkpoint_path = ckpt;
  read_value(j, "augment", cfg.augment, where);
  return cfg;
}

struct TrainSetup {
  ModelConfig model;
  TrainConfig train;
};

/// {"model": {...}, "train": {...}}; either section may be omitted.
inline TrainSetup train_setup_from_json(const Json& j) {
  check_keys(j, {"model", "train"}, "train config");
  TrainSetup s;
  s.model = model_config_from_json(j.value("model", Json::object()));
  s.train = train_config_from_json(j.value("train", Json::object()));
  return s;
}

}  // namespace ebdoa::cli
