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

// Evaluation of DOA methods on stored datasets, reports and heatmaps.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ebdoa/dataset.hpp"
#include "ebdoa/dcnn.hpp"
#include "ebdoa/ebdsp.hpp"
#include "ebdoa/errors.hpp"
#include "ebdoa/metrics.hpp"
#include "ebdoa/sps.hpp"

namespace ebdoa {

enum class Method : std::uint8_t { Dcnn, EbMvdr, EbMusic, Labels };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Dcnn: return "dcnn";
    case Method::EbMvdr: return "eb-mvdr";
    case Method::EbMusic: return "eb-music";
    case Method::Labels: return "labels";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "dcnn") return Method::Dcnn;
  if (s == "eb-mvdr") return Method::EbMvdr;
  if (s == "eb-music") return Method::EbMusic;
  if (s == "labels") return Method::Labels;
  throw ConfigError("unknown method '" + s + "' (expected dcnn, eb-mvdr, eb-music or labels)");
}

struct EvalOptions {
  Method method = Method::EbMvdr;
  const Model<float>* model = nullptr;  // required for Method::Dcnn
  double loading = kDefaultLoading;
  // EB-MUSIC signal-subspace size; 0 selects default_music_sources per record.
  int music_sources = 0;
  double peak_threshold = kPeakThreshold;
  double match_threshold_deg = kSuccessThresholdDeg;
  bool by_t60 = false;
  std::vector<double> t60_edges{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
};

struct RecordOutcome {
  std::size_t index = 0;
  float t60 = 0.0f;
  DoaSet predictions;
  MatchResult match;
};

struct T60Bucket {
  double low = 0.0, high = 0.0;
  MetricsReport metrics;
};

struct EvalResult {
  Method method = Method::EbMvdr;
  MetricsReport overall;
  std::vector<T60Bucket> buckets;
  std::vector<RecordOutcome> records;
};

/// Unnormalised map of one record for the chosen method.
inline SpsGrid record_sps(const DatasetRecord& rec, const EvalOptions& opt,
                          const SteeringTable* table = nullptr) {
  switch (opt.method) {
    case Method::Dcnn:
      if (!opt.model) throw ConfigError("dcnn evaluation needs a model");
      if (static_cast<int>(rec.feature.size()) != opt.model->config.input_size())
        throw GeometryError("model expects feature length " + std::to_string(opt.model->config.input_size()) +
                            ", dataset has " + std::to_string(rec.feature.size()));
      return model_forward(*opt.model, rec.feature);
    case Method::EbMvdr: {
      const CovarianceMatrix cov = unfeaturize(rec.feature);
      return table ? eb_mvdr_spectrum(cov, *table, opt.loading) : eb_mvdr_spectrum(cov, GridSpec{}, opt.loading);
    }
    case Method::EbMusic: {
      const CovarianceMatrix cov = unfeaturize(rec.feature);
      const int sources =
          opt.music_sources > 0 ? opt.music_sources
                                : default_music_sources(std::max(rec.source_count, 1), static_cast<int>(cov.dim()));
      return table ? eb_music_spectrum(cov, *table, sources, opt.loading)
                   : eb_music_spectrum(cov, GridSpec{}, sources, opt.loading);
    }
    case Method::Labels: {
      SpsGrid g(GridSpec{}, SpsKind::Label);
      if (rec.label.size() != g.values.size()) throw GeometryError("label size differs from the 60x120 grid");
      std::copy(rec.label.begin(), rec.label.end(), g.values.begin());
      return g;
    }
  }
  throw ConfigError("unknown method");
}

/// Predicted DOAs of one record: map, normalise, pick peaks.
inline DoaSet predict_doas(const DatasetRecord& rec, const EvalOptions& opt, const SteeringTable* table = nullptr) {
  return extract_peaks(normalize_map(record_sps(rec, opt, table)), opt.peak_threshold);
}

/// Aggregates bucketed by T60; a record with edges[k] <= t60 < edges[k+1]
/// falls in bucket k, the last bucket is closed on the right.
inline std::vector<T60Bucket> bucket_by_t60(const std::vector<RecordOutcome>& records,
                                            const std::vector<double>& edges) {
  std::vector<T60Bucket> out;
  if (edges.size() < 2) return out;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    std::vector<MatchResult> in;
    const bool last = k + 2 == edges.size();
    for (const auto& r : records)
      if (r.t60 >= edges[k] && (r.t60 < edges[k + 1] || (last && r.t60 <= edges[k + 1]))) in.push_back(r.match);
    out.push_back({edges[k], edges[k + 1], compute_metrics(in)});
  }
  return out;
}

class EvalAccumulator {
 public:
  explicit EvalAccumulator(EvalOptions opt) : opt_(std::move(opt)) {
    if (opt_.method == Method::Dcnn && !opt_.model) throw ConfigError("dcnn evaluation needs a model");
    if (opt_.method == Method::EbMvdr || opt_.method == Method::EbMusic)
      table_.emplace(GridSpec{}, kDatasetOrder);
  }

  void add(std::size_t index, const DatasetRecord& rec) {
    RecordOutcome o;
    o.index = index;
    o.t60 = rec.t60;
    o.predictions = predict_doas(rec, opt_, table_ ? &*table_ : nullptr);
    o.match = match_doas(o.predictions, rec.truth, opt_.match_threshold_deg);
    outcomes_.push_back(std::move(o));
  }

  EvalResult finish() const {
    EvalResult r;
    r.method = opt_.method;
    std::vector<MatchResult> all;
    for (const auto& o : outcomes_) all.push_back(o.match);
    r.overall = compute_metrics(all);
    if (opt_.by_t60) r.buckets = bucket_by_t60(outcomes_, opt_.t60_edges);
    r.records = outcomes_;
    return r;
  }

 private:
  EvalOptions opt_;
  std::optional<SteeringTable> table_;
  std::vector<RecordOutcome> outcomes_;
};

inline EvalResult run_eval(std::span<const DatasetRecord> records, const EvalOptions& opt) {
  EvalAccumulator acc(opt);
  for (std::size_t i = 0; i < records.size(); ++i) acc.add(i, records[i]);
  return acc.finish();
}

/// Streams the dataset file record by record.
inline EvalResult run_eval(const std::filesystem::path& dataset, const EvalOptions& opt) {
  EvalAccumulator acc(opt);
  RecordReader reader(dataset);
  std::size_t i = 0;
  while (auto rec = reader.next()) acc.add(i++, *rec);
  return acc.finish();
}

// ---------------------------------------------------------------------------
// Reports

inline std::string record_log(const EvalResult& r) {
  std::ostringstream os;
  char buf[256];
  for (const auto& o : r.records) {
    double sum = 0.0;
    for (const auto& p : o.match.pairs) sum += p.error_deg;
    std::snprintf(buf, sizeof(buf), "record=%zu t60=%.3f truths=%zu predictions=%zu matched=%zu direct=%zu/%zu",
                  o.index, static_cast<double>(o.t60), o.match.truth_count, o.match.prediction_count,
                  o.match.pairs.size(), o.match.direct_matched, o.match.direct_truths);
    os << buf;
    if (!o.match.pairs.empty()) {
      std::snprintf(buf, sizeof(buf), " mean_error=%.4f", sum / static_cast<double>(o.match.pairs.size()));
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

inline std::string report_text(const EvalResult& r) {
  std::ostringstream os;
  os << metrics_table_header() << "\n" << format_metrics_row(method_name(r.method), r.overall) << "\n";
  os << "records " << r.overall.records << ", truths " << r.overall.truths << ", predictions "
     << r.overall.predictions << ", matched " << r.overall.matched << ", direct recall "
     << format_metric(r.overall.direct_recall) << "\n";
  if (!r.buckets.empty()) {
    os << "\nby T60\n";
    char buf[64];
    for (const auto& b : r.buckets) {
      std::snprintf(buf, sizeof(buf), "%.2f-%.2fs", b.low, b.high);
      os << format_metrics_row(buf, b.metrics) << "  (records " << b.metrics.records << ")\n";
    }
  }
  return os.str();
}

inline std::string report_key_values(const EvalResult& r) {
  std::string out = "method=" + method_name(r.method) + "\n";
  out += metrics_key_values("overall.", r.overall);
  for (const auto& b : r.buckets) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "t60_%.2f_%.2f.", b.low, b.high);
    out += metrics_key_values(buf, b.metrics);
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw FormatError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Heatmaps

enum class HeatmapFormat : std::uint8_t { Csv, Pgm };

inline HeatmapFormat parse_heatmap_format(const std::string& s) {
  if (s == "csv") return HeatmapFormat::Csv;
  if (s == "pgm") return HeatmapFormat::Pgm;
  throw ConfigError("unknown heatmap format '" + s + "' (expected csv or pgm)");
}

/// CSV: one line per elevation row (south to north), azimuth columns west
/// to east. PGM: binary P5, 8 bits, value round(255 * normalised).
inline void emit_heatmap(const SpsGrid& sps, const std::filesystem::path& path, HeatmapFormat format) {
  const int rows = sps.spec.elevation_bins, cols = sps.spec.azimuth_bins;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  if (format == HeatmapFormat::Csv) {
    char buf[32];
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        std::snprintf(buf, sizeof(buf), "%.9g", sps.at(r, c));
        out << (c ? "," : "") << buf;
      }
      out << "\n";
    }
  } else {
    const SpsGrid n = normalize_map(sps);
    out << "P5\n" << cols << " " << rows << "\n255\n";
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * n.at(r, c)))));
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

/// Truth overlay companion file: one "azimuth,elevation" line per entry.
inline void emit_truth_overlay(const DoaSet& truth, const std::filesystem::path& path) {
  std::ostringstream os;
  char buf[64];
  os << "azimuth_deg,elevation_deg,source_id,reflection_order\n";
  for (const auto& t : truth) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%d,%d\n", t.dir.azimuth(), t.dir.elevation(), t.source_id,
                  t.reflection_order);
    os << buf;
  }
  write_text_file(path, os.str());
}

/// Parses a CSV written by emit_heatmap.
inline SpsGrid read_heatmap_csv(const std::filesystem::path& path, const GridSpec& spec = {}) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  SpsGrid g(spec, SpsKind::NetworkOutput);
  std::string line;
  for (int r = 0; r < spec.elevation_bins; ++r) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": too few rows");
    std::istringstream ls(line);
    std::string cell;
    for (int c = 0; c < spec.azimuth_bins; ++c) {
      if (!std::getline(ls, cell, ',')) throw FormatError(path.string() + ": too few columns");
      try {
        g.at(r, c) = std::stod(cell);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ": bad number '" + cell + "'");
      }
    }
  }
  return g;
}

}  // namespace ebdoa
