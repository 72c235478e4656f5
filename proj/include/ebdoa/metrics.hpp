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

// DOA matching under the 25-degree success rule and the pooled
// recall / precision / angle-error statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ebdoa/roomsim.hpp"
#include "ebdoa/sphharm.hpp"

namespace ebdoa {

inline constexpr double kSuccessThresholdDeg = 25.0;

struct MatchedPair {
  std::size_t prediction = 0;
  std::size_t truth = 0;
  double error_deg = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_truths;
  std::size_t prediction_count = 0;
  std::size_t truth_count = 0;
  // Truths tagged as direct paths (reflection_order == 0) and how many matched.
  std::size_t direct_truths = 0;
  std::size_t direct_matched = 0;
};

/// Greedy globally-nearest matching: repeatedly pair the closest remaining
/// (prediction, truth) pair while its distance is below the threshold.
/// Distance ties resolve by prediction index, then truth index.
inline MatchResult match_doas(const DoaSet& pred, const DoaSet& truth,
                              double threshold_deg = kSuccessThresholdDeg) {
  struct Candidate {
    double d;
    std::size_t p, t;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < pred.size(); ++p)
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const double d = angular_distance(pred[p].dir, truth[t].dir);
      if (d < threshold_deg) candidates.push_back({d, p, t});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.d, a.p, a.t) < std::tie(b.d, b.p, b.t);
  });

  MatchResult r;
  r.prediction_count = pred.size();
  r.truth_count = truth.size();
  std::vector<bool> pred_used(pred.size(), false), truth_used(truth.size(), false);
  for (const auto& c : candidates) {
    if (pred_used[c.p] || truth_used[c.t]) continue;
    pred_used[c.p] = truth_used[c.t] = true;
    r.pairs.push_back({c.p, c.t, c.d});
  }
  for (std::size_t p = 0; p < pred.size(); ++p)
    if (!pred_used[p]) r.unmatched_predictions.push_back(p);
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (!truth_used[t]) r.unmatched_truths.push_back(t);
    if (truth[t].reflection_order == 0) {
      ++r.direct_truths;
      if (truth_used[t]) ++r.direct_matched;
    }
  }
  return r;
}

/// Pooled statistics. Ratios are absent when their denominator is zero.
/// error_spread_deg is the standard deviation of matched errors in degrees.
struct MetricsReport {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> error_mean_deg;
  std::optional<double> error_spread_deg;
  std::optional<double> direct_recall;
  std::size_t records = 0;
  std::size_t truths = 0;
  std::size_t predictions = 0;
  std::size_t matched = 0;
  std::size_t direct_truths = 0;
  std::size_t direct_matched = 0;
};

inline MetricsReport compute_metrics(std::span<const MatchResult> results) {
  MetricsReport m;
  std::vector<double> errors;
  for (const auto& r : results) {
    ++m.records;
    m.truths += r.truth_count;
    m.predictions += r.prediction_count;
    m.matched += r.pairs.size();
    m.direct_truths += r.direct_truths;
    m.direct_matched += r.direct_matched;
    for (const auto& p : r.pairs) errors.push_back(p.error_deg);
  }
  if (m.truths > 0) m.recall = static_cast<double>(m.matched) / static_cast<double>(m.truths);
  if (m.predictions > 0)
    m.precision = static_cast<double>(m.matched) / static_cast<double>(m.predictions);
  if (m.direct_truths > 0)
    m.direct_recall = static_cast<double>(m.direct_matched) / static_cast<double>(m.direct_truths);
  if (!errors.empty()) {
    // Sorted summation keeps the result independent of record order.
    std::sort(errors.begin(), errors.end());
    double sum = 0.0;
    for (double e : errors) sum += e;
    const double mean = sum / static_cast<double>(errors.size());
    double sq = 0.0;
    for (double e : errors) sq += (e - mean) * (e - mean);
    m.error_mean_deg = mean;
    m.error_spread_deg = std::sqrt(sq / static_cast<double>(errors.size()));
  }
  return m;
}

/// Fixed-precision rendering of an optional metric; absent values print "n/a".
inline std::string format_metric(const std::optional<double>& v, int precision = 2) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, *v);
  return buf;
}

/// One table row: recall, precision, mean error and spread.
inline std::string format_metrics_row(const std::string& name, const MetricsReport& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %8s %8s %10s %10s", name.c_str(), format_metric(m.recall).c_str(),
                format_metric(m.precision).c_str(), format_metric(m.error_mean_deg).c_str(),
                format_metric(m.error_spread_deg).c_str());
  return buf;
}

inline std::string metrics_table_header() {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %8s %8s %10s %10s", "method", "R_rec", "R_acc", "E_mean", "E_var");
  return buf;
}

/// Machine-readable key=value lines, every key prefixed.
inline std::string metrics_key_values(const std::string& prefix, const MetricsReport& m) {
  std::string out;
  auto line = [&](const std::string& key, const std::string& value) {
    out += prefix + key + "=" + value + "\n";
  };
  line("recall", format_metric(m.recall, 6));
  line("precision", format_metric(m.precision, 6));
  line("error_mean_deg", format_metric(m.error_mean_deg, 6));
  line("error_spread_deg", format_metric(m.error_spread_deg, 6));
  line("direct_recall", format_metric(m.direct_recall, 6));
  line("records", std::to_string(m.records));
  line("truths", std::to_string(m.truths));
  line("predictions", std::to_string(m.predictions));
  line("matched", std::to_string(m.matched));
  line("direct_truths", std::to_string(m.direct_truths));
  line("direct_matched", std::to_string(m.direct_matched));
  return out;
}

}  // namespace ebdoa
