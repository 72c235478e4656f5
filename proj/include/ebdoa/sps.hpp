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

// Spatial pseudo-spectrum grids: Gaussian training labels, normalisation and
// peak picking.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ebdoa/errors.hpp"
#include "ebdoa/roomsim.hpp"
#include "ebdoa/sphharm.hpp"

namespace ebdoa {

enum class SpsKind { Label, NetworkOutput, Beamformer };

/// Elevation-by-azimuth map, row-major with the GridSpec layout.
struct SpsGrid {
  GridSpec spec;
  SpsKind kind = SpsKind::Label;
  std::vector<double> values;

  SpsGrid() : values(static_cast<std::size_t>(spec.size()), 0.0) {}
  SpsGrid(const GridSpec& s, SpsKind k)
      : spec(s), kind(k), values(static_cast<std::size_t>(s.size()), 0.0) {}

  double& at(int row, int col) { return values[static_cast<std::size_t>(spec.index(row, col))]; }
  double at(int row, int col) const {
    return values[static_cast<std::size_t>(spec.index(row, col))];
  }
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                    values.begin());
  }
};

inline constexpr double kDefaultLabelVariance = 5.0;  // degrees^2
inline constexpr double kPeakThreshold = 0.5;

/// Gaussian-smoothed 0-1 map of the truth set. Each truth marks its nearest
/// cell; the window exp(-(daz^2 + del^2) / (2 sigma2)) is evaluated on cell
/// offsets in degrees (azimuth wraps), sources combine by maximum and the
/// map is rescaled to a unit peak.
inline SpsGrid gaussian_label(const DoaSet& truth, const GridSpec& spec = {},
                              double sigma2 = kDefaultLabelVariance) {
  if (!(sigma2 > 0.0)) throw DomainError("gaussian_label: variance must be positive");
  spec.validate();
  SpsGrid out(spec, SpsKind::Label);
  if (truth.empty()) return out;

  const double res = spec.resolution_deg;
  const int cols = spec.azimuth_bins;
  for (const auto& t : truth) {
    const GridCell cell = nearest_cell(spec, t.dir);
    for (int r = 0; r < spec.elevation_bins; ++r) {
      const double del = (r - cell.row) * res;
      for (int c = 0; c < cols; ++c) {
        int dc = std::abs(c - cell.col);
        dc = std::min(dc, cols - dc);
        const double daz = dc * res;
        const double g = std::exp(-(daz * daz + del * del) / (2.0 * sigma2));
        double& v = out.at(r, c);
        v = std::max(v, g);
      }
    }
  }
  const double peak = *std::max_element(out.values.begin(), out.values.end());
  if (peak > 0.0)
    for (double& v : out.values) v /= peak;
  return out;
}

/// Affine rescale onto [0, 1]; a constant map becomes all zeros.
inline SpsGrid normalize_map(const SpsGrid& sps) {
  SpsGrid out = sps;
  const auto [lo, hi] = std::minmax_element(sps.values.begin(), sps.values.end());
  const double span = *hi - *lo;
  if (!(span > 0.0) || !std::isfinite(span)) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }
  const double base = *lo;
  for (double& v : out.values) v = std::clamp((v - base) / span, 0.0, 1.0);
  return out;
}

/// Cells above threshold that dominate their 8-neighbourhood (azimuth wraps,
/// the elevation edges only see the rows they have). A neighbour with an
/// equal value blocks the cell only if it has the lower flat index. Results
/// are bin centers ordered by descending value.
inline DoaSet extract_peaks(const SpsGrid& sps, double threshold = kPeakThreshold) {
  const GridSpec& spec = sps.spec;
  const int rows = spec.elevation_bins;
  const int cols = spec.azimuth_bins;
  std::vector<int> found;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = sps.at(r, c);
      if (!(v > threshold)) continue;
      const int self = spec.index(r, c);
      bool peak = true;
      for (int dr = -1; dr <= 1 && peak; ++dr) {
        const int nr = r + dr;
        if (nr < 0 || nr >= rows) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int nc = (c + dc + cols) % cols;
          const double nv = sps.at(nr, nc);
          if (nv > v || (nv == v && spec.index(nr, nc) < self)) {
            peak = false;
            break;
          }
        }
      }
      if (peak) found.push_back(self);
    }
  }
  std::stable_sort(found.begin(), found.end(), [&sps](int a, int b) {
    return sps.values[static_cast<std::size_t>(a)] > sps.values[static_cast<std::size_t>(b)];
  });
  DoaSet out;
  out.reserve(found.size());
  for (int idx : found) out.push_back({spec.center(idx), -1, -1});
  return out;
}

}  // namespace ebdoa
