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

// Exact symmetries of the training data: rotations about the vertical axis
// by whole azimuth cells and mirrors in azimuth and elevation. Each maps a
// covariance feature through an orthogonal channel transform and a label
// map through a permutation of grid cells.

#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ebdoa/errors.hpp"
#include "ebdoa/rng.hpp"
#include "ebdoa/sphharm.hpp"

namespace ebdoa {

/// Direction map (az, el) -> (s * az + steps * resolution, e * el) with
/// s = -1 when mirror_azimuth and e = -1 when mirror_elevation.
struct FieldTransform {
  int azimuth_steps = 0;
  bool mirror_azimuth = false;
  bool mirror_elevation = false;

  bool identity() const { return azimuth_steps == 0 && !mirror_azimuth && !mirror_elevation; }

  Direction apply(const Direction& d, const GridSpec& spec = {}) const {
    const double az = (mirror_azimuth ? -d.azimuth() : d.azimuth()) + azimuth_steps * spec.resolution_deg;
    return Direction(az, mirror_elevation ? -d.elevation() : d.elevation());
  }
};

/// Matrix D with manifold_vector(t.apply(d)) = D * manifold_vector(d).
inline Eigen::MatrixXd channel_transform(int order, const FieldTransform& t, const GridSpec& spec = {}) {
  const int m_count = channel_count(order);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m_count, m_count);
  const double alpha = deg2rad(t.azimuth_steps * spec.resolution_deg);
  for (int n = 0; n <= order; ++n) {
    for (int m = -n; m <= n; ++m) {
      // Elevation mirror: P_n^|m|(-x) = (-1)^(n+|m|) P_n^|m|(x).
      const double e = (t.mirror_elevation && ((n + std::abs(m)) % 2 != 0)) ? -1.0 : 1.0;
      // Azimuth mirror flips the sin channels.
      const double s = (t.mirror_azimuth && m < 0) ? -1.0 : 1.0;
      const int row = acn_index(n, m);
      if (m == 0) {
        d(row, row) = e;
        continue;
      }
      const int am = std::abs(m);
      const int cos_ch = acn_index(n, am), sin_ch = acn_index(n, -am);
      const double c = std::cos(am * alpha), sn = std::sin(am * alpha);
      // cos(m(a+alpha)) = cos(ma)cos(m alpha) - sin(ma)sin(m alpha)
      // sin(m(a+alpha)) = sin(ma)cos(m alpha) + cos(ma)sin(m alpha)
      if (m > 0) {
        d(row, cos_ch) += e * c;
        d(row, sin_ch) += -e * sn * (t.mirror_azimuth ? -1.0 : 1.0);
      } else {
        d(row, sin_ch) += e * c * s;
        d(row, cos_ch) += e * sn;
      }
    }
  }
  return d;
}

/// Flattened (M x M) feature mapped to D F D^T.
inline void transform_feature(std::span<const float> in, std::span<float> out, const Eigen::MatrixXd& d) {
  const Eigen::Index m = d.rows();
  if (static_cast<Eigen::Index>(in.size()) != m * m || in.size() != out.size())
    throw DomainError("transform_feature: feature length does not match the transform");
  Eigen::MatrixXd f(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) f(r, c) = in[static_cast<std::size_t>(r * m + c)];
  const Eigen::MatrixXd g = d * f * d.transpose();
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) out[static_cast<std::size_t>(r * m + c)] = static_cast<float>(g(r, c));
}

/// Grid map moved with the field: the value of cell (row, col) lands on
/// the cell containing the transformed cell centre.
template <class T>
void transform_grid(std::span<const T> in, std::span<T> out, const FieldTransform& t, const GridSpec& spec = {}) {
  if (in.size() != static_cast<std::size_t>(spec.size()) || out.size() != in.size())
    throw DomainError("transform_grid: map size does not match the grid");
  const int rows = spec.elevation_bins, cols = spec.azimuth_bins;
  for (int r = 0; r < rows; ++r) {
    const int r2 = t.mirror_elevation ? rows - 1 - r : r;
    for (int c = 0; c < cols; ++c) {
      const int c1 = t.mirror_azimuth ? cols - 1 - c : c;
      const int c2 = ((c1 + t.azimuth_steps) % cols + cols) % cols;
      out[static_cast<std::size_t>(spec.index(r2, c2))] = in[static_cast<std::size_t>(spec.index(r, c))];
    }
  }
}

/// Uniform draw over all rotations and mirrors of the grid.
inline FieldTransform random_transform(Rng& rng, const GridSpec& spec = {}) {
  FieldTransform t;
  t.azimuth_steps = std::uniform_int_distribution<int>(0, spec.azimuth_bins - 1)(rng);
  t.mirror_azimuth = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  t.mirror_elevation = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  return t;
}

}  // namespace ebdoa
