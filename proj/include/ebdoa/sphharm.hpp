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

// Real spherical harmonics (N3D, ACN, no Condon-Shortley phase), manifold
// vectors, the 60x120 direction grid and great-circle distances.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ebdoa/errors.hpp"

#ifndef EBDOA_MAX_SH_ORDER
#define EBDOA_MAX_SH_ORDER 8
#endif

namespace ebdoa {

inline constexpr int kMaxShOrder = EBDOA_MAX_SH_ORDER;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Number of HOA channels for order N.
inline constexpr int channel_count(int order) { return (order + 1) * (order + 1); }

// ACN channel index for degree n, order m.
inline constexpr int acn_index(int n, int m) { return n * (n + 1) + m; }

// Wrap an azimuth in degrees into [-180, 180).
inline double wrap_azimuth(double az) {
  double w = std::fmod(az + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  w -= 180.0;
  // fmod can land exactly on +180 after the shift for tiny negative inputs.
  if (w >= 180.0) w -= 360.0;
  return w;
}

/// A bearing on the unit sphere. Azimuth is counter-clockwise from +x in the
/// horizontal plane, elevation is measured up from the horizontal plane.
class Direction {
 public:
  Direction() = default;
  Direction(double azimuth_deg, double elevation_deg) {
    if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg))
      throw DomainError("Direction: non-finite angle");
    if (elevation_deg < -90.0 || elevation_deg > 90.0)
      throw DomainError("Direction: elevation " + std::to_string(elevation_deg) +
                        " outside [-90, 90]");
    azimuth_ = wrap_azimuth(azimuth_deg);
    elevation_ = elevation_deg;
  }

  // Bearing of a (non-zero) cartesian vector.
  static Direction from_vector(const Eigen::Vector3d& v) {
    const double norm = v.norm();
    if (!(norm > 0.0)) throw DomainError("Direction: zero-length vector");
    const double el = rad2deg(std::asin(std::clamp(v.z() / norm, -1.0, 1.0)));
    const double az = rad2deg(std::atan2(v.y(), v.x()));
    return Direction(az, el);
  }

  double azimuth() const { return azimuth_; }
  double elevation() const { return elevation_; }

  Eigen::Vector3d unit_vector() const {
    const double az = deg2rad(azimuth_);
    const double el = deg2rad(elevation_);
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
  }

  friend bool operator==(const Direction&, const Direction&) = default;

 private:
  double azimuth_ = 0.0;
  double elevation_ = 0.0;
};

namespace detail {

// Associated Legendre values P_n^m(x), 0 <= m <= n <= order, without the
// Condon-Shortley phase. Stored at [n * (n + 1) / 2 + m].
inline std::vector<double> legendre_table(int order, double x) {
  std::vector<double> p(static_cast<std::size_t>((order + 1) * (order + 2) / 2), 0.0);
  auto at = [&p](int n, int m) -> double& {
    return p[static_cast<std::size_t>(n * (n + 1) / 2 + m)];
  };
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  at(0, 0) = 1.0;
  for (int m = 1; m <= order; ++m) at(m, m) = at(m - 1, m - 1) * (2 * m - 1) * s;
  for (int m = 0; m < order; ++m) at(m + 1, m) = x * (2 * m + 1) * at(m, m);
  for (int m = 0; m <= order; ++m) {
    for (int n = m + 2; n <= order; ++n) {
      at(n, m) = ((2 * n - 1) * x * at(n - 1, m) - (n + m - 1) * at(n - 2, m)) / (n - m);
    }
  }
  return p;
}

// sqrt((2n+1)/(4pi) * (2 - delta_m0) * (n-m)!/(n+m)!)
inline double n3d_norm(int n, int m) {
  double ratio = 1.0;
  for (int k = n - m + 1; k <= n + m; ++k) ratio /= k;
  const double two = (m == 0) ? 1.0 : 2.0;
  return std::sqrt((2 * n + 1) / (4.0 * std::numbers::pi) * two * ratio);
}

inline void check_order(int order) {
  if (order < 0 || order > kMaxShOrder)
    throw DomainError("spherical harmonic order " + std::to_string(order) +
                      " outside [0, " + std::to_string(kMaxShOrder) + "]");
}

}  // namespace detail

/// Real orthonormal spherical harmonic of degree n and order m at dir.
inline double real_sh(int n, int m, const Direction& dir) {
  if (n < 0 || std::abs(m) > n)
    throw DomainError("real_sh: need 0 <= |m| <= n, got n=" + std::to_string(n) +
                      " m=" + std::to_string(m));
  detail::check_order(n);
  const int am = std::abs(m);
  const auto p = detail::legendre_table(n, std::sin(deg2rad(dir.elevation())));
  const double leg = p[static_cast<std::size_t>(n * (n + 1) / 2 + am)];
  const double az = deg2rad(dir.azimuth());
  double trig = 1.0;
  if (m > 0) trig = std::cos(m * az);
  if (m < 0) trig = std::sin(am * az);
  return detail::n3d_norm(n, am) * leg * trig;
}

/// Steering vector in the eigenbeam domain: all real SH up to `order` at dir,
/// ACN ordered. Length (order+1)^2.
inline Eigen::VectorXd manifold_vector(const Direction& dir, int order) {
  detail::check_order(order);
  Eigen::VectorXd y(channel_count(order));
  const auto p = detail::legendre_table(order, std::sin(deg2rad(dir.elevation())));
  const double az = deg2rad(dir.azimuth());
  for (int n = 0; n <= order; ++n) {
    const std::size_t row = static_cast<std::size_t>(n * (n + 1) / 2);
    y(acn_index(n, 0)) = detail::n3d_norm(n, 0) * p[row];
    for (int m = 1; m <= n; ++m) {
      const double base = detail::n3d_norm(n, m) * p[row + static_cast<std::size_t>(m)];
      y(acn_index(n, m)) = base * std::cos(m * az);
      y(acn_index(n, -m)) = base * std::sin(m * az);
    }
  }
  return y;
}

/// Elevation x azimuth bin layout. Bin centers sit half a bin inside the
/// edges, so the grid tiles [-90, 90] x [-180, 180) exactly.
struct GridSpec {
  int elevation_bins = 60;
  int azimuth_bins = 120;
  double resolution_deg = 3.0;

  int size() const { return elevation_bins * azimuth_bins; }
  int index(int row, int col) const { return row * azimuth_bins + col; }
  double elevation_center(int row) const { return -90.0 + resolution_deg * (row + 0.5); }
  double azimuth_center(int col) const { return -180.0 + resolution_deg * (col + 0.5); }
  Direction center(int row, int col) const {
    return Direction(azimuth_center(col), elevation_center(row));
  }
  Direction center(int flat) const { return center(flat / azimuth_bins, flat % azimuth_bins); }

  void validate() const {
    if (elevation_bins <= 0 || azimuth_bins <= 0 || !(resolution_deg > 0.0))
      throw ConfigError("GridSpec: bins and resolution must be positive");
    if (std::abs(elevation_bins * resolution_deg - 180.0) > 1e-9 ||
        std::abs(azimuth_bins * resolution_deg - 360.0) > 1e-9)
      throw ConfigError("GridSpec: bins x resolution must tile 180 x 360 degrees");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct GridCell {
  int row = 0;
  int col = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Cell containing dir. Elevation +90 falls in the top row.
inline GridCell nearest_cell(const GridSpec& spec, const Direction& dir) {
  int row = static_cast<int>(std::floor((dir.elevation() + 90.0) / spec.resolution_deg));
  int col = static_cast<int>(std::floor((dir.azimuth() + 180.0) / spec.resolution_deg));
  row = std::clamp(row, 0, spec.elevation_bins - 1);
  col = ((col % spec.azimuth_bins) + spec.azimuth_bins) % spec.azimuth_bins;
  return {row, col};
}

/// Bin-center directions in row-major order: flat index = row * azimuth_bins + col,
/// row 0 is the lowest elevation and col 0 the most negative azimuth.
inline std::vector<Direction> build_grid(const GridSpec& spec = {}) {
  spec.validate();
  std::vector<Direction> grid;
  grid.reserve(static_cast<std::size_t>(spec.size()));
  for (int r = 0; r < spec.elevation_bins; ++r)
    for (int c = 0; c < spec.azimuth_bins; ++c) grid.push_back(spec.center(r, c));
  return grid;
}

/// Manifold vectors of every grid direction, one column per cell.
inline Eigen::MatrixXd grid_manifold(const std::vector<Direction>& grid, int order) {
  Eigen::MatrixXd y(channel_count(order), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    y.col(static_cast<Eigen::Index>(i)) = manifold_vector(grid[i], order);
  return y;
}

/// Central angle between two bearings in degrees, in [0, 180].
inline double angular_distance(const Direction& a, const Direction& b) {
  if (a == b) return 0.0;
  const double ea = deg2rad(a.elevation());
  const double eb = deg2rad(b.elevation());
  const double daz = deg2rad(a.azimuth() - b.azimuth());
  const double c = std::sin(ea) * std::sin(eb) + std::cos(ea) * std::cos(eb) * std::cos(daz);
  return rad2deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

}  // namespace ebdoa
