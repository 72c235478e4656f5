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

#include "ebdoa/sps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"

namespace ebdoa {
namespace {

DoaEntry at(double az, double el) { return {Direction(az, el), 0, 0}; }

TEST(GaussianLabelTest, SingleTruth) {
  const GridSpec spec;
  const SpsGrid label = gaussian_label({at(1.5, 10.5)}, spec);
  const GridCell cell = nearest_cell(spec, Direction(1.5, 10.5));
  EXPECT_DOUBLE_EQ(label.at(cell.row, cell.col), 1.0);
  EXPECT_NEAR(label.at(cell.row, cell.col + 1), std::exp(-9.0 / 10.0), 1e-12);
  EXPECT_NEAR(label.at(cell.row, cell.col + 1), 0.4066, 1e-4);
  EXPECT_NEAR(label.at(cell.row + 1, cell.col), 0.4066, 1e-4);
  EXPECT_NEAR(label.at(cell.row + 1, cell.col + 1), std::exp(-18.0 / 10.0), 1e-12);
  EXPECT_EQ(label.kind, SpsKind::Label);
}

TEST(GaussianLabelTest, AzimuthWraparound) {
  const SpsGrid label = gaussian_label({at(-178.5, 0.0 + 1.5)});
  const GridCell cell = nearest_cell(label.spec, Direction(-178.5, 1.5));
  ASSERT_EQ(cell.col, 0);
  EXPECT_NEAR(label.at(cell.row, 119), std::exp(-0.9), 1e-12);
}

TEST(GaussianLabelTest, EmptyAndErrors) {
  const SpsGrid label = gaussian_label({});
  EXPECT_TRUE(std::all_of(label.values.begin(), label.values.end(), [](double v) { return v == 0.0; }));
  EXPECT_THROW(gaussian_label({at(0, 0)}, GridSpec{}, 0.0), DomainError);
}

TEST(GaussianLabelTest, BoundedAndShiftEquivariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> az(-180, 180), el(-80, 80);
  std::uniform_int_distribution<int> shift(1, 119);
  for (int trial = 0; trial < 30; ++trial) {
    DoaSet truth;
    for (int k = 0; k < 1 + trial % 5; ++k) truth.push_back(at(az(rng), el(rng)));
    const SpsGrid label = gaussian_label(truth);
    for (double v : label.values) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    EXPECT_DOUBLE_EQ(*std::max_element(label.values.begin(), label.values.end()), 1.0);

    const int s = shift(rng);
    DoaSet rotated;
    for (const auto& e : truth) rotated.push_back(at(e.dir.azimuth() + 3.0 * s, e.dir.elevation()));
    const SpsGrid moved = gaussian_label(rotated);
    for (int r = 0; r < 60; ++r)
      for (int c = 0; c < 120; ++c) ASSERT_NEAR(moved.at(r, (c + s) % 120), label.at(r, c), 1e-12);
  }
}

TEST(NormalizeMapTest, Behaviour) {
  SpsGrid constant(GridSpec{}, SpsKind::Beamformer);
  std::fill(constant.values.begin(), constant.values.end(), 4.2);
  const SpsGrid z = normalize_map(constant);
  EXPECT_TRUE(std::all_of(z.values.begin(), z.values.end(), [](double v) { return v == 0.0; }));

  SpsGrid g(GridSpec{}, SpsKind::Beamformer);
  std::fill(g.values.begin(), g.values.end(), 5.0);
  g.values[10] = 2.0;
  g.values[77] = 10.0;
  const SpsGrid n = normalize_map(g);
  EXPECT_DOUBLE_EQ(n.values[77], 1.0);
  EXPECT_DOUBLE_EQ(n.values[10], 0.0);
  EXPECT_DOUBLE_EQ(n.values[0], 3.0 / 8.0);
  EXPECT_EQ(normalize_map(n).values, n.values);
}

TEST(ExtractPeaksTest, SingleLabel) {
  const SpsGrid label = gaussian_label({at(33.0, -12.0)});
  const DoaSet peaks = extract_peaks(label);
  ASSERT_EQ(peaks.size(), 1u);
  const GridCell cell = nearest_cell(label.spec, Direction(33.0, -12.0));
  EXPECT_EQ(peaks[0].dir, label.spec.center(cell.row, cell.col));
  EXPECT_TRUE(extract_peaks(SpsGrid(GridSpec{}, SpsKind::Label)).empty());
}

TEST(ExtractPeaksTest, TwoTruthsNinetyApart) {
  const SpsGrid label = gaussian_label({at(0.0, 0.0), at(90.0, 0.0)});
  const DoaSet peaks = extract_peaks(label);
  ASSERT_EQ(peaks.size(), 2u);
  for (const auto& p : peaks) {
    const double d = std::min(angular_distance(p.dir, Direction(0, 0)),
                              angular_distance(p.dir, Direction(90, 0)));
    EXPECT_LT(d, 3.0);
  }
}

TEST(ExtractPeaksTest, OrderingThresholdAndTies) {
  SpsGrid g(GridSpec{}, SpsKind::NetworkOutput);
  g.at(30, 10) = 0.7;
  g.at(30, 50) = 0.9;
  g.at(30, 90) = 0.5;  // not above threshold
  // Plateau: two equal neighbours, the lower flat index wins.
  g.at(40, 20) = 0.8;
  g.at(40, 21) = 0.8;
  // Wraparound neighbour suppresses column 0.
  g.at(10, 0) = 0.6;
  g.at(10, 119) = 0.65;
  // Top row only has neighbours below.
  g.at(59, 5) = 0.55;
  const DoaSet peaks = extract_peaks(g);
  ASSERT_EQ(peaks.size(), 5u);
  EXPECT_EQ(peaks[0].dir, g.spec.center(30, 50));
  EXPECT_EQ(peaks[1].dir, g.spec.center(40, 20));
  EXPECT_EQ(peaks[2].dir, g.spec.center(30, 10));
  EXPECT_EQ(peaks[3].dir, g.spec.center(10, 119));
  EXPECT_EQ(peaks[4].dir, g.spec.center(59, 5));
  EXPECT_TRUE(extract_peaks(g, 0.95).empty());
}

TEST(ExtractPeaksTest, RecoversSeparatedTruths) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0), az(-180, 180);
  for (int trial = 0; trial < 50; ++trial) {
    DoaSet truth;
    while (truth.size() < 7) {
      const DoaEntry e = at(az(rng), std::asin(u(rng)) * 180.0 / std::numbers::pi);
      const bool ok = std::all_of(truth.begin(), truth.end(), [&](const DoaEntry& t) {
        return angular_distance(t.dir, e.dir) > 15.0;
      });
      if (ok) truth.push_back(e);
    }
    const DoaSet peaks = extract_peaks(gaussian_label(truth));
    for (const auto& t : truth) {
      const bool hit = std::any_of(peaks.begin(), peaks.end(), [&](const DoaEntry& p) {
        return angular_distance(p.dir, t.dir) <= 3.0;
      });
      ASSERT_TRUE(hit) << t.dir.azimuth() << "," << t.dir.elevation();
    }
  }
}

}  // namespace
}  // namespace ebdoa
