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

#include "ebdoa/augment.hpp"

#include "ebdoa/dataset.hpp"
#include "ebdoa/sps.hpp"
#include "gtest/gtest.h"

namespace ebdoa {
namespace {

std::vector<FieldTransform> sample_transforms() {
  std::vector<FieldTransform> out;
  for (int steps : {0, 1, 17, 60, 119})
    for (bool ma : {false, true})
      for (bool me : {false, true}) out.push_back({steps, ma, me});
  return out;
}

TEST(FieldTransform, ChannelMatrixMapsManifold) {
  Rng rng(1);
  std::uniform_real_distribution<double> az(-180, 180), z(-1, 1);
  for (const auto& t : sample_transforms()) {
    const Eigen::MatrixXd d = channel_transform(4, t);
    EXPECT_LT((d * d.transpose() - Eigen::MatrixXd::Identity(25, 25)).norm(), 1e-12);
    for (int k = 0; k < 20; ++k) {
      const Direction dir(az(rng), rad2deg(std::asin(z(rng))));
      EXPECT_LT((d * manifold_vector(dir, 4) - manifold_vector(t.apply(dir), 4)).norm(), 1e-10);
    }
  }
}

TEST(FieldTransform, GridPermutationMatchesTransformedLabel) {
  const DoaSet truth{{Direction(33.7, 12.4), 0, 0}, {Direction(-150.2, -40.9), 0, 1}};
  const SpsGrid label = gaussian_label(truth);
  for (const auto& t : sample_transforms()) {
    DoaSet moved;
    for (const auto& e : truth) moved.push_back({t.apply(e.dir), e.source_id, e.reflection_order});
    const SpsGrid expected = gaussian_label(moved);
    std::vector<double> out(label.values.size());
    transform_grid<double>(label.values, out, t);
    for (std::size_t i = 0; i < out.size(); ++i) ASSERT_NEAR(out[i], expected.values[i], 1e-9);
  }
}

TEST(FieldTransform, FeatureKeepsTraceAndSymmetry) {
  GenConfig cfg;
  cfg.count = 1;
  const auto rec = generate_record(cfg, 0);
  for (const auto& t : sample_transforms()) {
    std::vector<float> out(rec.feature.size());
    transform_feature(rec.feature, out, channel_transform(4, t));
    const CovarianceMatrix c = unfeaturize(out);
    EXPECT_NEAR(c.trace(), 1.0, 1e-5);
    EXPECT_LT((c.values - c.values.transpose()).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(FieldTransform, IdentityLeavesDataUnchanged) {
  const FieldTransform id;
  EXPECT_TRUE(id.identity());
  EXPECT_LT((channel_transform(4, id) - Eigen::MatrixXd::Identity(25, 25)).norm(), 1e-15);
  std::vector<float> in(7200), out(7200);
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = static_cast<float>(i);
  transform_grid<float>(in, out, id);
  EXPECT_EQ(in, out);
}

}  // namespace
}  // namespace ebdoa
