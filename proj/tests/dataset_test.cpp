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

#include "ebdoa/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include <Eigen/Eigenvalues>

#include "gtest/gtest.h"

namespace ebdoa {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("ebdoa_dataset_test_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

GenConfig small_config(std::size_t count, std::uint64_t seed) {
  GenConfig cfg;
  cfg.count = count;
  cfg.master_seed = seed;
  return cfg;
}

const std::vector<DatasetRecord>& shared_records() {
  static const std::vector<DatasetRecord> records = generate_dataset(small_config(12, 42));
  return records;
}

TEST(Featurize, IdentityCovariance) {
  const CovarianceMatrix cov{4, Eigen::MatrixXd::Identity(25, 25)};
  const Eigen::VectorXd f = featurize(cov);
  ASSERT_EQ(f.size(), 625);
  for (int r = 0; r < 25; ++r)
    for (int c = 0; c < 25; ++c) EXPECT_DOUBLE_EQ(f(r * 25 + c), r == c ? 1.0 / 25.0 : 0.0);
}

TEST(Featurize, ScaleInvariantAndInvertible) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a(25, 40);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    const CovarianceMatrix cov{4, a * a.transpose()};
    const Eigen::VectorXd f = featurize(cov);
    const CovarianceMatrix scaled{4, 3.7 * cov.values};
    EXPECT_LT((featurize(scaled) - f).norm(), 1e-14);
    Eigen::MatrixXd back(25, 25);
    for (int r = 0; r < 25; ++r)
      for (int c = 0; c < 25; ++c) back(r, c) = f(r * 25 + c) * cov.trace();
    EXPECT_LT((back - cov.values).cwiseAbs().maxCoeff(), 1e-12 * cov.values.cwiseAbs().maxCoeff());
  }
}

TEST(Featurize, RejectsZeroTrace) {
  const CovarianceMatrix cov{4, Eigen::MatrixXd::Zero(25, 25)};
  EXPECT_THROW(featurize(cov), DomainError);
}

TEST(Unfeaturize, RecoversOrder) {
  std::vector<float> f(625, 0.0f);
  for (int i = 0; i < 25; ++i) f[static_cast<std::size_t>(i * 26)] = 0.04f;
  const auto cov = unfeaturize(f);
  EXPECT_EQ(cov.order, 4);
  EXPECT_NEAR(cov.trace(), 1.0, 1e-6);
  EXPECT_THROW(unfeaturize(std::vector<float>(624)), DomainError);
}

TEST(GenConfig, Validation) {
  GenConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.min_sources = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.t60_max = 0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.frame_length = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.hoa_order = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Generate, RecordInvariants) {
  const GenConfig cfg = small_config(12, 42);
  for (const auto& rec : shared_records()) {
    ASSERT_EQ(rec.feature.size(), kFeatureSize);
    ASSERT_EQ(rec.label.size(), kLabelSize);
    EXPECT_TRUE(rec.truth.size() == 7 || rec.truth.size() == 14);
    EXPECT_EQ(rec.truth.size(), 7u * static_cast<std::size_t>(rec.source_count));
    EXPECT_GE(rec.t60, cfg.t60_min);
    EXPECT_LE(rec.t60, cfg.t60_max);
    for (int i = 0; i < 3; ++i) {
      EXPECT_GE(rec.room[i], cfg.room_min(i) - 1e-6);
      EXPECT_LE(rec.room[i], cfg.room_max(i) + 1e-6);
      EXPECT_GE(rec.mic[i], cfg.wall_margin - 1e-6);
      EXPECT_LE(rec.mic[i], rec.room[i] - cfg.wall_margin + 1e-6);
    }
    std::vector<Point3> pts{Point3(rec.mic[0], rec.mic[1], rec.mic[2])};
    for (const auto& s : rec.sources) pts.emplace_back(s[0], s[1], s[2]);
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) EXPECT_GE((pts[a] - pts[b]).norm(), 1.0 - 1e-6);

    const CovarianceMatrix cov = unfeaturize(rec.feature);
    EXPECT_NEAR(cov.trace(), 1.0, 1e-6);
    EXPECT_LT((cov.values - cov.values.transpose()).cwiseAbs().maxCoeff(), 1e-6);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.values);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-6);
    EXPECT_GE(*std::max_element(rec.label.begin(), rec.label.end()), 0.999f);

    int directs = 0;
    for (const auto& t : rec.truth) directs += t.reflection_order == 0;
    EXPECT_EQ(directs, rec.source_count);
  }
}

TEST(Generate, DeterministicAndIndependentOfThreads) {
  GenConfig cfg = small_config(6, 42);
  const auto serial = generate_dataset(cfg);
  cfg.threads = 3;
  const auto parallel = generate_dataset(cfg);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_TRUE(serial[i] == parallel[i]) << "record " << i;
    EXPECT_TRUE(serial[i] == shared_records()[i]) << "record " << i;
  }
  const auto other = generate_dataset(small_config(1, 43));
  EXPECT_FALSE(other[0] == serial[0]);
}

TEST(Generate, RecordDependsOnlyOnIndex) {
  // A record does not change when the dataset is made longer.
  const auto rec = generate_record(small_config(12, 42), 7);
  EXPECT_TRUE(rec == shared_records()[7]);
}

TEST(Format, RoundTripAndByteIdentical) {
  const auto& recs = shared_records();
  const std::span<const DatasetRecord> first10(recs.data(), 10);
  const fs::path a = temp_path("a.bin"), b = temp_path("b.bin");
  write_records(a, first10);
  write_records(b, first10);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto back = read_records(a);
  ASSERT_EQ(back.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_TRUE(back[i] == recs[i]) << "record " << i;

  std::size_t expected = kDatasetHeaderBytes;
  for (const auto& r : first10) expected += record_size_bytes(r.sources.size(), r.truth.size());
  EXPECT_EQ(fs::file_size(a), expected);
  fs::remove(a);
  fs::remove(b);
}

TEST(Format, StreamingReader) {
  const auto& recs = shared_records();
  const fs::path p = temp_path("stream.bin");
  {
    RecordWriter w(p);
    for (const auto& r : recs) w.write(r);
  }
  RecordReader reader(p);
  EXPECT_EQ(reader.count(), recs.size());
  std::size_t n = 0;
  while (auto r = reader.next()) EXPECT_TRUE(*r == recs[n++]);
  EXPECT_EQ(n, recs.size());
  fs::remove(p);
}

TEST(Format, TenThousandRecordSizeArithmetic) {
  // One source with 7 truths: 31414 bytes per record.
  EXPECT_EQ(record_size_bytes(1, 7), 4u * (625 + 7200) + 1 + 2 + 63 + 4 + 12 + 12 + 12);
  EXPECT_EQ(kDatasetHeaderBytes, 16u);
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TEST(Format, CorruptionRaisesFormatError) {
  const auto& recs = shared_records();
  const fs::path good = temp_path("good.bin"), bad = temp_path("bad.bin");
  write_records(good, std::span<const DatasetRecord>(recs.data(), 2));
  const std::string bytes = slurp(good);

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  write_bytes(bad, wrong_magic);
  EXPECT_THROW(read_records(bad), FormatError);

  std::string wrong_version = bytes;
  wrong_version[6] = 9;
  write_bytes(bad, wrong_version);
  EXPECT_THROW(read_records(bad), FormatError);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, std::size_t{100}, bytes.size() - 1}) {
    write_bytes(bad, bytes.substr(0, cut));
    EXPECT_THROW(read_records(bad), FormatError) << "cut at " << cut;
  }

  write_bytes(bad, bytes + "x");
  EXPECT_THROW(read_records(bad), FormatError);

  std::string huge_count = bytes;
  huge_count[8 + 7] = 0x7f;
  write_bytes(bad, huge_count);
  EXPECT_THROW(read_records(bad), FormatError);

  std::string nan_feature = bytes;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(&nan_feature[kDatasetHeaderBytes], &nan, 4);
  write_bytes(bad, nan_feature);
  EXPECT_THROW(read_records(bad), FormatError);

  EXPECT_THROW(RecordReader(temp_path("missing.bin")), FormatError);
  fs::remove(good);
  fs::remove(bad);
}

TEST(Split, EightyTwenty) {
  const auto s = split(10000, 0.8, 7);
  EXPECT_EQ(s.train.size(), 8000u);
  EXPECT_EQ(s.test.size(), 2000u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (std::size_t i : s.test) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 10000u);
  EXPECT_EQ(*all.rbegin(), 9999u);
  const auto again = split(10000, 0.8, 7);
  EXPECT_EQ(again.train, s.train);
  EXPECT_NE(split(10000, 0.8, 8).train, s.train);
  EXPECT_THROW(split(10, 1.0, 0), DomainError);
}

TEST(Split, RecordOverload) {
  const auto& recs = shared_records();
  const auto [train, test] = split(std::span<const DatasetRecord>(recs), 0.75, 3);
  EXPECT_EQ(train.size(), 9u);
  EXPECT_EQ(test.size(), 3u);
}

TEST(Manifest, EchoesConfig) {
  GenConfig cfg = small_config(5, 1234);
  const std::string text = manifest_text(cfg, 5);
  EXPECT_NE(text.find("master_seed = 1234"), std::string::npos);
  EXPECT_NE(text.find("records = 5"), std::string::npos);
  EXPECT_NE(text.find("source_kind = speech-like"), std::string::npos);
  EXPECT_EQ(parse_source_kind("white"), SourceKind::White);
  EXPECT_THROW(parse_source_kind("pink"), ConfigError);
}

}  // namespace
}  // namespace ebdoa
