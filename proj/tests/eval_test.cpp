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

#include "ebdoa/eval.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

#include "gtest/gtest.h"

namespace ebdoa {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("ebdoa_eval_test_" + name); }

const std::vector<DatasetRecord>& single_source_records() {
  static const std::vector<DatasetRecord> recs = [] {
    GenConfig cfg;
    cfg.count = 20;
    cfg.min_sources = cfg.max_sources = 1;
    cfg.master_seed = 17;
    return generate_dataset(cfg);
  }();
  return recs;
}

// Anechoic record: direct path only, covariance from a white-noise plane wave.
DatasetRecord anechoic_record(const Direction& dir, std::uint64_t seed) {
  const std::size_t length = 5000;
  const auto signal = synth_source({SourceKind::White, {}}, length, 16000.0, seed);
  const Eigen::VectorXd y = manifold_vector(dir, 4);
  HoaFrame frame{4, 16000.0, Eigen::MatrixXd(25, static_cast<Eigen::Index>(length))};
  for (std::size_t t = 0; t < length; ++t) frame.samples.col(static_cast<Eigen::Index>(t)) = y * signal[t];
  // Sensor noise keeps the covariance full rank.
  Rng rng(seed + 1);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (Eigen::Index i = 0; i < frame.samples.size(); ++i) frame.samples.data()[i] += g(rng);
  DatasetRecord rec;
  const Eigen::VectorXd f = featurize(time_cov(frame));
  rec.feature.assign(f.data(), f.data() + f.size());
  rec.source_count = 1;
  rec.truth = {{dir, 0, 0}};
  const SpsGrid label = gaussian_label(rec.truth);
  rec.label.assign(label.values.begin(), label.values.end());
  rec.t60 = 0.3f;
  rec.room = {5, 5, 3};
  rec.mic = {2, 2, 1};
  rec.sources = {{3, 3, 1.5f}};
  return rec;
}

bool well_separated(const DoaSet& truth, double min_deg) {
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = i + 1; j < truth.size(); ++j)
      if (angular_distance(truth[i].dir, truth[j].dir) <= min_deg) return false;
  return true;
}

TEST(RunEval, LabelsOracleRecoversTruth) {
  EvalOptions opt;
  opt.method = Method::Labels;
  std::vector<DatasetRecord> separated;
  for (const auto& rec : single_source_records())
    if (well_separated(rec.truth, 15.0)) separated.push_back(rec);
  ASSERT_GE(separated.size(), 5u);
  const auto r = run_eval(separated, opt);
  ASSERT_TRUE(r.overall.recall.has_value());
  EXPECT_GE(*r.overall.recall, 0.95);
  EXPECT_DOUBLE_EQ(*r.overall.direct_recall, 1.0);
  EXPECT_LT(*r.overall.error_mean_deg, 3.0);
}

TEST(RunEval, LabelsOracleOnAllRecords) {
  // Arrivals closer than about two cells share one label peak, which the
  // matching can hand to either of them.
  EvalOptions opt;
  opt.method = Method::Labels;
  const auto r = run_eval(single_source_records(), opt);
  EXPECT_GE(*r.overall.recall, 0.9);
  EXPECT_DOUBLE_EQ(*r.overall.precision, 1.0);
}

TEST(RunEval, MvdrAnechoicDirectWithinGrid) {
  std::vector<DatasetRecord> recs;
  Rng rng(21);
  std::uniform_real_distribution<double> az(-180, 180), z(-0.95, 0.95);
  for (int i = 0; i < 10; ++i)
    recs.push_back(anechoic_record(Direction(az(rng), rad2deg(std::asin(z(rng)))), 100 + static_cast<std::uint64_t>(i)));
  EvalOptions opt;
  opt.method = Method::EbMvdr;
  const auto r = run_eval(recs, opt);
  EXPECT_DOUBLE_EQ(*r.overall.direct_recall, 1.0);
  for (const auto& o : r.records) {
    ASSERT_FALSE(o.match.pairs.empty());
    double best = 180.0;
    for (const auto& p : o.match.pairs) best = std::min(best, p.error_deg);
    EXPECT_LE(best, 3.0);
  }
}

TEST(RunEval, MvdrEqualsHandComposedPipeline) {
  const auto& recs = single_source_records();
  EvalOptions opt;
  opt.method = Method::EbMvdr;
  const auto r = run_eval(recs, opt);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CovarianceMatrix cov{4, Eigen::MatrixXd(25, 25)};
    for (int a = 0; a < 25; ++a)
      for (int b = 0; b < 25; ++b) cov.values(a, b) = recs[i].feature[static_cast<std::size_t>(a * 25 + b)];
    const DoaSet peaks = extract_peaks(normalize_map(eb_mvdr_spectrum(cov)), 0.5);
    const MatchResult m = match_doas(peaks, recs[i].truth);
    ASSERT_EQ(r.records[i].predictions.size(), peaks.size());
    for (std::size_t k = 0; k < peaks.size(); ++k) EXPECT_TRUE(r.records[i].predictions[k].dir == peaks[k].dir);
    ASSERT_EQ(r.records[i].match.pairs.size(), m.pairs.size());
    for (std::size_t k = 0; k < m.pairs.size(); ++k)
      EXPECT_EQ(r.records[i].match.pairs[k].error_deg, m.pairs[k].error_deg);
  }
}

TEST(RunEval, DeterministicAndStreamingEqualsInMemory) {
  const auto& recs = single_source_records();
  const fs::path p = temp_path("data.bin");
  write_records(p, recs);
  EvalOptions opt;
  opt.method = Method::EbMusic;
  opt.by_t60 = true;
  const auto a = run_eval(recs, opt);
  const auto b = run_eval(p, opt);
  EXPECT_EQ(report_text(a), report_text(b));
  EXPECT_EQ(report_key_values(a), report_key_values(b));
  EXPECT_EQ(record_log(a), record_log(b));
  EXPECT_EQ(report_key_values(a), report_key_values(run_eval(recs, opt)));
  fs::remove(p);
}

TEST(RunEval, T60BucketsPartitionRecords) {
  EvalOptions opt;
  opt.method = Method::Labels;
  opt.by_t60 = true;
  const auto r = run_eval(single_source_records(), opt);
  ASSERT_EQ(r.buckets.size(), 7u);
  std::size_t total = 0;
  for (const auto& b : r.buckets) total += b.metrics.records;
  EXPECT_EQ(total, single_source_records().size());
  EXPECT_NE(report_text(r).find("by T60"), std::string::npos);
  EXPECT_NE(report_key_values(r).find("t60_0.30_0.40.recall="), std::string::npos);
}

TEST(RunEval, DcnnNeedsMatchingModel) {
  EvalOptions opt;
  opt.method = Method::Dcnn;
  EXPECT_THROW(run_eval(single_source_records(), opt), ConfigError);
  ModelConfig cfg3;
  cfg3.hoa_order = 3;
  cfg3.fc_widths.front() = 256;
  const auto m3 = build_model(cfg3, 1);
  opt.model = &m3;
  EXPECT_THROW(run_eval(single_source_records(), opt), GeometryError);
  const auto m4 = build_model(ModelConfig{}, 1);
  opt.model = &m4;
  const auto r = run_eval(single_source_records(), opt);
  EXPECT_EQ(r.overall.records, single_source_records().size());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Heatmap, ZeroGridPgm) {
  const SpsGrid zero(GridSpec{}, SpsKind::NetworkOutput);
  const fs::path p = temp_path("zero.pgm");
  emit_heatmap(zero, p, HeatmapFormat::Pgm);
  const std::string bytes = slurp(p);
  const std::string header = "P5\n120 60\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 7200);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_TRUE(std::all_of(bytes.begin() + static_cast<std::ptrdiff_t>(header.size()), bytes.end(),
                          [](char c) { return c == 0; }));
  fs::remove(p);
}

TEST(Heatmap, CsvRoundTrip) {
  SpsGrid g(GridSpec{}, SpsKind::NetworkOutput);
  Rng rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& v : g.values) v = u(rng);
  const fs::path p = temp_path("map.csv");
  emit_heatmap(g, p, HeatmapFormat::Csv);
  const SpsGrid back = read_heatmap_csv(p);
  for (std::size_t i = 0; i < g.values.size(); ++i) EXPECT_NEAR(back.values[i], g.values[i], 1e-6);
  fs::remove(p);
}

TEST(Heatmap, LabelBrightestPixelAtTruth) {
  const Direction d(47.0, -21.0);
  const SpsGrid label = gaussian_label({{d, 0, 0}});
  const fs::path p = temp_path("label.pgm");
  emit_heatmap(label, p, HeatmapFormat::Pgm);
  const std::string bytes = slurp(p);
  const std::string header = "P5\n120 60\n255\n";
  const auto pixels = bytes.substr(header.size());
  const auto it = std::max_element(pixels.begin(), pixels.end(),
                                   [](char a, char b) { return static_cast<unsigned char>(a) < static_cast<unsigned char>(b); });
  const auto flat = static_cast<int>(it - pixels.begin());
  EXPECT_EQ(flat, GridSpec{}.index(nearest_cell(GridSpec{}, d).row, nearest_cell(GridSpec{}, d).col));
  EXPECT_EQ(static_cast<unsigned char>(*it), 255);
  fs::remove(p);
}

TEST(Heatmap, TruthOverlayAndFormats) {
  const fs::path p = temp_path("truth.csv");
  emit_truth_overlay({{Direction(10, 20), 0, 0}, {Direction(-30, 5), 0, 1}}, p);
  EXPECT_EQ(slurp(p), "azimuth_deg,elevation_deg,source_id,reflection_order\n10.000000,20.000000,0,0\n"
                      "-30.000000,5.000000,0,1\n");
  EXPECT_EQ(parse_heatmap_format("pgm"), HeatmapFormat::Pgm);
  EXPECT_THROW(parse_heatmap_format("png"), ConfigError);
  EXPECT_EQ(parse_method("eb-music"), Method::EbMusic);
  EXPECT_THROW(parse_method("doanet"), ConfigError);
  fs::remove(p);
}

}  // namespace
}  // namespace ebdoa
