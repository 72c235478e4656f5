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

// Spatial spectra of one source in a 4 x 5 x 2.6 m room with T60 = 0.8 s,
// source at (3.0, 3.0, 1.5) m and the array at (2.0, 2.0, 1.5) m.
//
//   reference_room <output dir> [model file]
//
// Writes PGM and CSV heatmaps for EB-MVDR, EB-MUSIC, the label map and, when
// a model is given, the network output, plus the true directions as CSV.

#include <cstdio>
#include <filesystem>
#include <string>

#include "ebdoa/dataset.hpp"
#include "ebdoa/dcnn.hpp"
#include "ebdoa/ebdsp.hpp"
#include "ebdoa/eval.hpp"
#include "ebdoa/roomsim.hpp"
#include "ebdoa/sps.hpp"

namespace fs = std::filesystem;
using namespace ebdoa;

namespace {

void emit(const SpsGrid& sps, const fs::path& dir, const std::string& name, const DoaSet& truth) {
  emit_heatmap(sps, dir / (name + ".pgm"), HeatmapFormat::Pgm);
  emit_heatmap(sps, dir / (name + ".csv"), HeatmapFormat::Csv);
  const DoaSet peaks = extract_peaks(normalize_map(sps));
  const auto m = compute_metrics(std::vector<MatchResult>{match_doas(peaks, truth)});
  std::printf("%-9s %3zu peaks, %zu/%zu truths matched, mean error %s deg\n", name.c_str(), peaks.size(),
              m.matched, m.truths, format_metric(m.error_mean_deg).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::fprintf(stderr, "usage: %s <output dir> [model file]\n", argv[0]);
    return 1;
  }
  try {
    const fs::path out = argv[1];
    fs::create_directories(out);
    const RoomSpec room{{4.0, 5.0, 2.6}, 0.8, 343.0};
    const Point3 src{3.0, 3.0, 1.5}, mic{2.0, 2.0, 1.5};
    const double fs_hz = 16000.0;
    const std::size_t frame = 5000;

    const auto images = enumerate_images(room, src, mic, 4);
    double max_delay = 0.0;
    for (const auto& img : images) max_delay = std::max(max_delay, img.delay);
    const auto preroll = static_cast<std::size_t>(std::ceil(max_delay * fs_hz)) + 2;
    const auto signal = synth_source({SourceKind::SpeechLike, {}}, preroll + frame, fs_hz, 2026);
    const HoaFrame hoa = encode_hoa(images, signal, 4, fs_hz).tail(static_cast<Eigen::Index>(frame));
    const CovarianceMatrix cov = time_cov(hoa);
    const DoaSet truth = first_order_truth(images, mic);

    emit_truth_overlay(truth, out / "truth.csv");
    emit(eb_mvdr_spectrum(cov), out, "eb-mvdr", truth);
    emit(eb_music_spectrum(cov, GridSpec{}, default_music_sources(1, cov.dim())), out, "eb-music", truth);
    emit(gaussian_label(truth), out, "label", truth);
    if (argc == 3) {
      const auto model = load_model(argv[2], ModelConfig{});
      const Eigen::VectorXd f = featurize(cov);
      std::vector<float> feature(f.data(), f.data() + f.size());
      emit(model_forward(model, feature), out, "dcnn", truth);
    }
    std::printf("heatmaps written to %s\n", out.string().c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
