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

// Numerical self-checks: Parseval equivalence, gradient fidelity, classical
// beamformer oracles, label/peak round trip, reverberation decay and file
// corruption handling. Each check is deterministic and reports its worst case.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ebdoa/dataset.hpp"
#include "ebdoa/dcnn.hpp"
#include "ebdoa/ebdsp.hpp"
#include "ebdoa/errors.hpp"
#include "ebdoa/nn.hpp"
#include "ebdoa/roomsim.hpp"
#include "ebdoa/sps.hpp"

namespace ebdoa::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// Runs `body` and records its wall time; an escaping exception fails the check.
inline CheckResult timed(const std::string& name, const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("unexpected exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::string format_line(const CheckResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.1f s)", r.seconds);
  return std::string(r.passed ? "PASS " : "FAIL ") + r.name + ": " + r.detail + buf;
}

namespace detail {

inline Direction random_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> a(-180.0, 180.0);
  return Direction(a(rng), std::asin(u(rng)) * 180.0 / std::numbers::pi);
}

inline Point3 uniform_point(std::mt19937_64& rng, const Point3& lo, const Point3& hi) {
  Point3 p;
  for (int i = 0; i < 3; ++i) p(i) = std::uniform_real_distribution<double>(lo(i), hi(i))(rng);
  return p;
}

// Room with dimensions and T60 drawn from the dataset ranges, redrawn until
// its Sabine absorption is physical.
inline RoomSpec random_room(std::mt19937_64& rng, double t60) {
  const GenConfig ranges;
  for (;;) {
    RoomSpec room;
    room.dims = uniform_point(rng, ranges.room_min, ranges.room_max);
    room.t60 = t60;
    try {
      sabine_beta(room);
      return room;
    } catch (const InfeasibleRoomError&) {
    }
  }
}

inline std::pair<Point3, Point3> place_pair(std::mt19937_64& rng, const RoomSpec& room) {
  const Point3 lo = Point3::Constant(0.5), hi = room.dims - lo;
  for (;;) {
    const Point3 a = uniform_point(rng, lo, hi), b = uniform_point(rng, lo, hi);
    if ((a - b).norm() >= 1.0) return {a, b};
  }
}

template <class T>
nn::Tensor<T> random_tensor(typename nn::Tensor<T>::Shape shape, std::mt19937_64& rng) {
  nn::Tensor<T> t(shape);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& v : t.values()) v = static_cast<T>(g(rng));
  return t;
}

template <class Vec>
void fill_normal(Vec& v, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& x : v) x = static_cast<typename Vec::value_type>(g(rng));
}

inline double probe_loss(const nn::Tensor<double>& out, const nn::Tensor<double>& probe) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * probe.values()[i];
  return s;
}

}  // namespace detail

/// Full-band frequency-smoothed covariance against the time-domain one.
inline CheckResult parseval_check(int frames = 100, std::uint64_t seed = 1) {
  return timed("parseval", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int f = 0; f < frames; ++f) {
      HoaFrame frame{4, 16000.0, Eigen::MatrixXd(25, 5000)};
      for (Eigen::Index c = 0; c < 25; ++c)
        for (Eigen::Index t = 0; t < 5000; ++t) frame.samples(c, t) = g(rng);
      const auto tc = time_cov(frame).values;
      const auto fc = freq_smoothed_cov(frame, 0, 2500).values;
      worst = std::max(worst, (fc - tc).norm() / tc.norm());
    }
    r.passed = worst < 1e-6;
    r.detail = std::to_string(frames) + " frames, max relative Frobenius error " + fmt("%.3g", worst) +
               " (limit 1e-6)";
  });
}

/// Finite differences for dense, deconvolution, sigmoid-BCE and the assembled
/// default model. The model check holds the ReLU pattern of the evaluation
/// point fixed so no stencil straddles a switch.
inline CheckResult gradient_checks(std::uint64_t seed = 3) {
  return timed("gradients", [&](CheckResult& r) {
    using nn::Tensor;
    std::mt19937_64 rng(seed);
    double dense_err = 0.0, deconv_err = 0.0, bce_err = 0.0, model_err = 0.0;
    {
      auto p = nn::LayerParams<double>::make_dense(8, 5);
      detail::fill_normal(p.weight, rng);
      detail::fill_normal(p.bias, rng);
      auto x = detail::random_tensor<double>({3, 8, 1, 1}, rng);
      const auto probe = detail::random_tensor<double>({3, 5, 1, 1}, rng);
      const auto back = nn::dense_backward(p, x, probe);
      dense_err = nn::gradient_check<double>(
                      {p.weight, p.bias, x.values()},
                      {back.grad_params.weight, back.grad_params.bias, back.grad_input.values()},
                      [&] { return detail::probe_loss(nn::dense(p, x), probe); }, 1000, seed, 1e-4)
                      .max_relative_error;
    }
    for (const nn::DeconvGeometry g : {nn::DeconvGeometry{3, 4, 4, 4, 2, 2, 1, 1, 0, 0},
                                       nn::DeconvGeometry{4, 3, 3, 3, 1, 1, 1, 1, 0, 0},
                                       nn::DeconvGeometry{5, 3, 3, 2, 2, 3, 0, 1, 1, 2}}) {
      auto p = nn::LayerParams<double>::make_deconv(g);
      detail::fill_normal(p.weight, rng);
      detail::fill_normal(p.bias, rng);
      auto x = detail::random_tensor<double>({2, g.in_channels, 3, 4}, rng);
      const auto probe = detail::random_tensor<double>(nn::deconv2d(p, x).shape(), rng);
      const auto back = nn::deconv2d_backward(p, x, probe);
      const auto res = nn::gradient_check<double>(
          {p.weight, p.bias, x.values()},
          {back.grad_params.weight, back.grad_params.bias, back.grad_input.values()},
          [&] { return detail::probe_loss(nn::deconv2d(p, x), probe); }, 400, seed, 1e-4);
      deconv_err = std::max(deconv_err, res.max_relative_error);
    }
    {
      auto logits = detail::random_tensor<double>({2, 30, 1, 1}, rng);
      Tensor<double> targets({2, 30, 1, 1});
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (double& t : targets.values()) t = u(rng);
      const auto r0 = nn::sigmoid_bce(logits, targets);
      bce_err = nn::gradient_check<double>({logits.values()}, {r0.grad.values()},
                                           [&] { return nn::sigmoid_bce(logits, targets).loss; }, 60,
                                           seed, 1e-5)
                    .max_relative_error;
    }
    {
      auto m = cast_model<double>(build_model(ModelConfig{}, seed));
      GenConfig gen;
      gen.master_seed = seed;
      Tensor<double> x({2, 625, 1, 1}), t({2, 1, 60, 120});
      for (int b = 0; b < 2; ++b) {
        const auto rec = generate_record(gen, static_cast<std::size_t>(b));
        std::copy(rec.feature.begin(), rec.feature.end(), x.data() + b * 625);
        std::copy(rec.label.begin(), rec.label.end(), t.data() + b * 7200);
      }
      const auto center = forward(m, x);
      const auto loss = nn::sigmoid_bce(center.logits, t);
      const auto grads = backward(m, center, loss.grad);
      std::vector<std::span<const double>> analytic;
      for (const auto& g : grads) {
        analytic.emplace_back(g.weight);
        analytic.emplace_back(g.bias);
      }
      model_err = nn::gradient_check<double>(
                      m.parameter_blocks(), analytic,
                      [&] { return nn::sigmoid_bce(forward(m, x, &center).logits, t).loss; }, 300, seed,
                      1e-3)
                      .max_relative_error;
    }
    r.passed = dense_err < 1e-4 && deconv_err < 1e-4 && bce_err < 1e-5 && model_err < 1e-3;
    r.detail = "max relative error dense " + fmt("%.2g", dense_err) + " (<1e-4), deconv " +
               fmt("%.2g", deconv_err) + " (<1e-4), sigmoid-BCE " + fmt("%.2g", bce_err) +
               " (<1e-5), model " + fmt("%.2g", model_err) + " (<1e-3)";
  });
}

/// Anechoic single-source EB-MVDR peaks and two-source EB-MUSIC resolution.
inline CheckResult beamformer_oracles(int trials = 50, std::uint64_t seed = 5) {
  return timed("beamformer oracles", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    const SteeringTable table(GridSpec{}, 4);
    int mvdr_ok = 0, music_ok = 0;
    double mvdr_worst = 0.0, music_worst = 0.0;
    std::uniform_real_distribution<double> t60(0.3, 1.0);
    for (int i = 0; i < trials; ++i) {
      const RoomSpec room = detail::random_room(rng, t60(rng));
      const auto [src, mic] = detail::place_pair(rng, room);
      const auto images = enumerate_images(room, src, mic, 0);
      const auto s = synth_source({SourceKind::SpeechLike, {}}, 5000, 16000, rng());
      const SpsGrid p = eb_mvdr_spectrum(time_cov(encode_hoa(images, s, 4, 16000)), table);
      const double err = angular_distance(table.directions[p.argmax()], Direction::from_vector(src - mic));
      mvdr_worst = std::max(mvdr_worst, err);
      mvdr_ok += err <= 3.0;
    }
    for (int i = 0; i < trials; ++i) {
      const Direction a = detail::random_direction(rng);
      Direction b = detail::random_direction(rng);
      while (angular_distance(a, b) < 40.0) b = detail::random_direction(rng);
      const Eigen::VectorXd ya = manifold_vector(a, 4), yb = manifold_vector(b, 4);
      const CovarianceMatrix cov{4, ya * ya.transpose() + yb * yb.transpose()};
      // The two peaks can differ by orders of magnitude; rank local maxima instead of thresholding.
      const DoaSet peaks = extract_peaks(normalize_map(eb_music_spectrum(cov, table, 2)), 0.0);
      double ea = 180.0, eb = 180.0;
      for (std::size_t k = 0; k < std::min<std::size_t>(2, peaks.size()); ++k) {
        ea = std::min(ea, angular_distance(peaks[k].dir, a));
        eb = std::min(eb, angular_distance(peaks[k].dir, b));
      }
      music_worst = std::max({music_worst, ea, eb});
      music_ok += ea <= 3.0 && eb <= 3.0;
    }
    r.passed = mvdr_ok == trials && music_ok == trials;
    r.detail = "EB-MVDR " + std::to_string(mvdr_ok) + "/" + std::to_string(trials) + " within 3 deg (worst " +
               fmt("%.2f", mvdr_worst) + "), EB-MUSIC " + std::to_string(music_ok) + "/" +
               std::to_string(trials) + " pairs within 3 deg (worst " + fmt("%.2f", music_worst) + ")";
  });
}

/// Peaks of a Gaussian label map recover every labelled direction.
inline CheckResult label_peak_roundtrip(int sets = 200, std::uint64_t seed = 7) {
  return timed("label/peak round trip", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(1, 7);
    int ok = 0;
    double worst = 0.0;
    for (int s = 0; s < sets; ++s) {
      const auto n = static_cast<std::size_t>(size(rng));
      DoaSet truth;
      while (truth.size() < n) {
        const Direction d = detail::random_direction(rng);
        const bool spaced = std::all_of(truth.begin(), truth.end(),
                                        [&](const DoaEntry& t) { return angular_distance(t.dir, d) > 15.0; });
        if (spaced) truth.push_back({d, 0, truth.empty() ? 0 : 1});
      }
      const DoaSet peaks = extract_peaks(gaussian_label(truth), 0.5);
      bool all = true;
      for (const auto& t : truth) {
        double best = 180.0;
        for (const auto& p : peaks) best = std::min(best, angular_distance(p.dir, t.dir));
        worst = std::max(worst, best);
        all = all && best <= 3.0;
      }
      ok += all;
    }
    r.passed = ok == sets;
    r.detail = std::to_string(ok) + "/" + std::to_string(sets) + " sets fully recovered within 3 deg (worst " +
               fmt("%.2f", worst) + ")";
  });
}

/// Schroeder T60 of the image-source energy response against the target.
/// Room sizes step from the smallest to the largest dataset room while the
/// target T60 visits the dataset range in a shuffled order, so small and large
/// rooms are each paired with short and long reverberation.
inline CheckResult reverberation_check(int rooms = 10, std::uint64_t seed = 9) {
  return timed("reverberation T60", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    const GenConfig ranges;
    const double fs = 16000.0;
    int ok = 0;
    double worst = 0.0;
    for (int i = 0; i < rooms; ++i) {
      const double f = static_cast<double>(i) / std::max(1, rooms - 1);
      const int slot = (3 * i) % std::max(1, rooms);
      RoomSpec room;
      room.dims = ranges.room_min + f * (ranges.room_max - ranges.room_min);
      room.t60 = ranges.t60_min + (ranges.t60_max - ranges.t60_min) * slot / std::max(1, rooms - 1);
      const auto [src, mic] = detail::place_pair(rng, room);
      const auto length = static_cast<std::size_t>(1.5 * room.t60 * fs);
      const auto energy = room_energy_response(room, src, mic, 1000, fs, length);
      const double rel = std::abs(schroeder_t60(energy, fs) - room.t60) / room.t60;
      worst = std::max(worst, rel);
      ok += rel <= 0.25;
    }
    r.passed = ok == rooms;
    r.detail = std::to_string(ok) + "/" + std::to_string(rooms) + " rooms within 25% of target T60 (worst " +
               fmt("%.1f", 100.0 * worst) + "%)";
  });
}

// ---------------------------------------------------------------------------
// Corruption corpus

struct CorruptionCase {
  std::string name;
  std::string bytes;
  bool model = false;  // false: dataset file
};

namespace detail {

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline void write_bytes(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_f32(std::string& s, std::size_t at, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  for (int i = 0; i < 4; ++i) s[at + static_cast<std::size_t>(i)] = static_cast<char>((u >> (8 * i)) & 0xFF);
}

inline std::string with(std::string s, std::size_t at, const std::string& patch) {
  s.replace(at, patch.size(), patch);
  return s;
}

inline std::string with_f32(std::string s, std::size_t at, float v) {
  put_f32(s, at, v);
  return s;
}

}  // namespace detail

/// Twenty damaged dataset and model files built from valid ones in `dir`.
inline std::vector<CorruptionCase> corruption_corpus(const std::filesystem::path& dir) {
  using detail::with;
  using detail::with_f32;
  GenConfig gen;
  gen.count = 2;
  gen.min_sources = gen.max_sources = 1;
  gen.master_seed = 41;
  const auto recs = generate_dataset(gen);
  const auto dpath = dir / "corpus_dataset.bin", mpath = dir / "corpus_model.bin";
  write_records(dpath, recs);
  save_model(build_model(ModelConfig{}, 41), mpath);
  const std::string d = detail::slurp(dpath), m = detail::slurp(mpath);

  const std::size_t rec0 = kDatasetHeaderBytes;
  const std::size_t label0 = rec0 + 4 * kFeatureSize;
  const std::size_t counts0 = label0 + 4 * kLabelSize;  // u8 sources, u16 truths
  const std::size_t truth0 = counts0 + 3;
  const std::size_t t60_0 = truth0 + 9 * recs[0].truth.size();
  const std::size_t body = m.find("end_header\n") + 11;
  std::string count_huge = d;
  for (int i = 0; i < 8; ++i) count_huge[8 + static_cast<std::size_t>(i)] = static_cast<char>(0xFF);

  std::vector<CorruptionCase> c;
  c.push_back({"dataset empty file", "", false});
  c.push_back({"dataset bad magic", with(d, 0, "XBDOA1"), false});
  c.push_back({"dataset unknown version", with(d, 6, std::string("\x07\x00", 2)), false});
  c.push_back({"dataset header cut", d.substr(0, 10), false});
  c.push_back({"dataset record count too large", count_huge, false});
  c.push_back({"dataset cut inside feature", d.substr(0, rec0 + 1000), false});
  c.push_back({"dataset cut inside truth list", d.substr(0, truth0 + 13), false});
  c.push_back({"dataset cut before last byte", d.substr(0, d.size() - 1), false});
  c.push_back({"dataset trailing byte", d + std::string(1, '\0'), false});
  c.push_back({"dataset NaN feature", with_f32(d, rec0 + 40, std::nanf("")), false});
  c.push_back({"dataset label above one", with_f32(d, label0 + 400, 2.0f), false});
  c.push_back({"dataset zero source count", with(d, counts0, std::string(1, '\0')), false});
  c.push_back({"dataset azimuth out of range", with_f32(d, truth0, 900.0f), false});
  c.push_back({"dataset negative T60", with_f32(d, t60_0, -1.0f), false});
  c.push_back({"model empty file", "", true});
  c.push_back({"model bad magic", with(m, 0, "XBDOA"), true});
  c.push_back({"model cut inside header", m.substr(0, body / 2), true});
  c.push_back({"model cut inside weights", m.substr(0, body + 1000), true});
  c.push_back({"model NaN weight", with_f32(m, body + 4 * 17, std::nanf("")), true});
  c.push_back({"model trailing bytes", m + "tail", true});
  std::filesystem::remove(dpath);
  std::filesystem::remove(mpath);
  return c;
}

/// Every damaged file must raise one of the library's typed errors.
inline CheckResult corruption_check(const std::filesystem::path& dir) {
  return timed("format robustness", [&](CheckResult& r) {
    const auto corpus = corruption_corpus(dir);
    const auto path = dir / "corpus_case.bin";
    std::size_t typed = 0;
    std::string failures;
    for (const auto& cc : corpus) {
      detail::write_bytes(path, cc.bytes);
      std::string outcome = "accepted";
      try {
        if (cc.model)
          (void)load_model(path, ModelConfig{});
        else
          (void)read_records(path);
      } catch (const FormatError&) {
        outcome.clear();
      } catch (const ConfigError&) {
        outcome.clear();
      } catch (const std::exception& e) {
        outcome = std::string("untyped error: ") + e.what();
      }
      if (outcome.empty())
        ++typed;
      else
        failures += "; " + cc.name + " " + outcome;
    }
    std::filesystem::remove(path);
    r.passed = typed == corpus.size() && corpus.size() >= 20;
    r.detail = std::to_string(typed) + "/" + std::to_string(corpus.size()) + " corrupted files raised typed errors" +
               failures;
  });
}

}  // namespace ebdoa::selftest
