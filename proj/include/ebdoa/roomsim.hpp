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

// Shoebox image-source simulation with plane-wave HOA encoding.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ebdoa/errors.hpp"
#include "ebdoa/rng.hpp"
#include "ebdoa/sphharm.hpp"
#include "ebdoa/wav.hpp"

namespace ebdoa {

using Point3 = Eigen::Vector3d;

inline constexpr double kMinImageDistance = 0.1;  // metres

struct RoomSpec {
  Point3 dims{4.0, 5.0, 2.6};
  double t60 = 0.8;             // seconds
  double speed_of_sound = 343.0;

  double volume() const { return dims.prod(); }
  double surface() const {
    return 2.0 * (dims.x() * dims.y() + dims.x() * dims.z() + dims.y() * dims.z());
  }
  bool contains(const Point3& p) const {
    return (p.array() > 0.0).all() && (p.array() < dims.array()).all();
  }
};

/// Uniform wall reflection coefficient from Sabine's formula,
/// T60 = 0.161 V / (alpha S), beta = sqrt(1 - alpha).
inline double sabine_beta(const RoomSpec& room) {
  if (!((room.dims.array() > 0.0).all()))
    throw DomainError("RoomSpec: dimensions must be positive");
  if (!(room.t60 > 0.0)) throw DomainError("RoomSpec: t60 must be positive");
  if (!(room.speed_of_sound > 0.0)) throw DomainError("RoomSpec: speed of sound must be positive");
  if (std::isinf(room.t60)) return 1.0;
  const double alpha = 0.161 * room.volume() / (room.surface() * room.t60);
  if (!(alpha < 1.0))
    throw InfeasibleRoomError("room " + std::to_string(room.dims.x()) + "x" +
                              std::to_string(room.dims.y()) + "x" +
                              std::to_string(room.dims.z()) + " m cannot reach T60 " +
                              std::to_string(room.t60) + " s (Sabine alpha " +
                              std::to_string(alpha) + " >= 1)");
  return std::sqrt(1.0 - alpha);
}

struct ImageSource {
  Point3 position;
  int reflection_order = 0;
  double amplitude = 0.0;  // beta^order / distance
  double delay = 0.0;      // seconds
  Direction direction;     // bearing seen from the microphone
};

/// One localisation target. reflection_order is 0 for the direct path,
/// 1 for a first-order reflection and -1 when unknown (e.g. predictions).
struct DoaEntry {
  Direction dir;
  int source_id = -1;
  int reflection_order = -1;
};

using DoaSet = std::vector<DoaEntry>;

namespace detail {

// Image coordinate along one axis for lattice index i.
inline double image_coord(int i, double length, double s) {
  return i * length + ((i % 2 == 0) ? s : length - s);
}

// Visit every lattice image with |i| + |j| + |k| <= max_order whose distance
// to the microphone is at most max_distance. Order-by-order, so the direct
// source comes first.
template <class Visitor>
void for_each_image(const RoomSpec& room, const Point3& src, const Point3& mic, int max_order,
                    double max_distance, Visitor&& visit) {
  const double max2 = max_distance * max_distance;
  // |x_i - mic_x| >= (|i| - 1) * Lx, which bounds the index per axis.
  auto axis_limit = [&](double length) {
    if (!std::isfinite(max_distance)) return max_order;
    return std::min(max_order, static_cast<int>(std::ceil(max_distance / length)) + 1);
  };
  const int lim_x = axis_limit(room.dims.x());
  const int lim_y = axis_limit(room.dims.y());
  const int lim_z = axis_limit(room.dims.z());
  for (int order = 0; order <= max_order; ++order) {
    bool any_in_range = false;
    for (int i = -std::min(order, lim_x); i <= std::min(order, lim_x); ++i) {
      const double dx = image_coord(i, room.dims.x(), src.x()) - mic.x();
      const int rest = order - std::abs(i);
      for (int j = -std::min(rest, lim_y); j <= std::min(rest, lim_y); ++j) {
        const double dy = image_coord(j, room.dims.y(), src.y()) - mic.y();
        const int kabs = rest - std::abs(j);
        if (kabs > lim_z) continue;
        for (int k : {-kabs, kabs}) {
          const double dz = image_coord(k, room.dims.z(), src.z()) - mic.z();
          const double d2 = dx * dx + dy * dy + dz * dz;
          if (d2 <= max2) {
            any_in_range = true;
            visit(Point3{dx, dy, dz}, order);
          }
          if (kabs == 0) break;
        }
      }
    }
    // Every image of a higher order lies further out than some image of this order's shell.
    if (!any_in_range && std::isfinite(max_distance) && order > 0) break;
  }
}

}  // namespace detail

/// All images with total reflection count <= max_order, direct source first.
/// Along each axis image index i sits at i*L + (i even ? s : L - s) and
/// contributes |i| reflections.
inline std::vector<ImageSource> enumerate_images(const RoomSpec& room, const Point3& src,
                                                 const Point3& mic, int max_order) {
  const double beta = sabine_beta(room);
  if (!room.contains(src)) throw DomainError("enumerate_images: source outside room");
  if (!room.contains(mic)) throw DomainError("enumerate_images: microphone outside room");
  if ((src - mic).norm() == 0.0) throw DomainError("enumerate_images: source equals microphone");
  if (max_order < 0) throw DomainError("enumerate_images: negative image order");

  std::vector<ImageSource> images;
  detail::for_each_image(room, src, mic, max_order, std::numeric_limits<double>::infinity(),
                         [&](const Point3& offset, int order) {
                           ImageSource img;
                           img.position = mic + offset;
                           img.reflection_order = order;
                           const double d = std::max(offset.norm(), kMinImageDistance);
                           img.amplitude = std::pow(beta, order) / d;
                           img.delay = d / room.speed_of_sound;
                           img.direction = Direction::from_vector(offset);
                           images.push_back(img);
                         });
  return images;
}

/// Bearings of the direct path and the six first-order reflections.
inline DoaSet first_order_truth(const std::vector<ImageSource>& images, const Point3& mic,
                                int source_id = 0) {
  DoaSet truth;
  for (const auto& img : images) {
    if (img.reflection_order > 1) continue;
    truth.push_back({Direction::from_vector(img.position - mic), source_id, img.reflection_order});
  }
  std::stable_sort(truth.begin(), truth.end(), [](const DoaEntry& a, const DoaEntry& b) {
    return a.reflection_order < b.reflection_order;
  });
  return truth;
}

enum class SourceKind { SpeechLike, White, File };

struct SourceSpec {
  SourceKind kind = SourceKind::SpeechLike;
  std::filesystem::path file;  // used by SourceKind::File
};

namespace detail {

// RBJ low-pass biquad, direct form I.
struct Biquad {
  double b0, b1, b2, a1, a2;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  static Biquad lowpass(double cutoff, double fs, double q = std::numbers::sqrt2 / 2) {
    const double w = 2.0 * std::numbers::pi * cutoff / fs;
    const double alpha = std::sin(w) / (2.0 * q);
    const double cw = std::cos(w);
    const double a0 = 1.0 + alpha;
    return {(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0, -2.0 * cw / a0,
            (1.0 - alpha) / a0};
  }
  double operator()(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

inline void remove_mean(std::vector<double>& s) {
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  for (double& v : s) v -= mean;
}

// Bursts of low-passed noise mixed with a glottal-like pulse train under a
// syllable-rate envelope, separated by short pauses.
inline std::vector<double> speech_like(std::size_t length, double fs, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  Biquad tract = Biquad::lowpass(900.0, fs, 0.9);
  Biquad tract2 = Biquad::lowpass(1400.0, fs);
  std::vector<double> out(length, 0.0);

  std::size_t t = 0;
  // Start inside a syllable or a pause at random.
  bool voiced = uni(rng) < 0.7;
  while (t < length) {
    const double seconds = voiced ? 0.12 + 0.22 * uni(rng) : 0.04 + 0.16 * uni(rng);
    const auto seg = std::min<std::size_t>(length - t, static_cast<std::size_t>(seconds * fs) + 1);
    if (voiced) {
      const double pitch = 100.0 + 120.0 * uni(rng);
      const double gain = 0.5 + uni(rng);
      double phase = uni(rng);
      for (std::size_t k = 0; k < seg; ++k) {
        const double env = std::sin(std::numbers::pi * (k + 0.5) / static_cast<double>(seg));
        phase += pitch / fs;
        double pulse = 0.0;
        if (phase >= 1.0) {
          phase -= 1.0;
          pulse = 4.0;
        }
        const double exc = pulse + 0.6 * gauss(rng);
        out[t + k] = gain * env * tract2(tract(exc));
      }
    } else {
      for (std::size_t k = 0; k < seg; ++k) out[t + k] = tract2(tract(0.01 * gauss(rng)));
    }
    t += seg;
    voiced = !voiced;
  }
  return out;
}

}  // namespace detail

/// Deterministic source signal of `length` samples; zero mean, unit RMS for
/// the synthetic kinds.
inline std::vector<double> synth_source(const SourceSpec& spec, std::size_t length, double fs,
                                        std::uint64_t seed) {
  if (length == 0) throw DomainError("synth_source: length must be positive");
  if (!(fs > 0.0)) throw DomainError("synth_source: sample rate must be positive");
  Rng rng(seed);
  std::vector<double> s;
  switch (spec.kind) {
    case SourceKind::White: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      s.resize(length);
      for (double& v : s) v = gauss(rng);
      return s;
    }
    case SourceKind::SpeechLike:
      s = detail::speech_like(length, fs, rng);
      break;
    case SourceKind::File: {
      const WavData wav = read_wav(spec.file, static_cast<int>(fs));
      if (wav.samples.empty()) throw FormatError("wav: no samples in " + spec.file.string());
      std::uniform_int_distribution<std::size_t> start(0, wav.samples.size() - 1);
      std::size_t pos = wav.samples.size() > length ? start(rng) % (wav.samples.size() - length + 1)
                                                    : 0;
      s.resize(length);
      for (std::size_t i = 0; i < length; ++i) s[i] = wav.samples[(pos + i) % wav.samples.size()];
      detail::remove_mean(s);
      return s;
    }
  }
  detail::remove_mean(s);
  const double rms = std::sqrt(std::inner_product(s.begin(), s.end(), s.begin(), 0.0) /
                               static_cast<double>(s.size()));
  if (rms > 0.0)
    for (double& v : s) v /= rms;
  return s;
}

/// Time-domain HOA block: (order+1)^2 channels x L samples.
struct HoaFrame {
  int order = 0;
  double sample_rate = 16000.0;
  Eigen::MatrixXd samples;

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }

  void validate() const {
    if (samples.rows() != channel_count(order))
      throw DomainError("HoaFrame: expected " + std::to_string(channel_count(order)) +
                        " channels, got " + std::to_string(samples.rows()));
    if (samples.cols() <= 0) throw DomainError("HoaFrame: empty frame");
  }

  /// Trailing `count` samples as a new frame.
  HoaFrame tail(Eigen::Index count) const {
    return {order, sample_rate, samples.rightCols(std::min(count, samples.cols()))};
  }
};

/// Plane-wave superposition: channel c carries
/// sum_i amplitude_i * s(t - delay_i) * Y_c(direction_i); fractional delays
/// use two-tap linear interpolation and samples before t = 0 are silent.
inline HoaFrame encode_hoa(const std::vector<ImageSource>& images, std::span<const double> signal,
                           int order, double fs) {
  if (images.empty()) throw DomainError("encode_hoa: no image sources");
  if (!(fs > 0.0)) throw DomainError("encode_hoa: sample rate must be positive");
  if (signal.empty()) throw DomainError("encode_hoa: empty signal");
  const auto length = static_cast<Eigen::Index>(signal.size());
  HoaFrame frame{order, fs, Eigen::MatrixXd::Zero(channel_count(order), length)};
  Eigen::RowVectorXd delayed(length);
  for (const auto& img : images) {
    const double shift = img.delay * fs;
    const auto whole = static_cast<Eigen::Index>(std::floor(shift));
    const double frac = shift - static_cast<double>(whole);
    for (Eigen::Index t = 0; t < length; ++t) {
      const Eigen::Index a = t - whole;
      const double s0 = (a >= 0 && a < length) ? signal[static_cast<std::size_t>(a)] : 0.0;
      const double s1 = (a - 1 >= 0 && a - 1 < length) ? signal[static_cast<std::size_t>(a - 1)] : 0.0;
      delayed(t) = img.amplitude * ((1.0 - frac) * s0 + frac * s1);
    }
    frame.samples.noalias() += manifold_vector(img.direction, order) * delayed;
  }
  return frame;
}

/// Arrival energy per sample (sum of squared image amplitudes), the
/// incoherent counterpart of room_impulse_response. Co-incident image
/// arrivals add in energy rather than amplitude, which is what a band-passed
/// measurement sees.
inline std::vector<double> room_energy_response(const RoomSpec& room, const Point3& src,
                                                const Point3& mic, int max_order, double fs,
                                                std::size_t length) {
  const double beta = sabine_beta(room);
  if (!room.contains(src) || !room.contains(mic))
    throw DomainError("room_energy_response: source and microphone must be inside the room");
  const double horizon = static_cast<double>(length) / fs * room.speed_of_sound;
  std::vector<double> e(length, 0.0);
  std::vector<double> gain(static_cast<std::size_t>(max_order) + 1, 1.0);
  for (std::size_t n = 1; n < gain.size(); ++n) gain[n] = gain[n - 1] * beta * beta;
  detail::for_each_image(room, src, mic, max_order, horizon, [&](const Point3& offset, int order) {
    const double d = std::max(offset.norm(), kMinImageDistance);
    const auto bin = static_cast<std::size_t>(d / room.speed_of_sound * fs);
    if (bin < length) e[bin] += gain[static_cast<std::size_t>(order)] / (d * d);
  });
  return e;
}

/// Schroeder backward-integrated decay curve in dB (0 dB at t = 0) of an
/// energy response (squared impulse response samples).
inline std::vector<double> schroeder_decay_db(std::span<const double> energy) {
  std::vector<double> edc(energy.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = energy.size(); i-- > 0;) {
    acc += energy[i];
    edc[i] = acc;
  }
  const double total = edc.empty() ? 0.0 : edc.front();
  for (double& v : edc) v = (v > 0.0 && total > 0.0) ? 10.0 * std::log10(v / total) : -400.0;
  return edc;
}

/// T60 from a least-squares line through the Schroeder curve between
/// `upper_db` and `lower_db`, extrapolated to 60 dB.
inline double schroeder_t60(std::span<const double> energy, double fs, double upper_db = -5.0,
                            double lower_db = -25.0) {
  const auto edc = schroeder_decay_db(energy);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    if (edc[i] > upper_db || edc[i] < lower_db) continue;
    const double t = static_cast<double>(i) / fs;
    sx += t;
    sy += edc[i];
    sxx += t * t;
    sxy += t * edc[i];
    ++n;
  }
  if (n < 2) throw NumericalError("schroeder_t60: decay range not covered by the response");
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  const double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;  // dB per second
  if (!(slope < 0.0)) throw NumericalError("schroeder_t60: non-decaying energy curve");
  return -60.0 / slope;
}

}  // namespace ebdoa
