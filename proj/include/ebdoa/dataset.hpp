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

// Simulated dataset generation, covariance features and the binary record
// format.
//
// Dataset file layout (all integers and floats little-endian):
//   magic "EBDOA1" | version u16 | record count u64
//   per record:
//     feature f32[625] | label f32[7200] | source count u8 | truth count u16
//     truth entries (azimuth f32, elevation f32, source id u8)
//     t60 f32 | room dims f32[3] | mic f32[3] | source positions f32[3] each
// Within each source id the first truth entry is the direct path and the
// rest are first-order reflections.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ebdoa/ebdsp.hpp"
#include "ebdoa/errors.hpp"
#include "ebdoa/rng.hpp"
#include "ebdoa/roomsim.hpp"
#include "ebdoa/sps.hpp"

namespace ebdoa {

inline constexpr int kDatasetOrder = 4;
inline constexpr std::size_t kFeatureSize = 625;  // (4 + 1)^4
inline constexpr std::size_t kLabelSize = 7200;   // 60 x 120
inline constexpr char kDatasetMagic[6] = {'E', 'B', 'D', 'O', 'A', '1'};
inline constexpr std::uint16_t kDatasetVersion = 1;

using Vec3f = std::array<float, 3>;

struct DatasetRecord {
  std::vector<float> feature;  // trace-normalised flattened covariance
  std::vector<float> label;    // Gaussian label map, row-major 60 x 120
  int source_count = 0;
  DoaSet truth;                // direct + first-order entries per source
  float t60 = 0.0f;
  Vec3f room{};
  Vec3f mic{};
  std::vector<Vec3f> sources;

  friend bool operator==(const DatasetRecord& a, const DatasetRecord& b) {
    if (a.truth.size() != b.truth.size()) return false;
    for (std::size_t i = 0; i < a.truth.size(); ++i) {
      const auto& x = a.truth[i];
      const auto& y = b.truth[i];
      if (!(x.dir == y.dir) || x.source_id != y.source_id || x.reflection_order != y.reflection_order)
        return false;
    }
    return a.feature == b.feature && a.label == b.label && a.source_count == b.source_count &&
           a.t60 == b.t60 && a.room == b.room && a.mic == b.mic && a.sources == b.sources;
  }
};

// ---------------------------------------------------------------------------
// Features

/// Row-major flatten of cov / trace(cov).
inline Eigen::VectorXd featurize(const CovarianceMatrix& cov) {
  const double tr = cov.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) throw DomainError("featurize: covariance trace must be positive");
  const Eigen::Index m = cov.dim();
  Eigen::VectorXd f(m * m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) f(r * m + c) = cov.values(r, c) / tr;
  return f;
}

/// Inverse of featurize up to the lost scale (trace 1).
inline CovarianceMatrix unfeaturize(std::span<const float> feature) {
  const auto m = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(feature.size()))));
  if (static_cast<std::size_t>(m * m) != feature.size() || m == 0)
    throw DomainError("unfeaturize: feature length is not a square");
  const auto order = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m)))) - 1;
  if (channel_count(order) != m) throw DomainError("unfeaturize: channel count is not (N+1)^2");
  CovarianceMatrix cov{order, Eigen::MatrixXd(m, m)};
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c)
      cov.values(r, c) = feature[static_cast<std::size_t>(r * m + c)];
  return cov;
}

// ---------------------------------------------------------------------------
// Generation

struct GenConfig {
  std::size_t count = 100;
  int min_sources = 1;
  int max_sources = 2;
  double t60_min = 0.3, t60_max = 1.0;
  Point3 room_min{3.0, 3.0, 2.0};
  Point3 room_max{10.0, 10.0, 4.0};
  double sample_rate = 16000.0;
  std::size_t frame_length = 5000;
  int hoa_order = kDatasetOrder;
  int image_order = 4;
  SourceSpec source;
  std::uint64_t master_seed = 0;
  double wall_margin = 0.5;     // metres
  double min_separation = 1.0;  // metres, between any two of mic and sources
  double label_variance = kDefaultLabelVariance;
  unsigned threads = 1;

  void validate() const {
    if (min_sources < 1 || max_sources < min_sources || max_sources > 255)
      throw ConfigError("GenConfig: need 1 <= min_sources <= max_sources <= 255");
    if (!(t60_min > 0.0) || !(t60_max >= t60_min)) throw ConfigError("GenConfig: bad t60 range");
    if (!((room_min.array() > 0.0).all()) || !((room_max.array() >= room_min.array()).all()))
      throw ConfigError("GenConfig: bad room range");
    if (!((room_min.array() > 2.0 * wall_margin).all()))
      throw ConfigError("GenConfig: smallest room leaves no space inside the wall margin");
    if (!(sample_rate > 0.0)) throw ConfigError("GenConfig: sample rate must be positive");
    if (frame_length == 0) throw ConfigError("GenConfig: frame length must be positive");
    if (hoa_order != kDatasetOrder)
      throw ConfigError("GenConfig: the dataset format stores order-4 features, got order " +
                        std::to_string(hoa_order));
    if (image_order < 1) throw ConfigError("GenConfig: image order must be >= 1 to label reflections");
    if (wall_margin < 0.0 || min_separation < 0.0) throw ConfigError("GenConfig: negative spacing");
    if (!(label_variance > 0.0)) throw ConfigError("GenConfig: label variance must be positive");
  }
};

namespace detail {

inline Vec3f to_vec3f(const Point3& p) {
  return {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())};
}

inline Point3 uniform_point(Rng& rng, const Point3& lo, const Point3& hi) {
  Point3 p;
  for (int i = 0; i < 3; ++i) p(i) = std::uniform_real_distribution<double>(lo(i), hi(i))(rng);
  return p;
}

inline bool silent_frame(std::span<const double> signal, std::size_t frame_length) {
  double peak = 0.0;
  for (double v : signal) peak = std::max(peak, std::abs(v));
  const auto frame = signal.subspan(signal.size() - frame_length);
  double energy = 0.0;
  for (double v : frame) energy += v * v;
  return energy < 1e-6 * peak * peak * static_cast<double>(frame_length);
}

}  // namespace detail

/// Seed of record `index`; records are independent of each other.
inline std::uint64_t record_seed(const GenConfig& cfg, std::size_t index) {
  return derive_seed(cfg.master_seed, index);
}

/// Simulate one record: random room, T60 and placement, image-source HOA
/// rendering of every source, covariance feature over the last
/// frame_length samples and the Gaussian label of all direct and
/// first-order arrivals.
inline DatasetRecord generate_record(const GenConfig& cfg, std::size_t index) {
  constexpr int kMaxAttempts = 100;
  constexpr int kMaxPlacements = 1000;
  constexpr int kMaxSignalDraws = 20;
  Rng rng(record_seed(cfg, index));
  std::uniform_real_distribution<double> t60_dist(cfg.t60_min, cfg.t60_max);
  std::uniform_int_distribution<int> count_dist(cfg.min_sources, cfg.max_sources);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RoomSpec room;
    room.dims = detail::uniform_point(rng, cfg.room_min, cfg.room_max);
    room.t60 = t60_dist(rng);
    // Store at file precision so a re-read record describes the same room.
    room.t60 = static_cast<float>(room.t60);
    for (int i = 0; i < 3; ++i) room.dims(i) = static_cast<float>(room.dims(i));
    try {
      sabine_beta(room);
    } catch (const InfeasibleRoomError&) {
      continue;
    }
    const int sources = count_dist(rng);
    const Point3 lo = Point3::Constant(cfg.wall_margin);
    const Point3 hi = room.dims - lo;

    std::vector<Point3> points;  // mic first
    for (int tries = 0; tries < kMaxPlacements && static_cast<int>(points.size()) < sources + 1; ++tries) {
      Point3 p = detail::uniform_point(rng, lo, hi);
      for (int i = 0; i < 3; ++i) p(i) = static_cast<float>(p(i));
      const bool spaced = std::all_of(points.begin(), points.end(), [&](const Point3& q) {
        return (p - q).norm() >= cfg.min_separation;
      });
      if (spaced) points.push_back(p);
    }
    if (static_cast<int>(points.size()) != sources + 1) continue;
    const Point3 mic = points[0];

    DatasetRecord rec;
    rec.source_count = sources;
    rec.t60 = static_cast<float>(room.t60);
    rec.room = detail::to_vec3f(room.dims);
    rec.mic = detail::to_vec3f(mic);
    const auto length = static_cast<Eigen::Index>(cfg.frame_length);
    HoaFrame frame{cfg.hoa_order, cfg.sample_rate,
                   Eigen::MatrixXd::Zero(channel_count(cfg.hoa_order), length)};
    bool ok = true;
    for (int s = 0; s < sources && ok; ++s) {
      const Point3& src = points[static_cast<std::size_t>(s) + 1];
      const auto images = enumerate_images(room, src, mic, cfg.image_order);
      double max_delay = 0.0;
      for (const auto& img : images) max_delay = std::max(max_delay, img.delay);
      const auto preroll = static_cast<std::size_t>(std::ceil(max_delay * cfg.sample_rate)) + 2;
      std::vector<double> signal;
      ok = false;
      for (int draw = 0; draw < kMaxSignalDraws; ++draw) {
        const std::uint64_t sub = derive_seed(record_seed(cfg, index),
                                              static_cast<std::uint64_t>(attempt) * 4096u +
                                                  static_cast<std::uint64_t>(s) * 64u +
                                                  static_cast<std::uint64_t>(draw));
        signal = synth_source(cfg.source, preroll + cfg.frame_length, cfg.sample_rate, sub);
        if (!detail::silent_frame(signal, cfg.frame_length)) {
          ok = true;
          break;
        }
      }
      if (!ok) break;
      frame.samples += encode_hoa(images, signal, cfg.hoa_order, cfg.sample_rate).tail(length).samples;
      for (DoaEntry e : first_order_truth(images, mic, s)) {
        // Round to file precision.
        e.dir = Direction(static_cast<float>(e.dir.azimuth()), static_cast<float>(e.dir.elevation()));
        rec.truth.push_back(e);
      }
      rec.sources.push_back(detail::to_vec3f(src));
    }
    if (!ok) continue;

    const Eigen::VectorXd feature = featurize(time_cov(frame));
    rec.feature.resize(static_cast<std::size_t>(feature.size()));
    for (Eigen::Index i = 0; i < feature.size(); ++i)
      rec.feature[static_cast<std::size_t>(i)] = static_cast<float>(feature(i));
    const SpsGrid label = gaussian_label(rec.truth, GridSpec{}, cfg.label_variance);
    rec.label.resize(label.values.size());
    for (std::size_t i = 0; i < label.values.size(); ++i)
      rec.label[i] = static_cast<float>(label.values[i]);
    return rec;
  }
  throw ConfigError("generate_record: no feasible room/placement after " +
                    std::to_string(kMaxAttempts) + " attempts for record " + std::to_string(index));
}

/// Records [0, cfg.count). With cfg.threads > 1 records are produced
/// concurrently; the output is identical to serial generation.
inline std::vector<DatasetRecord> generate_dataset(
    const GenConfig& cfg, const std::function<void(std::size_t)>& progress = {}) {
  cfg.validate();
  std::vector<DatasetRecord> records(cfg.count);
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.count; ++i) {
      records[i] = generate_record(cfg, i);
      if (progress) progress(i + 1);
    }
    return records;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < cfg.count; i += workers) records[i] = generate_record(cfg, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  if (progress) progress(cfg.count);
  return records;
}

// ---------------------------------------------------------------------------
// Binary format

namespace detail {

class ByteSink {
 public:
  explicit ByteSink(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class ByteSource {
 public:
  ByteSource(std::istream& in, std::string context) : in_(in), context_(std::move(context)) {}
  void read(char* p, std::size_t n, const char* what) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw FormatError(context_ + ": truncated while reading " + what);
  }
  std::uint8_t u8(const char* what) {
    char c;
    read(&c, 1, what);
    return static_cast<std::uint8_t>(c);
  }
  std::uint16_t u16(const char* what) {
    unsigned char b[2];
    read(reinterpret_cast<char*>(b), 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    read(reinterpret_cast<char*>(b), 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64(const char* what) {
    unsigned char b[8];
    read(reinterpret_cast<char*>(b), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }
  const std::string& context() const { return context_; }

 private:
  std::istream& in_;
  std::string context_;
};

inline void write_record(ByteSink& out, const DatasetRecord& rec) {
  if (rec.feature.size() != kFeatureSize || rec.label.size() != kLabelSize)
    throw DomainError("write_record: feature/label sizes must be 625/7200");
  if (rec.source_count < 0 || rec.source_count > 255 || rec.truth.size() > 65535 ||
      rec.sources.size() != static_cast<std::size_t>(rec.source_count))
    throw DomainError("write_record: inconsistent source bookkeeping");
  for (float v : rec.feature) out.f32(v);
  for (float v : rec.label) out.f32(v);
  out.u8(static_cast<std::uint8_t>(rec.source_count));
  out.u16(static_cast<std::uint16_t>(rec.truth.size()));
  for (const auto& t : rec.truth) {
    if (t.source_id < 0 || t.source_id > 255) throw DomainError("write_record: bad source id");
    out.f32(static_cast<float>(t.dir.azimuth()));
    out.f32(static_cast<float>(t.dir.elevation()));
    out.u8(static_cast<std::uint8_t>(t.source_id));
  }
  out.f32(rec.t60);
  for (float v : rec.room) out.f32(v);
  for (float v : rec.mic) out.f32(v);
  for (const auto& s : rec.sources)
    for (float v : s) out.f32(v);
}

inline DatasetRecord read_record(ByteSource& in, std::uint64_t index) {
  const std::string where = in.context() + " record " + std::to_string(index);
  DatasetRecord rec;
  rec.feature.resize(kFeatureSize);
  for (float& v : rec.feature) {
    v = in.f32("feature");
    if (!std::isfinite(v)) throw FormatError(where + ": non-finite feature value");
  }
  rec.label.resize(kLabelSize);
  for (float& v : rec.label) {
    v = in.f32("label");
    if (!(v >= 0.0f && v <= 1.0f)) throw FormatError(where + ": label value outside [0, 1]");
  }
  rec.source_count = in.u8("source count");
  const std::uint16_t truths = in.u16("truth count");
  std::vector<bool> seen(256, false);
  for (std::uint16_t i = 0; i < truths; ++i) {
    const float az = in.f32("truth azimuth");
    const float el = in.f32("truth elevation");
    const std::uint8_t id = in.u8("truth source id");
    if (!(az >= -180.0f && az < 180.0f) || !(el >= -90.0f && el <= 90.0f))
      throw FormatError(where + ": truth direction out of range");
    if (id >= rec.source_count) throw FormatError(where + ": truth source id exceeds source count");
    rec.truth.push_back({Direction(az, el), id, seen[id] ? 1 : 0});
    seen[id] = true;
  }
  rec.t60 = in.f32("t60");
  if (!(rec.t60 > 0.0f) || !std::isfinite(rec.t60)) throw FormatError(where + ": t60 must be positive");
  for (float& v : rec.room) {
    v = in.f32("room dims");
    if (!(v > 0.0f) || !std::isfinite(v)) throw FormatError(where + ": room dims must be positive");
  }
  for (float& v : rec.mic) {
    v = in.f32("mic position");
    if (!std::isfinite(v)) throw FormatError(where + ": non-finite mic position");
  }
  rec.sources.resize(static_cast<std::size_t>(rec.source_count));
  for (auto& s : rec.sources)
    for (float& v : s) {
      v = in.f32("source position");
      if (!std::isfinite(v)) throw FormatError(where + ": non-finite source position");
    }
  return rec;
}

}  // namespace detail

/// Streaming writer; the record count in the header is patched on close().
class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc), sink_(out_) {
    if (!out_) throw FormatError("cannot open " + path.string() + " for writing");
    sink_.bytes(kDatasetMagic, sizeof(kDatasetMagic));
    sink_.u16(kDatasetVersion);
    sink_.u64(0);
  }
  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;
  ~RecordWriter() {
    try {
      close();
    } catch (...) {
    }
  }

  void write(const DatasetRecord& rec) {
    detail::write_record(sink_, rec);
    ++count_;
  }

  void close() {
    if (!out_.is_open()) return;
    out_.seekp(sizeof(kDatasetMagic) + 2);
    sink_.u64(count_);
    out_.close();
    if (out_.fail()) throw FormatError("failed writing " + path_.string());
  }

  std::uint64_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  detail::ByteSink sink_;
  std::uint64_t count_ = 0;
};

/// Streaming reader: validates the header on open and yields one record at a time.
class RecordReader {
 public:
  explicit RecordReader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), source_(in_, path.string()) {
    if (!in_) throw FormatError("cannot open dataset " + path.string());
    char magic[sizeof(kDatasetMagic)];
    source_.read(magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0)
      throw FormatError(path.string() + ": bad magic, not an EBDOA1 dataset");
    const std::uint16_t version = source_.u16("version");
    if (version != kDatasetVersion)
      throw FormatError(path.string() + ": unsupported dataset version " + std::to_string(version));
    count_ = source_.u64("record count");
  }

  std::uint64_t count() const { return count_; }
  std::uint64_t position() const { return next_; }

  std::optional<DatasetRecord> next() {
    if (next_ >= count_) {
      if (!source_.at_end()) throw FormatError(source_.context() + ": trailing bytes after last record");
      return std::nullopt;
    }
    DatasetRecord rec = detail::read_record(source_, next_);
    ++next_;
    return rec;
  }

 private:
  std::ifstream in_;
  detail::ByteSource source_;
  std::uint64_t count_ = 0;
  std::uint64_t next_ = 0;
};

inline void write_records(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  RecordWriter writer(path);
  for (const auto& r : records) writer.write(r);
  writer.close();
}

inline std::vector<DatasetRecord> read_records(const std::filesystem::path& path) {
  RecordReader reader(path);
  std::vector<DatasetRecord> out;
  // The header count is untrusted; grow as records actually arrive.
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

/// Bytes used by one record in the dataset file.
inline std::size_t record_size_bytes(std::size_t sources, std::size_t truths) {
  return 4 * (kFeatureSize + kLabelSize) + 1 + 2 + truths * 9 + 4 + 12 + 12 + sources * 12;
}
inline constexpr std::size_t kDatasetHeaderBytes = sizeof(kDatasetMagic) + 2 + 8;

// ---------------------------------------------------------------------------
// Split

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of indices [0, count) then a train/test partition with
/// round(count * train_fraction) training items.
inline DatasetSplit split(std::size_t count, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DomainError("split: train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(count) * train_fraction));
  return {std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train)),
          std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end())};
}

template <class Record>
std::pair<std::vector<Record>, std::vector<Record>> split(std::span<const Record> records,
                                                          double train_fraction, std::uint64_t seed) {
  const DatasetSplit s = split(records.size(), train_fraction, seed);
  std::pair<std::vector<Record>, std::vector<Record>> out;
  for (std::size_t i : s.train) out.first.push_back(records[i]);
  for (std::size_t i : s.test) out.second.push_back(records[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string source_kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::SpeechLike: return "speech-like";
    case SourceKind::White: return "white";
    case SourceKind::File: return "file";
  }
  return "unknown";
}

inline SourceKind parse_source_kind(const std::string& s) {
  if (s == "speech-like") return SourceKind::SpeechLike;
  if (s == "white") return SourceKind::White;
  if (s == "file") return SourceKind::File;
  throw ConfigError("unknown source kind '" + s + "' (expected speech-like, white or file)");
}

/// Text echo of the generation settings written next to a dataset file.
inline std::string manifest_text(const GenConfig& cfg, std::uint64_t records) {
  std::ostringstream os;
  os.precision(17);
  os << "format = EBDOA1\n"
     << "version = " << kDatasetVersion << "\n"
     << "records = " << records << "\n"
     << "master_seed = " << cfg.master_seed << "\n"
     << "record_seed = derive_seed(master_seed, index)\n"
     << "sources = " << cfg.min_sources << ".." << cfg.max_sources << "\n"
     << "t60 = " << cfg.t60_min << ".." << cfg.t60_max << "\n"
     << "room_min = " << cfg.room_min.x() << "," << cfg.room_min.y() << "," << cfg.room_min.z() << "\n"
     << "room_max = " << cfg.room_max.x() << "," << cfg.room_max.y() << "," << cfg.room_max.z() << "\n"
     << "sample_rate = " << cfg.sample_rate << "\n"
     << "frame_length = " << cfg.frame_length << "\n"
     << "hoa_order = " << cfg.hoa_order << "\n"
     << "image_order = " << cfg.image_order << "\n"
     << "source_kind = " << source_kind_name(cfg.source.kind) << "\n";
  if (cfg.source.kind == SourceKind::File) os << "source_file = " << cfg.source.file.string() << "\n";
  os << "wall_margin = " << cfg.wall_margin << "\n"
     << "min_separation = " << cfg.min_separation << "\n"
     << "label_variance = " << cfg.label_variance << "\n";
  return os.str();
}

}  // namespace ebdoa
