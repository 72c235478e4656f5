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

// Minimal RIFF/WAVE PCM16 reader and writer.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "ebdoa/errors.hpp"

namespace ebdoa {

inline constexpr int kRequiredSampleRate = 16000;

struct WavData {
  std::vector<double> samples;  // first channel, scaled to [-1, 1)
  int sample_rate = 0;
  int channels = 0;
};

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

/// Parse a PCM16 WAV image held in memory. Only the first channel is kept.
/// When required_rate is non-zero, any other sample rate is rejected.
inline WavData parse_wav(std::span<const unsigned char> bytes,
                         int required_rate = kRequiredSampleRate) {
  using detail::read_u16le;
  using detail::read_u32le;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("wav: missing RIFF/WAVE header");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32le(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      // Streams written with an unknown length often leave 0xFFFFFFFF here;
      // accept a truncated data chunk but nothing else.
      if (std::memcmp(chunk, "data", 4) != 0) throw FormatError("wav: chunk overruns file");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("wav: fmt chunk too short");
      format = read_u16le(bytes.data() + body);
      channels = read_u16le(bytes.data() + body + 2);
      rate = read_u32le(bytes.data() + body + 4);
      bits = read_u16le(bytes.data() + body + 14);
      if (format == 0xFFFE && size >= 40) format = read_u16le(bytes.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (format != 1 || bits != 16)
        throw FormatError("wav: unsupported encoding (format " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits); only PCM16 is supported");
      if (channels == 0) throw FormatError("wav: zero channels");
      if (required_rate != 0 && rate != static_cast<std::uint32_t>(required_rate))
        throw FormatError("wav: sample rate " + std::to_string(rate) + " Hz, required " +
                          std::to_string(required_rate) + " Hz");
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      const std::size_t frame_bytes = 2u * channels;
      const std::size_t frames = avail / frame_bytes;
      WavData out;
      out.sample_rate = static_cast<int>(rate);
      out.channels = channels;
      out.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16le(bytes.data() + body + i * frame_bytes));
        out.samples[i] = raw / 32768.0;
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError(have_fmt ? "wav: no data chunk" : "wav: no fmt chunk");
}

/// Read a PCM16 WAV file; the sample rate must equal required_rate (0 disables).
inline WavData read_wav(const std::filesystem::path& path, int required_rate = kRequiredSampleRate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("wav: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return parse_wav(bytes, required_rate);
}

/// Write mono PCM16. Samples are clipped to [-1, 1).
inline void write_wav(const std::filesystem::path& path, std::span<const double> samples,
                      int sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("wav: cannot write " + path.string());
  auto put32 = [&out](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put16 = [&out](std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
  };
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put32(36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(16);
  put16(1);
  put16(1);
  put32(static_cast<std::uint32_t>(sample_rate));
  put32(static_cast<std::uint32_t>(sample_rate) * 2);
  put16(2);
  put16(16);
  out.write("data", 4);
  put32(data_bytes);
  for (double s : samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 32767.0 / 32768.0) * 32768.0);
    put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  if (!out) throw FormatError("wav: write failed for " + path.string());
}

}  // namespace ebdoa
