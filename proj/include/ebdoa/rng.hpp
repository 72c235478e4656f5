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

#pragma once

#include <cstdint>
#include <random>

namespace ebdoa {

using Rng = std::mt19937_64;

// SplitMix64 finaliser; decorrelates nearby seeds.
inline constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Per-item seed from a master seed and an item index.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) ^ (index * 0xD1B54A32D192ED03ull + 1));
}

}  // namespace ebdoa
