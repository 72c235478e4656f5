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

#include <stdexcept>
#include <string>

namespace ebdoa {

// Precondition violated by a caller-supplied value (bad angle, bad shape, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Model or dataset configuration that cannot be realised.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Model geometry disagrees with what the caller or the data expects.
class GeometryError : public ConfigError {
 public:
  explicit GeometryError(const std::string& what) : ConfigError(what) {}
};

// Room/T60 combination whose Sabine absorption falls outside (0, 1).
class InfeasibleRoomError : public DomainError {
 public:
  explicit InfeasibleRoomError(const std::string& what) : DomainError(what) {}
};

// Malformed, truncated or mismatched file content.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Factorisation failure or non-finite values during computation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ebdoa
