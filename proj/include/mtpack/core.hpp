// Copyright 2026 The mtpack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTPACK_CORE_HPP_
#define MTPACK_CORE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mtpack {

using NodeId = int;
using LinkId = int;
using ArcId = int;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad scenario, bad parameters, violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// No feasible tree or allocation exists (e.g. unreachable receiver).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// An exact oracle was asked to enumerate an instance beyond its guard.
class ScaleExceededError : public Error {
 public:
  explicit ScaleExceededError(const std::string& what)
      : Error("oracle scale exceeded: " + what) {}
};

}  // namespace mtpack

#endif  // MTPACK_CORE_HPP_
