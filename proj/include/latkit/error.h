/* Copyright 2026 The Latkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LATKIT_ERROR_H_
#define LATKIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace latkit {

// Error categories map onto CLI exit codes: usage errors are handled by the
// argument parser (exit 1), the exceptions below exit with 2, 3 and 4.

// Malformed or inconsistent configuration (bad key, unparsable value,
// violated precondition on a config struct).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data (vocab/dataset/LM/parameter files, transcript with
// no valid tokenization, infeasible training pair).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (non-finite values where finite ones are required,
// diverging optimization).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace latkit

#endif  // LATKIT_ERROR_H_
