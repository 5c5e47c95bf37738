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

#ifndef LATKIT_TENSOR_IO_H_
#define LATKIT_TENSOR_IO_H_

#include <map>
#include <string>
#include <vector>

#include "latkit/numerics.h"

namespace latkit {

// Flat binary parameter container: 4-byte magic "LTKT", little-endian u32
// JSON header length, JSON header (tensor names, shapes, offsets, free-form
// string metadata), then the float64 payload in row-major order. All model
// parameters (encoder, heads, transducer) share this format.
class TensorFile {
 public:
  void Add(const std::string& name, const Matrix& value);
  void Add(const std::string& name, const Vector& value);

  bool Has(const std::string& name) const;
  const Matrix& Get(const std::string& name) const;  // DataError if missing
  Vector GetVector(const std::string& name) const;   // requires 1 column

  void SetMeta(const std::string& key, const std::string& value);
  std::string GetMeta(const std::string& key) const;  // DataError if missing
  bool HasMeta(const std::string& key) const;

  void Save(const std::string& path) const;
  static TensorFile Load(const std::string& path);

  const std::vector<std::string>& names() const { return order_; }

 private:
  std::vector<std::string> order_;
  std::map<std::string, Matrix> tensors_;
  std::map<std::string, std::string> meta_;
};

}  // namespace latkit

#endif  // LATKIT_TENSOR_IO_H_
