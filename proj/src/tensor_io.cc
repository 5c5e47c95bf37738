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

#include "latkit/tensor_io.h"

#include <cstdint>
#include <fstream>

#include <nlohmann/json.hpp>

#include "latkit/error.h"

namespace latkit {

namespace {
constexpr char kMagic[4] = {'L', 'T', 'K', 'T'};
}

void TensorFile::Add(const std::string& name, const Matrix& value) {
  if (tensors_.count(name)) throw DataError("duplicate tensor: " + name);
  order_.push_back(name);
  tensors_[name] = value;
}

void TensorFile::Add(const std::string& name, const Vector& value) {
  Matrix m(value.size(), 1);
  m.col(0) = value;
  Add(name, m);
}

bool TensorFile::Has(const std::string& name) const {
  return tensors_.count(name) > 0;
}

const Matrix& TensorFile::Get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw DataError("missing tensor: " + name);
  return it->second;
}

Vector TensorFile::GetVector(const std::string& name) const {
  const Matrix& m = Get(name);
  if (m.cols() != 1) throw DataError("tensor " + name + " is not a vector");
  return m.col(0);
}

void TensorFile::SetMeta(const std::string& key, const std::string& value) {
  meta_[key] = value;
}

std::string TensorFile::GetMeta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw DataError("missing metadata key: " + key);
  return it->second;
}

bool TensorFile::HasMeta(const std::string& key) const {
  return meta_.count(key) > 0;
}

void TensorFile::Save(const std::string& path) const {
  nlohmann::json header;
  header["format"] = 1;
  header["meta"] = meta_;
  nlohmann::json list = nlohmann::json::array();
  uint64_t offset = 0;
  for (const std::string& name : order_) {
    const Matrix& m = tensors_.at(name);
    list.push_back({{"name", name},
                    {"rows", m.rows()},
                    {"cols", m.cols()},
                    {"offset", offset}});
    offset += static_cast<uint64_t>(m.size()) * sizeof(double);
  }
  header["tensors"] = list;
  const std::string json = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write parameter file: " + path);
  out.write(kMagic, 4);
  const uint32_t len = static_cast<uint32_t>(json.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(json.data(), json.size());
  std::vector<double> row;
  for (const std::string& name : order_) {
    const Matrix& m = tensors_.at(name);
    row.resize(m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
  }
  if (!out) throw DataError("short write to parameter file: " + path);
}

TensorFile TensorFile::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open parameter file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw DataError("bad magic in parameter file: " + path);
  }
  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string json(len, '\0');
  in.read(json.data(), len);
  if (!in) throw DataError("truncated header in parameter file: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad JSON header in " + path + ": " + e.what());
  }

  TensorFile f;
  if (header.contains("meta")) {
    for (auto& [k, v] : header["meta"].items()) {
      f.meta_[k] = v.get<std::string>();
    }
  }
  std::vector<double> row;
  for (const auto& t : header.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const Eigen::Index rows = t.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = t.at("cols").get<Eigen::Index>();
    Matrix m(rows, cols);
    row.resize(cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    if (!in) throw DataError("truncated payload in parameter file: " + path);
    f.order_.push_back(name);
    f.tensors_[name] = std::move(m);
  }
  return f;
}

}  // namespace latkit
