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

#include "latkit/dataset.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "latkit/error.h"

namespace latkit {
namespace {

using nlohmann::json;

std::string BlobPath(const std::string& path) { return path + ".blob"; }

void AppendLittleEndian(std::string* out, double value) {
  // Serialize explicitly little-endian so files are portable.
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(value));
  std::memcpy(&bits, &value, sizeof(bits));
  for (int i = 0; i < 8; ++i) {
    out->push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

double ReadLittleEndian(const std::string& data, size_t offset) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<uint64_t>(static_cast<unsigned char>(
                data[offset + static_cast<size_t>(i)]))
            << (8 * i);
  }
  double value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

std::string ReadWholeFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("dataset: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

void SynthTaskConfig::Validate() const {
  if (alphabet_size < 1 || alphabet_size > 26) {
    throw ConfigError("synth: alphabet_size must be in [1, 26]");
  }
  if (min_tokens < 1 || max_tokens < min_tokens) {
    throw ConfigError("synth: need 1 <= min_tokens <= max_tokens");
  }
  if (min_frames_per_token < 1 || max_frames_per_token < min_frames_per_token) {
    throw ConfigError("synth: need 1 <= min_frames_per_token <= max_frames_per_token");
  }
  if (noise_level < 0.0) throw ConfigError("synth: noise_level must be >= 0");
  if (feature_dim < alphabet_size) {
    throw ConfigError("synth: feature_dim must cover the alphabet");
  }
  if (frame_shift_ms <= 0.0) {
    throw ConfigError("synth: frame_shift_ms must be positive");
  }
}

std::vector<std::string> SynthAlphabet(int alphabet_size) {
  std::vector<std::string> pieces;
  pieces.reserve(static_cast<size_t>(alphabet_size));
  for (int i = 0; i < alphabet_size; ++i) {
    pieces.push_back(std::string(1, static_cast<char>('a' + i)));
  }
  return pieces;
}

Vocabulary SynthVocabulary(const SynthTaskConfig& config) {
  config.Validate();
  return Vocabulary::FromPieces(SynthAlphabet(config.alphabet_size));
}

std::vector<UtteranceRecord> GenerateSynthetic(const SynthTaskConfig& config,
                                               int count) {
  config.Validate();
  if (count < 0) throw ConfigError("synth: count must be >= 0");
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> letter(0, config.alphabet_size - 1);
  std::uniform_int_distribution<int> run(config.min_frames_per_token,
                                         config.max_frames_per_token);
  std::uniform_int_distribution<int> short_len(config.min_tokens,
                                               config.max_tokens);
  std::uniform_int_distribution<int> long_len(kLongFactor * config.min_tokens,
                                              kLongFactor * config.max_tokens);
  std::bernoulli_distribution pick_long(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<UtteranceRecord> records;
  records.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const bool go_long = config.length_diverse && pick_long(rng);
    const int num_tokens = go_long ? long_len(rng) : short_len(rng);
    std::string transcript;
    std::vector<int> letters(static_cast<size_t>(num_tokens));
    std::vector<int> runs(static_cast<size_t>(num_tokens));
    Eigen::Index total_frames = 0;
    for (int u = 0; u < num_tokens; ++u) {
      letters[static_cast<size_t>(u)] = letter(rng);
      runs[static_cast<size_t>(u)] = run(rng);
      total_frames += runs[static_cast<size_t>(u)];
      transcript.push_back(
          static_cast<char>('a' + letters[static_cast<size_t>(u)]));
    }
    Matrix features = Matrix::Zero(total_frames, config.feature_dim);
    Eigen::Index row = 0;
    for (int u = 0; u < num_tokens; ++u) {
      // Letters take evenly spread bins so coarse frequency pooling in a
      // frontend keeps them distinguishable.
      const Eigen::Index bin =
          static_cast<Eigen::Index>(letters[static_cast<size_t>(u)]) *
          config.feature_dim / config.alphabet_size;
      for (int f = 0; f < runs[static_cast<size_t>(u)]; ++f) {
        features(row++, bin) = f == 0 ? 16.0 : 4.0;  // onset, then sustain
      }
    }
    if (config.noise_level > 0.0) {
      for (Eigen::Index r = 0; r < features.rows(); ++r) {
        for (Eigen::Index c = 0; c < features.cols(); ++c) {
          features(r, c) += config.noise_level * noise(rng);
        }
      }
    }
    UtteranceRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "utt-%05d", i);
    rec.id = id;
    rec.features = std::move(features);
    rec.transcript = std::move(transcript);
    records.push_back(std::move(rec));
  }
  return records;
}

void WriteDataset(const std::string& path,
                  std::span<const UtteranceRecord> records,
                  double frame_shift_ms, bool sidecar_blob) {
  std::string blob;
  std::ostringstream lines;

  json header;
  header["latkit_dataset"] = 1;
  header["count"] = records.size();
  header["feature_dim"] =
      records.empty() ? 0 : static_cast<int>(records.front().features.cols());
  header["frame_shift_ms"] = frame_shift_ms;
  if (sidecar_blob) header["blob"] = BlobPath(path);
  lines << header.dump() << "\n";

  for (const UtteranceRecord& rec : records) {
    if (rec.features.cols() != records.front().features.cols()) {
      throw DataError("dataset: inconsistent feature_dim across records");
    }
    json line;
    line["id"] = rec.id;
    line["transcript"] = rec.transcript;
    line["frames"] = rec.features.rows();
    if (sidecar_blob) {
      line["offset"] = blob.size();
      for (Eigen::Index r = 0; r < rec.features.rows(); ++r) {
        for (Eigen::Index c = 0; c < rec.features.cols(); ++c) {
          AppendLittleEndian(&blob, rec.features(r, c));
        }
      }
    } else {
      json rows = json::array();
      for (Eigen::Index r = 0; r < rec.features.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < rec.features.cols(); ++c) {
          row.push_back(rec.features(r, c));
        }
        rows.push_back(std::move(row));
      }
      line["features"] = std::move(rows);
    }
    lines << line.dump() << "\n";
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("dataset: cannot write " + path);
  out << lines.str();
  if (sidecar_blob) {
    std::ofstream bout(BlobPath(path), std::ios::binary | std::ios::trunc);
    if (!bout) throw DataError("dataset: cannot write " + BlobPath(path));
    bout.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
}

Dataset ReadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset: empty file " + path);

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("dataset: bad header: ") + e.what());
  }
  if (!header.contains("latkit_dataset") || header["latkit_dataset"] != 1) {
    throw DataError("dataset: missing or unsupported format tag");
  }
  Dataset out;
  out.frame_shift_ms = header.value("frame_shift_ms", 10.0);
  const int feature_dim = header.value("feature_dim", 0);
  const size_t count = header.value("count", size_t{0});

  std::string blob;
  const bool has_blob = header.contains("blob");
  if (has_blob) blob = ReadWholeFile(header["blob"].get<std::string>());

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(std::string("dataset: bad record: ") + e.what());
    }
    UtteranceRecord utt;
    utt.id = rec.value("id", "");
    utt.transcript = rec.value("transcript", "");
    const Eigen::Index frames = rec.value("frames", Eigen::Index{0});
    utt.features = Matrix(frames, feature_dim);
    if (has_blob) {
      if (!rec.contains("offset")) {
        throw DataError("dataset: record missing blob offset");
      }
      const size_t offset = rec["offset"].get<size_t>();
      const size_t need =
          offset + static_cast<size_t>(frames) * feature_dim * 8;
      if (need > blob.size()) {
        throw DataError("dataset: blob truncated for record " + utt.id);
      }
      size_t pos = offset;
      for (Eigen::Index r = 0; r < frames; ++r) {
        for (Eigen::Index c = 0; c < feature_dim; ++c, pos += 8) {
          utt.features(r, c) = ReadLittleEndian(blob, pos);
        }
      }
    } else {
      if (!rec.contains("features")) {
        throw DataError("dataset: record missing inline features");
      }
      const json& rows = rec["features"];
      if (static_cast<Eigen::Index>(rows.size()) != frames) {
        throw DataError("dataset: frame count mismatch in record " + utt.id);
      }
      for (Eigen::Index r = 0; r < frames; ++r) {
        const json& row = rows[static_cast<size_t>(r)];
        if (static_cast<int>(row.size()) != feature_dim) {
          throw DataError("dataset: feature_dim mismatch in record " + utt.id);
        }
        for (Eigen::Index c = 0; c < feature_dim; ++c) {
          utt.features(r, c) = row[static_cast<size_t>(c)].get<double>();
        }
      }
    }
    out.records.push_back(std::move(utt));
  }
  if (out.records.size() != count) {
    throw DataError("dataset: record count does not match header");
  }
  return out;
}

}  // namespace latkit
