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

#ifndef LATKIT_DATASET_H_
#define LATKIT_DATASET_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latkit/numerics.h"
#include "latkit/vocab.h"

namespace latkit {

struct UtteranceRecord {
  std::string id;
  Matrix features;  // frames x feature_dim
  std::string transcript;
};

// Synthetic recognition task: each transcript token paints a one-hot pattern
// across a run of frames, plus optional Gaussian noise. The run opens with a
// double-amplitude onset frame followed by sustain frames, so repeated tokens
// stay separable from one long token without positional cues. The task is
// fully determined by the seed.
struct SynthTaskConfig {
  int alphabet_size = 8;
  int min_tokens = 2;
  int max_tokens = 6;
  int min_frames_per_token = 8;
  int max_frames_per_token = 8;
  double noise_level = 0.0;
  // When set, half the utterances draw token counts from the long range
  // [kLongFactor * min_tokens, kLongFactor * max_tokens].
  bool length_diverse = false;
  int feature_dim = 16;
  double frame_shift_ms = 10.0;
  uint64_t seed = 0;

  void Validate() const;  // throws ConfigError

  bool operator==(const SynthTaskConfig&) const = default;
};

inline constexpr int kLongFactor = 3;

// Single-letter pieces "a", "b", ... for the synthetic task.
std::vector<std::string> SynthAlphabet(int alphabet_size);
Vocabulary SynthVocabulary(const SynthTaskConfig& config);

std::vector<UtteranceRecord> GenerateSynthetic(const SynthTaskConfig& config,
                                               int count);

struct Dataset {
  std::vector<UtteranceRecord> records;
  double frame_shift_ms = 10.0;
};

// JSON-lines container: a header object on the first line, one record object
// per following line. With sidecar_blob the feature matrices live row-major
// float64 little-endian in "<path>.blob" and records carry offsets;
// otherwise features are inlined as JSON arrays. Writes are byte-identical
// for identical inputs.
void WriteDataset(const std::string& path, std::span<const UtteranceRecord> records,
                  double frame_shift_ms, bool sidecar_blob);
Dataset ReadDataset(const std::string& path);  // throws DataError

}  // namespace latkit

#endif  // LATKIT_DATASET_H_
