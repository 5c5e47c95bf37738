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

#ifndef LATKIT_CONFIG_H_
#define LATKIT_CONFIG_H_

#include <cstdint>
#include <string>

#include "latkit/dataset.h"
#include "latkit/encoder.h"

namespace latkit {

struct DecoderSettings {
  std::string kind = "greedy";  // greedy | prefix_beam | label_sync
  int beam = 8;
  int max_symbols_per_frame = 8;
  int expand_topk = 16;

  bool operator==(const DecoderSettings&) const = default;
};

struct FusionSettings {
  double alpha = 0.0;
  double beta = 0.0;
  std::string prior = "none";  // none | blank_downscale | model_unigram
  double blank_penalty = 0.0;
  std::string lm_path;

  bool operator==(const FusionSettings&) const = default;
};

struct TrainSettings {
  int steps = 200;
  double step_size = 0.5;
  int batch_size = 8;
  double holdout_fraction = 0.25;
  int pred_dim = 16;
  int joint_hidden = 32;

  bool operator==(const TrainSettings&) const = default;
};

struct LmSettings {
  int order = 2;
  double lambda = 0.8;  // interpolation weight toward the top order

  bool operator==(const LmSettings&) const = default;
};

struct PathSettings {
  std::string vocab;
  std::string dataset;
  std::string model;
  std::string lm;
  std::string out_dir = "out";

  bool operator==(const PathSettings&) const = default;
};

// One flat key=value file drives every verb. Keys use section prefixes
// (encoder.*, decoder.*, fusion.*, synth.*, train.*, paths.*); '#' starts a
// comment. The seed key is mandatory: there are no entropy defaults.
struct RunConfig {
  std::string model_kind = "ctc";  // ctc | rnnt
  int vocab_size = 64;
  uint64_t seed = 0;
  EncoderConfig encoder;
  DecoderSettings decoder;
  FusionSettings fusion;
  SynthTaskConfig synth;
  TrainSettings train;
  LmSettings lm;
  PathSettings paths;

  bool operator==(const RunConfig&) const = default;
};

// Parse/serialize satisfy ParseRunConfig(SerializeRunConfig(c)) == c.
// Unknown or duplicate keys and a missing seed throw ConfigError.
RunConfig ParseRunConfig(const std::string& text);
std::string SerializeRunConfig(const RunConfig& config);

RunConfig LoadRunConfig(const std::string& path);
void SaveRunConfig(const std::string& path, const RunConfig& config);

}  // namespace latkit

#endif  // LATKIT_CONFIG_H_
