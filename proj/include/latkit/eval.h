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

#ifndef LATKIT_EVAL_H_
#define LATKIT_EVAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latkit/dataset.h"
#include "latkit/encoder.h"
#include "latkit/vocab.h"

namespace latkit {

struct WerBreakdown {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int reference_length = 0;
  double rate = 0.0;  // (S + I + D) / reference_length

  int errors() const { return substitutions + insertions + deletions; }
};

std::vector<std::string> SplitWords(const std::string& text);

// Unit-cost Levenshtein alignment. Ties in the backtrace prefer
// substitution over deletion over insertion, which makes the component
// counts deterministic. Throws DataError on an empty reference.
WerBreakdown Wer(std::span<const std::string> reference,
                 std::span<const std::string> hypothesis);

// Plain token-id edit distance, used for token accuracy in training evals.
int EditDistance(std::span<const int> a, std::span<const int> b);

// One row of the frame-rate sweep, mirroring the report tables.
struct BenchRecord {
  double frame_rate_ms = 0.0;
  std::string factors;     // pooling strides like "2x2"; "none" without
  int start_layer = -1;    // first pooling layer, -1 without pooling
  double wall_ms_per_utt = 0.0;  // median over repetitions
  double modeled_mflops = 0.0;   // encoder cost model, in millions
  double wer = 0.0;              // corpus WER on the split

  bool operator==(const BenchRecord&) const = default;
};

struct BenchOptions {
  int repetitions = 3;      // timed repetitions after one discarded warm-up
  uint64_t head_seed = 1;   // CTC head used for greedy decoding
  int cost_input_frames = 256;  // T_in for the modeled cost column
};

// Encodes and greedy-decodes the split once per repetition for every config,
// recording median wall time, the modeled encoder cost, and WER against the
// record transcripts. Records come back sorted by frame rate. Timing runs
// single-threaded so wall times stay comparable.
std::vector<BenchRecord> RunBench(std::span<const EncoderConfig> sweep,
                                  std::span<const UtteranceRecord> records,
                                  const Vocabulary& vocab,
                                  const BenchOptions& options);

// Aligned plain-text table; header only for empty input.
std::string RenderTable(std::span<const BenchRecord> records);

// Machine-readable form with a header row. FromCsv(ToCsv(r)) == r exactly;
// numeric fields are serialized with full precision.
std::string ToCsv(std::span<const BenchRecord> records);
std::vector<BenchRecord> FromCsv(const std::string& text);  // throws DataError

}  // namespace latkit

#endif  // LATKIT_EVAL_H_
