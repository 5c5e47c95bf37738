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

#ifndef LATKIT_FUSION_H_
#define LATKIT_FUSION_H_

#include <span>
#include <vector>

#include "latkit/vocab.h"

namespace latkit {

// Incremental next-token scorer over the non-blank label space. Outputs are
// length num_labels() vectors indexed by label index (piece id - 1) and
// normalized; prefixes are piece-id sequences without blank or sos.
class LmScorer {
 public:
  virtual ~LmScorer() = default;
  virtual std::vector<double> NextLogProbs(
      std::span<const int> prefix) const = 0;

  // Telescoped sequence score: sum of incremental log probs.
  double Score(std::span<const int> tokens) const;
};

// Shallow-fusion knobs shared by both searches. The combined hypothesis
// score is acoustic - alpha * prior + beta * external, where "prior" is the
// per-token log prior for CTC and the internal-LM score for the transducer.
struct FusionConfig {
  double alpha = 0.0;
  double beta = 0.0;
  const LmScorer* external_lm = nullptr;  // beta term skipped when null
  // CTC only: length 1+|V| log prior from MakePrior. Slot 0 carries the
  // blank_downscale penalty (applied to blank emissions inside the search);
  // label slots feed the -alpha * prior term per emitted token. Empty means
  // no prior.
  std::vector<double> log_prior;
};

// Search result with score components kept apart for n-best reporting.
// combined = acoustic - alpha * prior + beta * external.
struct Hypothesis {
  TokenSequence tokens;
  double acoustic = 0.0;
  double prior = 0.0;
  double external = 0.0;
  double combined = 0.0;
};

// Shared deterministic tie rule: better combined score first; exact ties go
// to the lexicographically smaller token sequence (lower id, then shorter).
bool HypothesisBefore(const Hypothesis& a, const Hypothesis& b);

}  // namespace latkit

#endif  // LATKIT_FUSION_H_
