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

#ifndef LATKIT_LM_H_
#define LATKIT_LM_H_

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "latkit/fusion.h"
#include "latkit/vocab.h"

namespace latkit {

// Deterministic seeded interleaving of two token-sequence sources; each draw
// picks source a with probability `ratio` and cycles within the source.
class MixedCorpus {
 public:
  MixedCorpus(std::vector<TokenSequence> a, std::vector<TokenSequence> b,
              double ratio, uint64_t seed);

  const TokenSequence& Next();
  std::vector<TokenSequence> Draw(int count);
  double ratio() const { return ratio_; }

 private:
  std::vector<TokenSequence> a_, b_;
  double ratio_;
  std::mt19937_64 rng_;
  size_t next_a_ = 0, next_b_ = 0;
};

MixedCorpus MixCorpora(std::vector<TokenSequence> a,
                       std::vector<TokenSequence> b, double ratio,
                       uint64_t seed);

// Count-based n-gram with Jelinek-Mercer interpolation: at each order the
// maximum-likelihood estimate is mixed with the next-lower order by a fixed
// weight lambda, bottoming out at the uniform distribution over labels.
// Unseen contexts back off to the longest seen suffix. Contexts are
// sos-padded; probabilities are stored in log10 so serialization round
// trips bit-exactly, and are exposed in nats.
class NGramLm : public LmScorer {
 public:
  static NGramLm Train(std::span<const TokenSequence> corpus, int order,
                       int num_labels, double lambda = 0.8);
  static NGramLm Train(MixedCorpus& corpus, int draws, int order,
                       int num_labels, double lambda = 0.8);

  std::vector<double> NextLogProbs(std::span<const int> prefix) const override;

  std::string Serialize() const;
  static NGramLm Parse(const std::string& text);
  void Save(const std::string& path) const;
  static NGramLm Load(const std::string& path);

  int order() const { return order_; }
  int num_labels() const { return num_labels_; }
  double lambda() const { return lambda_; }

 private:
  NGramLm() = default;

  int order_ = 1;
  int num_labels_ = 0;
  double lambda_ = 0.8;
  // tables_[c]: rows of log10 next-token probabilities for each seen
  // context of length c.
  std::vector<std::map<TokenSequence, std::vector<double>>> tables_;
};

}  // namespace latkit

#endif  // LATKIT_LM_H_
