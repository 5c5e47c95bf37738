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

#ifndef LATKIT_TRANSDUCER_H_
#define LATKIT_TRANSDUCER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latkit/fusion.h"
#include "latkit/numerics.h"
#include "latkit/vocab.h"

namespace latkit {

// Last two non-blank labels, sos-padded. prev1 is y_{j-1}, prev2 is y_{j-2}.
struct PredContext {
  int prev1 = kSosId;
  int prev2 = kSosId;
};

// Context for the next emission after the given prefix.
PredContext ContextAt(std::span<const int> prefix);

// |V|^2 prediction network: two position-specific embedding tables combined
// by summation, so the output depends on exactly (y_{j-1}, y_{j-2}).
struct PredNetwork {
  Matrix embed_prev1;  // num_labels x pred_dim, label-indexed
  Matrix embed_prev2;

  int num_labels() const { return static_cast<int>(embed_prev1.rows()); }
  int dim() const { return static_cast<int>(embed_prev1.cols()); }
};

Vector PredFeatures(const PredNetwork& pred, PredContext ctx);

// HAT output head: blank Bernoulli plus a normalized label distribution.
// The emitted-symbol distribution {b, (1-b) * P_label(v)} sums to one.
struct HatDistribution {
  double log_blank = 0.0;      // log b
  double log_not_blank = 0.0;  // log(1 - b)
  std::vector<double> log_labels;  // length num_labels, label-indexed
};

HatDistribution HatFromLogits(double blank_logit,
                              std::span<const double> label_logits);

// Joint network: z = tanh(W_enc h_t + W_pred q + bias), blank logit
// w_blank . z + b_blank, label logits W_label z + b_label. The tanh joint
// is a documented stand-in; only the HAT factorization is contractual.
struct JointParams {
  Matrix w_enc;    // hidden x enc_dim
  Matrix w_pred;   // hidden x pred_dim
  Vector bias;     // hidden
  Vector w_blank;  // hidden
  double b_blank = 0.0;
  Matrix w_label;  // num_labels x hidden
  Vector b_label;  // num_labels
};

HatDistribution JointForward(const JointParams& joint, const Vector& enc_frame,
                             const Vector& pred_feat);

struct TransducerModel {
  PredNetwork pred;
  JointParams joint;

  int num_labels() const { return pred.num_labels(); }
};

TransducerModel InitTransducerModel(int num_labels, int enc_dim, int pred_dim,
                                    int hidden_dim, uint64_t seed);

void SaveTransducerModel(const std::string& path, const TransducerModel& m);
TransducerModel LoadTransducerModel(const std::string& path);

// Output lattice for one (utterance, target) pair. Distributions live at
// nodes (t, u) with t in [0, T), u in [0, U]; node (t, u) conditions on
// encoder frame t and the label prefix y_1..y_u. Alignment paths take label
// moves (t, u) -> (t, u+1) and blank moves (t, u) -> (t+1, u); every path
// ends with the mandatory blank move out of (T-1, U), giving length T+U
// with exactly T blanks.
struct RnntLattice {
  int frames = 0;      // T
  int target_len = 0;  // U
  std::vector<HatDistribution> nodes;  // index t * (U+1) + u

  const HatDistribution& at(int t, int u) const {
    return nodes[static_cast<size_t>(t) * (target_len + 1) + u];
  }
  HatDistribution& at(int t, int u) {
    return nodes[static_cast<size_t>(t) * (target_len + 1) + u];
  }
};

RnntLattice BuildLattice(const TransducerModel& model, const Matrix& enc,
                         std::span<const int> labels);

// -log P(y|x) by the forward recursion over the (T+1) x (U+1) alpha grid;
// label moves cannot occur once all T frames are consumed, so alpha(T, U) is
// reachable only through the final blank.
double RnntLoss(const RnntLattice& lattice, std::span<const int> labels);

// Gradients of -log P(y|x) with respect to the blank and label logits of
// every node, from forward-backward transition occupancies. Unreachable
// nodes get exact zeros.
struct HatNodeGrad {
  double blank_logit = 0.0;
  std::vector<double> label_logits;
};

std::vector<HatNodeGrad> RnntGrad(const RnntLattice& lattice,
                                  std::span<const int> labels);

// Internal LM: the joint with the encoder contribution zeroed, label
// distribution only. IlmScore telescopes IlmNextLogProbs so the ILM can be
// wrapped as an external LmScorer with bit-identical scores.
std::vector<double> IlmNextLogProbs(const TransducerModel& model,
                                    std::span<const int> prefix);
double IlmScore(const TransducerModel& model, std::span<const int> labels);

class IlmScorer : public LmScorer {
 public:
  explicit IlmScorer(const TransducerModel& model) : model_(model) {}
  std::vector<double> NextLogProbs(std::span<const int> prefix) const override {
    return IlmNextLogProbs(model_, prefix);
  }

 private:
  const TransducerModel& model_;
};

struct LabelSyncOptions {
  int beam = 8;
  // Caps hypothesis length at max_symbols_per_frame * T. The label-
  // synchronous scheme has no per-frame expansion loop, so the cap is
  // enforced as this equivalent global label budget.
  int max_symbols_per_frame = 8;
};

// Label-synchronous beam search with exact path merging: each prefix keeps
// its full frames-consumed mass vector, so a prefix's completion score is
// exactly log P(y|x). Fusion: combined = acoustic - alpha * ilm + beta *
// log P_EXT, applied during pruning as well as final ranking. Every label
// slot is proposable; reserved-symbol filtering happens at the text layer.
std::vector<Hypothesis> LabelSyncBeamSearch(const TransducerModel& model,
                                            const Matrix& enc,
                                            const LabelSyncOptions& options,
                                            const FusionConfig* fusion);

}  // namespace latkit

#endif  // LATKIT_TRANSDUCER_H_
