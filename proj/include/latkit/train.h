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

#ifndef LATKIT_TRAIN_H_
#define LATKIT_TRAIN_H_

#include <cstdint>
#include <span>
#include <vector>

#include "latkit/ctc.h"
#include "latkit/dataset.h"
#include "latkit/encoder.h"
#include "latkit/transducer.h"
#include "latkit/vocab.h"

namespace latkit {

enum class LossKind { kCtc, kRnnt };

struct ToyTrainOptions {
  int steps = 200;
  double step_size = 0.5;
  int batch_size = 8;
  double holdout_fraction = 0.25;
  // Transducer head dimensions; ignored for the CTC head.
  int pred_dim = 16;
  int joint_hidden = 32;
  // Decoding settings for the holdout evaluation.
  int beam = 4;
  int max_symbols_per_frame = 8;
  uint64_t seed = 1;
};

struct ToyTrainResult {
  std::vector<double> loss_curve;  // mean batch loss per step
  double holdout_token_accuracy = 0.0;
  int holdout_count = 0;
  int skipped_infeasible = 0;  // CTC-infeasible training pairs dropped
  CtcHead head;                // kCtc
  TransducerModel model;       // kRnnt
};

// Trains a decoder head on top of a frozen randomly initialized encoder with
// plain SGD. Encoder outputs are computed once per utterance and cached.
// Holdout accuracy is 1 - (total token edit distance / total reference
// tokens) over greedy (CTC) or label-synchronous beam (transducer) decodes.
// Throws NumericalError naming the step when the loss stops being finite.
ToyTrainResult ToyTrain(LossKind kind, const EncoderConfig& enc_cfg,
                        const EncoderParams& enc_params,
                        std::span<const UtteranceRecord> records,
                        const Vocabulary& vocab,
                        const ToyTrainOptions& options);

// Shared metric: 1 - edit_distance / reference_tokens, floored at zero.
double TokenAccuracy(std::span<const TokenSequence> refs,
                     std::span<const TokenSequence> hyps);

}  // namespace latkit

#endif  // LATKIT_TRAIN_H_
