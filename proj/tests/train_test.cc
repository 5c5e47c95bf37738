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

#include "latkit/train.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "latkit/ctc.h"
#include "latkit/dataset.h"
#include "latkit/encoder.h"
#include "latkit/error.h"

namespace latkit {
namespace {

EncoderConfig TinyEncoder() {
  EncoderConfig cfg;
  cfg.input_dim = 8;
  cfg.num_layers = 1;
  cfg.model_dim = 8;
  cfg.num_heads = 2;
  cfg.ffn_multiplier = 2;
  cfg.conv_kernel_size = 3;
  cfg.attention_window = -1;
  cfg.frontend_strides = {{2, 2}};
  cfg.seed = 13;
  return cfg;
}

SynthTaskConfig TinySynth(uint64_t seed) {
  SynthTaskConfig synth;
  synth.alphabet_size = 4;
  synth.min_tokens = 2;
  synth.max_tokens = 3;
  synth.min_frames_per_token = 4;
  synth.max_frames_per_token = 6;
  synth.feature_dim = 8;
  synth.seed = seed;
  return synth;
}

double Mean(const std::vector<double>& v, size_t begin, size_t end) {
  return std::accumulate(v.begin() + static_cast<long>(begin),
                         v.begin() + static_cast<long>(end), 0.0) /
         static_cast<double>(end - begin);
}

TEST_CASE("TokenAccuracy basics") {
  const std::vector<TokenSequence> refs = {{2, 3, 4}, {2, 2}};
  CHECK(TokenAccuracy(refs, refs) == doctest::Approx(1.0));

  const std::vector<TokenSequence> one_off = {{2, 3, 5}, {2, 2}};
  CHECK(TokenAccuracy(refs, one_off) == doctest::Approx(1.0 - 1.0 / 5.0));

  // Worse-than-useless hypotheses floor at zero rather than going negative.
  const std::vector<TokenSequence> short_ref = {{2}};
  const std::vector<TokenSequence> long_hyp = {{3, 4, 5}};
  CHECK(TokenAccuracy(short_ref, long_hyp) == 0.0);

  const std::vector<TokenSequence> empty;
  CHECK(TokenAccuracy(empty, empty) == 0.0);

  const std::vector<TokenSequence> mismatched = {{2}};
  CHECK_THROWS_AS((void)TokenAccuracy(refs, mismatched), DataError);
}

TEST_CASE("ToyTrain validates options and data") {
  const EncoderConfig enc_cfg = TinyEncoder();
  const EncoderParams params = InitEncoderParams(enc_cfg);
  const SynthTaskConfig synth = TinySynth(31);
  const std::vector<UtteranceRecord> records = GenerateSynthetic(synth, 8);
  const Vocabulary vocab = SynthVocabulary(synth);

  ToyTrainOptions bad_batch;
  bad_batch.batch_size = 0;
  CHECK_THROWS_AS((void)ToyTrain(LossKind::kCtc, enc_cfg, params, records,
                                 vocab, bad_batch),
                  ConfigError);

  ToyTrainOptions bad_holdout;
  bad_holdout.holdout_fraction = 1.0;
  CHECK_THROWS_AS((void)ToyTrain(LossKind::kCtc, enc_cfg, params, records,
                                 vocab, bad_holdout),
                  ConfigError);

  ToyTrainOptions options;
  options.steps = 1;
  CHECK_THROWS_AS((void)ToyTrain(LossKind::kCtc, enc_cfg, params,
                                 std::vector<UtteranceRecord>{}, vocab,
                                 options),
                  DataError);

  // A single record cannot be split into train and holdout.
  const std::vector<UtteranceRecord> single(records.begin(),
                                            records.begin() + 1);
  CHECK_THROWS_AS(
      (void)ToyTrain(LossKind::kCtc, enc_cfg, params, single, vocab, options),
      DataError);
}

TEST_CASE("Zero step size leaves the head at its initialization") {
  const EncoderConfig enc_cfg = TinyEncoder();
  const EncoderParams params = InitEncoderParams(enc_cfg);
  const SynthTaskConfig synth = TinySynth(32);
  const std::vector<UtteranceRecord> records = GenerateSynthetic(synth, 8);
  const Vocabulary vocab = SynthVocabulary(synth);

  ToyTrainOptions options;
  options.steps = 4;
  options.step_size = 0.0;
  // One batch sweeps the whole train split, so every step sees the same
  // examples and the frozen head must produce the same mean loss.
  options.batch_size = 6;
  options.holdout_fraction = 0.25;
  options.seed = 5;

  const ToyTrainResult result =
      ToyTrain(LossKind::kCtc, enc_cfg, params, records, vocab, options);
  REQUIRE(result.loss_curve.size() == 4);
  for (double loss : result.loss_curve) {
    CHECK(loss == result.loss_curve[0]);
  }

  const CtcHead fresh =
      InitCtcHead(vocab.num_pieces(), enc_cfg.model_dim, options.seed);
  CHECK(result.head.w == fresh.w);
  CHECK(result.head.b == fresh.b);
}

TEST_CASE("Zero steps produce an empty curve and an untouched holdout eval") {
  const EncoderConfig enc_cfg = TinyEncoder();
  const EncoderParams params = InitEncoderParams(enc_cfg);
  const SynthTaskConfig synth = TinySynth(33);
  const std::vector<UtteranceRecord> records = GenerateSynthetic(synth, 8);
  const Vocabulary vocab = SynthVocabulary(synth);

  ToyTrainOptions options;
  options.steps = 0;
  const ToyTrainResult result =
      ToyTrain(LossKind::kCtc, enc_cfg, params, records, vocab, options);
  CHECK(result.loss_curve.empty());
  CHECK(result.holdout_count == 2);
  CHECK(result.holdout_token_accuracy >= 0.0);
  CHECK(result.holdout_token_accuracy <= 1.0);
}

TEST_CASE("CTC training reduces the loss on a tiny task") {
  const EncoderConfig enc_cfg = TinyEncoder();
  const EncoderParams params = InitEncoderParams(enc_cfg);
  const SynthTaskConfig synth = TinySynth(34);
  const std::vector<UtteranceRecord> records = GenerateSynthetic(synth, 16);
  const Vocabulary vocab = SynthVocabulary(synth);

  ToyTrainOptions options;
  options.steps = 80;
  options.step_size = 0.3;
  options.batch_size = 4;
  options.seed = 7;

  const ToyTrainResult result =
      ToyTrain(LossKind::kCtc, enc_cfg, params, records, vocab, options);
  REQUIRE(result.loss_curve.size() == 80);
  for (double loss : result.loss_curve) CHECK(std::isfinite(loss));
  const double head_mean = Mean(result.loss_curve, 0, 10);
  const double tail_mean = Mean(result.loss_curve, 70, 80);
  CHECK(tail_mean < head_mean);
  CHECK(result.holdout_count == 4);

  // Same options, same data: the whole run is reproducible.
  const ToyTrainResult again =
      ToyTrain(LossKind::kCtc, enc_cfg, params, records, vocab, options);
  CHECK(again.loss_curve == result.loss_curve);
  CHECK(again.holdout_token_accuracy == result.holdout_token_accuracy);
}

TEST_CASE("Transducer training runs and reduces the loss") {
  const EncoderConfig enc_cfg = TinyEncoder();
  const EncoderParams params = InitEncoderParams(enc_cfg);
  const SynthTaskConfig synth = TinySynth(35);
  const std::vector<UtteranceRecord> records = GenerateSynthetic(synth, 8);
  const Vocabulary vocab = SynthVocabulary(synth);

  ToyTrainOptions options;
  options.steps = 40;
  options.step_size = 0.2;
  options.batch_size = 4;
  options.pred_dim = 8;
  options.joint_hidden = 16;
  options.beam = 2;
  options.seed = 9;

  const ToyTrainResult result =
      ToyTrain(LossKind::kRnnt, enc_cfg, params, records, vocab, options);
  REQUIRE(result.loss_curve.size() == 40);
  for (double loss : result.loss_curve) {
    CHECK(std::isfinite(loss));
    CHECK(loss > 0.0);  // -log P of the target is positive
  }
  CHECK(Mean(result.loss_curve, 30, 40) < Mean(result.loss_curve, 0, 10));
  CHECK(result.skipped_infeasible == 0);
  CHECK(result.holdout_token_accuracy >= 0.0);
  CHECK(result.holdout_token_accuracy <= 1.0);
}

TEST_CASE("Infeasible CTC pairs are skipped and counted") {
  const EncoderConfig enc_cfg = TinyEncoder();
  const EncoderParams params = InitEncoderParams(enc_cfg);
  SynthTaskConfig synth = TinySynth(36);
  const Vocabulary vocab = SynthVocabulary(synth);

  // "aa" needs T >= 3 after collapse but only gets 2 encoder frames through
  // the 2x frontend; the 16-frame "ab" records are comfortably feasible.
  auto record = [&](const std::string& text, int frames) {
    UtteranceRecord rec;
    rec.id = text;
    rec.features = Matrix::Zero(frames, 8);
    rec.transcript = text;
    return rec;
  };
  std::vector<UtteranceRecord> records;
  records.push_back(record("aa", 4));
  records.push_back(record("aa", 4));
  for (int i = 0; i < 6; ++i) records.push_back(record("ab", 16));

  ToyTrainOptions options;
  options.steps = 2;
  options.step_size = 0.1;
  options.batch_size = 2;
  options.holdout_fraction = 0.25;

  const ToyTrainResult ctc =
      ToyTrain(LossKind::kCtc, enc_cfg, params, records, vocab, options);
  CHECK(ctc.skipped_infeasible == 2);

  // The transducer handles more labels than frames, so nothing is skipped.
  options.pred_dim = 4;
  options.joint_hidden = 8;
  const ToyTrainResult rnnt =
      ToyTrain(LossKind::kRnnt, enc_cfg, params, records, vocab, options);
  CHECK(rnnt.skipped_infeasible == 0);
}

TEST_CASE("Divergence raises a numerical error") {
  const EncoderConfig enc_cfg = TinyEncoder();
  const EncoderParams params = InitEncoderParams(enc_cfg);
  const SynthTaskConfig synth = TinySynth(37);
  const std::vector<UtteranceRecord> records = GenerateSynthetic(synth, 8);
  const Vocabulary vocab = SynthVocabulary(synth);

  // A step this large saturates the blank sigmoid to exactly 0 or 1, which
  // zeroes out the probability of every target sequence on the next batch.
  ToyTrainOptions options;
  options.steps = 6;
  options.step_size = 1e6;
  options.batch_size = 2;
  options.pred_dim = 4;
  options.joint_hidden = 8;

  CHECK_THROWS_AS((void)ToyTrain(LossKind::kRnnt, enc_cfg, params, records,
                                 vocab, options),
                  NumericalError);
}

}  // namespace
}  // namespace latkit
