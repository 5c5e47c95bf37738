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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "latkit/error.h"
#include "latkit/eval.h"

namespace latkit {
namespace {

struct Example {
  Matrix enc;  // frozen encoder output, T' x model_dim
  TokenSequence labels;
};

// Accumulated gradients for the transducer head, same shapes as the model.
struct RnntGradAcc {
  Matrix embed_prev1, embed_prev2;
  Matrix w_enc, w_pred;
  Vector bias, w_blank;
  double b_blank = 0.0;
  Matrix w_label;
  Vector b_label;

  explicit RnntGradAcc(const TransducerModel& m)
      : embed_prev1(Matrix::Zero(m.pred.embed_prev1.rows(),
                                 m.pred.embed_prev1.cols())),
        embed_prev2(Matrix::Zero(m.pred.embed_prev2.rows(),
                                 m.pred.embed_prev2.cols())),
        w_enc(Matrix::Zero(m.joint.w_enc.rows(), m.joint.w_enc.cols())),
        w_pred(Matrix::Zero(m.joint.w_pred.rows(), m.joint.w_pred.cols())),
        bias(Vector::Zero(m.joint.bias.size())),
        w_blank(Vector::Zero(m.joint.w_blank.size())),
        w_label(Matrix::Zero(m.joint.w_label.rows(), m.joint.w_label.cols())),
        b_label(Vector::Zero(m.joint.b_label.size())) {}
};

// Backpropagates the per-node HAT logit gradients through the tanh joint
// and the embedding-sum prediction network. The encoder is frozen, so the
// chain stops at the encoder activations.
double RnntExampleGrad(const TransducerModel& model, const Example& ex,
                       RnntGradAcc* acc) {
  const RnntLattice lattice = BuildLattice(model, ex.enc, ex.labels);
  const double loss = RnntLoss(lattice, ex.labels);
  const std::vector<HatNodeGrad> node_grads = RnntGrad(lattice, ex.labels);
  const int target = lattice.target_len;

  for (int t = 0; t < lattice.frames; ++t) {
    const Vector h = ex.enc.row(t).transpose();
    for (int u = 0; u <= target; ++u) {
      const HatNodeGrad& g =
          node_grads[static_cast<size_t>(t) * (target + 1) + u];
      Vector g_label(model.num_labels());
      bool nonzero = g.blank_logit != 0.0;
      for (int k = 0; k < model.num_labels(); ++k) {
        g_label(k) = g.label_logits[static_cast<size_t>(k)];
        nonzero = nonzero || g_label(k) != 0.0;
      }
      if (!nonzero) continue;

      const PredContext ctx =
          ContextAt(std::span<const int>(ex.labels.data(), u));
      const Vector q = PredFeatures(model.pred, ctx);
      const Vector a =
          model.joint.w_enc * h + model.joint.w_pred * q + model.joint.bias;
      const Vector z = a.array().tanh().matrix();

      acc->w_blank += g.blank_logit * z;
      acc->b_blank += g.blank_logit;
      acc->w_label += g_label * z.transpose();
      acc->b_label += g_label;

      const Vector dz = model.joint.w_blank * g.blank_logit +
                        model.joint.w_label.transpose() * g_label;
      const Vector delta =
          (dz.array() * (1.0 - z.array().square())).matrix();
      acc->w_enc += delta * h.transpose();
      acc->w_pred += delta * q.transpose();
      acc->bias += delta;

      const Vector dq = model.joint.w_pred.transpose() * delta;
      acc->embed_prev1.row(ToLabelIndex(ctx.prev1)) += dq.transpose();
      acc->embed_prev2.row(ToLabelIndex(ctx.prev2)) += dq.transpose();
    }
  }
  return loss;
}

}  // namespace

double TokenAccuracy(std::span<const TokenSequence> refs,
                     std::span<const TokenSequence> hyps) {
  if (refs.size() != hyps.size()) {
    throw DataError("token_accuracy: ref/hyp count mismatch");
  }
  long long distance = 0;
  long long total = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    distance += EditDistance(refs[i], hyps[i]);
    total += static_cast<long long>(refs[i].size());
  }
  if (total == 0) return 0.0;
  const double acc = 1.0 - static_cast<double>(distance) / total;
  return std::max(acc, 0.0);
}

ToyTrainResult ToyTrain(LossKind kind, const EncoderConfig& enc_cfg,
                        const EncoderParams& enc_params,
                        std::span<const UtteranceRecord> records,
                        const Vocabulary& vocab,
                        const ToyTrainOptions& options) {
  if (options.steps < 0 || options.batch_size < 1) {
    throw ConfigError("toy_train: bad steps/batch_size");
  }
  if (options.holdout_fraction <= 0.0 || options.holdout_fraction >= 1.0) {
    throw ConfigError("toy_train: holdout_fraction must be in (0, 1)");
  }
  if (records.empty()) throw DataError("toy_train: empty dataset");

  const int num_symbols = vocab.num_pieces();  // blank + sos + pieces
  ToyTrainResult result;

  // Frozen encoder: run every utterance through it once.
  std::vector<Example> examples;
  examples.reserve(records.size());
  for (const UtteranceRecord& rec : records) {
    Example ex;
    FeatureSequence feat{rec.features, 10.0};
    ex.enc = Encode(feat, enc_cfg, enc_params).embeddings;
    ex.labels = vocab.Tokenize(rec.transcript);
    examples.push_back(std::move(ex));
  }

  const int holdout = std::max(
      1, static_cast<int>(std::ceil(options.holdout_fraction *
                                    static_cast<double>(examples.size()))));
  if (holdout >= static_cast<int>(examples.size())) {
    throw DataError("toy_train: not enough records for a train split");
  }
  const int train_count = static_cast<int>(examples.size()) - holdout;
  result.holdout_count = holdout;

  std::vector<int> train_ids;
  for (int i = 0; i < train_count; ++i) {
    if (kind == LossKind::kCtc &&
        !CtcIsFeasible(examples[i].labels,
                       static_cast<int>(examples[i].enc.rows()))) {
      ++result.skipped_infeasible;
      continue;
    }
    train_ids.push_back(i);
  }
  if (train_ids.empty()) throw DataError("toy_train: no feasible examples");

  std::mt19937_64 rng(options.seed);
  if (kind == LossKind::kCtc) {
    result.head = InitCtcHead(num_symbols, enc_cfg.model_dim, options.seed);
  } else {
    result.model =
        InitTransducerModel(vocab.num_labels(), enc_cfg.model_dim,
                            options.pred_dim, options.joint_hidden,
                            options.seed);
  }

  std::vector<int> order = train_ids;
  size_t cursor = order.size();  // trigger a shuffle on first use
  auto next_index = [&]() {
    if (cursor >= order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    return order[cursor++];
  };

  // Triangular schedule: short linear warmup, then linear decay to zero.
  // Warmup keeps the first updates from blowing up the randomly initialized
  // heads; decay damps late oscillation. No schedule knobs.
  const int warmup = std::max(1, options.steps / 20);
  for (int step = 0; step < options.steps; ++step) {
    const double ramp =
        std::min(1.0, static_cast<double>(step + 1) / warmup);
    const double step_size =
        options.step_size * ramp *
        (1.0 - static_cast<double>(step) / static_cast<double>(options.steps));
    double batch_loss = 0.0;
    if (kind == LossKind::kCtc) {
      Matrix gw = Matrix::Zero(result.head.w.rows(), result.head.w.cols());
      Vector gb = Vector::Zero(result.head.b.size());
      for (int n = 0; n < options.batch_size; ++n) {
        const Example& ex = examples[static_cast<size_t>(next_index())];
        const CtcPosteriorGrid grid = HeadGrid(result.head, ex.enc);
        batch_loss += -CtcLoss(grid, ex.labels);
        const Matrix g = CtcGrad(grid, ex.labels);  // T x num_symbols
        gw += g.transpose() * ex.enc;
        gb += g.colwise().sum().transpose();
      }
      const double scale = step_size / options.batch_size;
      result.head.w -= scale * gw;
      result.head.b -= scale * gb;
    } else {
      RnntGradAcc acc(result.model);
      for (int n = 0; n < options.batch_size; ++n) {
        const Example& ex = examples[static_cast<size_t>(next_index())];
        batch_loss += RnntExampleGrad(result.model, ex, &acc);
      }
      const double scale = step_size / options.batch_size;
      result.model.pred.embed_prev1 -= scale * acc.embed_prev1;
      result.model.pred.embed_prev2 -= scale * acc.embed_prev2;
      result.model.joint.w_enc -= scale * acc.w_enc;
      result.model.joint.w_pred -= scale * acc.w_pred;
      result.model.joint.bias -= scale * acc.bias;
      result.model.joint.w_blank -= scale * acc.w_blank;
      result.model.joint.b_blank -= scale * acc.b_blank;
      result.model.joint.w_label -= scale * acc.w_label;
      result.model.joint.b_label -= scale * acc.b_label;
    }
    batch_loss /= options.batch_size;
    if (!std::isfinite(batch_loss)) {
      throw NumericalError("toy_train: loss diverged at step " +
                           std::to_string(step));
    }
    result.loss_curve.push_back(batch_loss);
  }

  // Holdout evaluation with the trained head.
  std::vector<TokenSequence> refs, hyps;
  for (size_t i = static_cast<size_t>(train_count); i < examples.size(); ++i) {
    const Example& ex = examples[i];
    refs.push_back(ex.labels);
    if (kind == LossKind::kCtc) {
      hyps.push_back(GreedyDecode(HeadGrid(result.head, ex.enc)));
    } else {
      LabelSyncOptions search;
      search.beam = options.beam;
      search.max_symbols_per_frame = options.max_symbols_per_frame;
      const std::vector<Hypothesis> nbest =
          LabelSyncBeamSearch(result.model, ex.enc, search, nullptr);
      hyps.push_back(nbest.empty() ? TokenSequence{} : nbest.front().tokens);
    }
  }
  result.holdout_token_accuracy = TokenAccuracy(refs, hyps);
  return result;
}

}  // namespace latkit
