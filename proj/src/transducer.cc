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

#include "latkit/transducer.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "latkit/error.h"
#include "latkit/tensor_io.h"

namespace latkit {
namespace {

double Softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

void CheckLabelIds(std::span<const int> labels, int num_labels,
                   const char* where) {
  for (int y : labels) {
    if (y <= kBlankId || ToLabelIndex(y) >= num_labels) {
      throw DataError(std::string(where) + ": label id " + std::to_string(y) +
                      " out of range");
    }
  }
}

Matrix UniformMatrix(Eigen::Index rows, Eigen::Index cols, double fan_in,
                     std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(fan_in);
  std::uniform_real_distribution<double> dist(-s, s);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

// alpha(t,u): log mass of partial paths that consumed t frames and emitted
// y_1..y_u. Label moves read node (t,u) and exist only for t <= T-1, so the
// terminal alpha(T,U) is reachable solely through the final blank move out
// of (T-1,U).
Matrix RnntForward(const RnntLattice& lattice, std::span<const int> labels) {
  const int t_len = lattice.frames;
  const int u_len = lattice.target_len;
  Matrix alpha = Matrix::Constant(t_len + 1, u_len + 1, kLogZero);
  for (int t = 0; t <= t_len; ++t) {
    for (int u = 0; u <= u_len; ++u) {
      double a = (t == 0 && u == 0) ? 0.0 : kLogZero;
      if (t >= 1) {
        a = LogAdd(a, alpha(t - 1, u) + lattice.at(t - 1, u).log_blank);
      }
      if (u >= 1 && t <= t_len - 1) {
        const HatDistribution& d = lattice.at(t, u - 1);
        a = LogAdd(a, alpha(t, u - 1) + d.log_not_blank +
                          d.log_labels[ToLabelIndex(labels[u - 1])]);
      }
      alpha(t, u) = a;
    }
  }
  return alpha;
}

}  // namespace

PredContext ContextAt(std::span<const int> prefix) {
  PredContext ctx;
  const size_t n = prefix.size();
  if (n >= 1) ctx.prev1 = prefix[n - 1];
  if (n >= 2) ctx.prev2 = prefix[n - 2];
  return ctx;
}

Vector PredFeatures(const PredNetwork& pred, PredContext ctx) {
  const int i1 = ToLabelIndex(ctx.prev1);
  const int i2 = ToLabelIndex(ctx.prev2);
  if (i1 < 0 || i1 >= pred.num_labels() || i2 < 0 ||
      i2 >= pred.num_labels()) {
    throw DataError("pred_features: context id out of range");
  }
  return pred.embed_prev1.row(i1).transpose() +
         pred.embed_prev2.row(i2).transpose();
}

HatDistribution HatFromLogits(double blank_logit,
                              std::span<const double> label_logits) {
  HatDistribution d;
  d.log_blank = -Softplus(-blank_logit);
  d.log_not_blank = -Softplus(blank_logit);
  d.log_labels = LogSoftmax(label_logits);
  return d;
}

HatDistribution JointForward(const JointParams& joint, const Vector& enc_frame,
                             const Vector& pred_feat) {
  if (joint.w_enc.cols() != enc_frame.size() ||
      joint.w_pred.cols() != pred_feat.size()) {
    throw DataError("joint: input dimension mismatch");
  }
  const Vector z =
      (joint.w_enc * enc_frame + joint.w_pred * pred_feat + joint.bias)
          .array()
          .tanh()
          .matrix();
  const double blank_logit = joint.w_blank.dot(z) + joint.b_blank;
  const Vector label_logits = joint.w_label * z + joint.b_label;
  return HatFromLogits(
      blank_logit,
      std::span<const double>(label_logits.data(), label_logits.size()));
}

TransducerModel InitTransducerModel(int num_labels, int enc_dim, int pred_dim,
                                    int hidden_dim, uint64_t seed) {
  if (num_labels < 1 || enc_dim < 1 || pred_dim < 1 || hidden_dim < 1) {
    throw ConfigError("transducer: dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  TransducerModel m;
  m.pred.embed_prev1 = UniformMatrix(num_labels, pred_dim, pred_dim, rng);
  m.pred.embed_prev2 = UniformMatrix(num_labels, pred_dim, pred_dim, rng);
  m.joint.w_enc = UniformMatrix(hidden_dim, enc_dim, enc_dim, rng);
  m.joint.w_pred = UniformMatrix(hidden_dim, pred_dim, pred_dim, rng);
  m.joint.bias = Vector::Zero(hidden_dim);
  m.joint.w_blank =
      UniformMatrix(hidden_dim, 1, hidden_dim, rng).col(0);
  m.joint.b_blank = 0.0;
  m.joint.w_label = UniformMatrix(num_labels, hidden_dim, hidden_dim, rng);
  m.joint.b_label = Vector::Zero(num_labels);
  return m;
}

void SaveTransducerModel(const std::string& path, const TransducerModel& m) {
  TensorFile f;
  f.SetMeta("kind", "transducer");
  f.Add("pred.embed_prev1", m.pred.embed_prev1);
  f.Add("pred.embed_prev2", m.pred.embed_prev2);
  f.Add("joint.w_enc", m.joint.w_enc);
  f.Add("joint.w_pred", m.joint.w_pred);
  f.Add("joint.bias", m.joint.bias);
  f.Add("joint.w_blank", m.joint.w_blank);
  Vector b_blank(1);
  b_blank(0) = m.joint.b_blank;
  f.Add("joint.b_blank", b_blank);
  f.Add("joint.w_label", m.joint.w_label);
  f.Add("joint.b_label", m.joint.b_label);
  f.Save(path);
}

TransducerModel LoadTransducerModel(const std::string& path) {
  const TensorFile f = TensorFile::Load(path);
  if (f.GetMeta("kind") != "transducer") {
    throw DataError("parameter file " + path + " is not a transducer");
  }
  TransducerModel m;
  m.pred.embed_prev1 = f.Get("pred.embed_prev1");
  m.pred.embed_prev2 = f.Get("pred.embed_prev2");
  m.joint.w_enc = f.Get("joint.w_enc");
  m.joint.w_pred = f.Get("joint.w_pred");
  m.joint.bias = f.GetVector("joint.bias");
  m.joint.w_blank = f.GetVector("joint.w_blank");
  m.joint.b_blank = f.GetVector("joint.b_blank")(0);
  m.joint.w_label = f.Get("joint.w_label");
  m.joint.b_label = f.GetVector("joint.b_label");
  return m;
}

RnntLattice BuildLattice(const TransducerModel& model, const Matrix& enc,
                         std::span<const int> labels) {
  if (enc.rows() < 1) throw DataError("build_lattice: empty encoder output");
  CheckLabelIds(labels, model.num_labels(), "build_lattice");
  RnntLattice lattice;
  lattice.frames = static_cast<int>(enc.rows());
  lattice.target_len = static_cast<int>(labels.size());
  lattice.nodes.resize(static_cast<size_t>(lattice.frames) *
                       (lattice.target_len + 1));
  for (int u = 0; u <= lattice.target_len; ++u) {
    const Vector q = PredFeatures(model.pred, ContextAt(labels.first(u)));
    for (int t = 0; t < lattice.frames; ++t) {
      lattice.at(t, u) = JointForward(model.joint, enc.row(t).transpose(), q);
    }
  }
  return lattice;
}

double RnntLoss(const RnntLattice& lattice, std::span<const int> labels) {
  if (lattice.frames < 1) throw DataError("rnnt_loss: T must be >= 1");
  if (static_cast<int>(labels.size()) != lattice.target_len) {
    throw DataError("rnnt_loss: label length does not match lattice");
  }
  const Matrix alpha = RnntForward(lattice, labels);
  return -alpha(lattice.frames, lattice.target_len);
}

std::vector<HatNodeGrad> RnntGrad(const RnntLattice& lattice,
                                  std::span<const int> labels) {
  if (lattice.frames < 1) throw DataError("rnnt_grad: T must be >= 1");
  if (static_cast<int>(labels.size()) != lattice.target_len) {
    throw DataError("rnnt_grad: label length does not match lattice");
  }
  const int t_len = lattice.frames;
  const int u_len = lattice.target_len;
  const Matrix alpha = RnntForward(lattice, labels);
  const double ll = alpha(t_len, u_len);
  if (ll == kLogZero) {
    throw NumericalError("rnnt_grad: zero-probability target sequence");
  }

  // beta(t,u): log mass from state (t,u) to the terminal (T,U).
  Matrix beta = Matrix::Constant(t_len + 1, u_len + 1, kLogZero);
  beta(t_len, u_len) = 0.0;
  for (int t = t_len - 1; t >= 0; --t) {
    for (int u = u_len; u >= 0; --u) {
      const HatDistribution& d = lattice.at(t, u);
      double b = d.log_blank + beta(t + 1, u);
      if (u < u_len) {
        b = LogAdd(b, d.log_not_blank + d.log_labels[ToLabelIndex(labels[u])] +
                          beta(t, u + 1));
      }
      beta(t, u) = b;
    }
  }

  std::vector<HatNodeGrad> grads(lattice.nodes.size());
  for (int t = 0; t < t_len; ++t) {
    for (int u = 0; u <= u_len; ++u) {
      const HatDistribution& d = lattice.at(t, u);
      HatNodeGrad& g = grads[static_cast<size_t>(t) * (u_len + 1) + u];
      g.label_logits.assign(d.log_labels.size(), 0.0);

      // Transition occupancies under the posterior over paths.
      const double w_blank_log =
          alpha(t, u) + d.log_blank + beta(t + 1, u) - ll;
      const double w_blank =
          w_blank_log == kLogZero ? 0.0 : std::exp(w_blank_log);
      double w_label = 0.0;
      if (u < u_len) {
        const double w_label_log = alpha(t, u) + d.log_not_blank +
                                   d.log_labels[ToLabelIndex(labels[u])] +
                                   beta(t, u + 1) - ll;
        w_label = w_label_log == kLogZero ? 0.0 : std::exp(w_label_log);
      }

      const double b = std::exp(d.log_blank);
      // d(-logP)/d blank_logit through b = sigmoid(blank_logit).
      g.blank_logit = w_label * b - w_blank * (1.0 - b);
      if (w_label > 0.0) {
        const int y_idx = ToLabelIndex(labels[u]);
        for (size_t k = 0; k < g.label_logits.size(); ++k) {
          const double p_k = std::exp(d.log_labels[k]);
          g.label_logits[k] =
              w_label * (p_k - (static_cast<int>(k) == y_idx ? 1.0 : 0.0));
        }
      }
    }
  }
  return grads;
}

std::vector<double> IlmNextLogProbs(const TransducerModel& model,
                                    std::span<const int> prefix) {
  const Vector q = PredFeatures(model.pred, ContextAt(prefix));
  const Vector z =
      (model.joint.w_pred * q + model.joint.bias).array().tanh().matrix();
  const Vector label_logits = model.joint.w_label * z + model.joint.b_label;
  return LogSoftmax(
      std::span<const double>(label_logits.data(), label_logits.size()));
}

double IlmScore(const TransducerModel& model, std::span<const int> labels) {
  CheckLabelIds(labels, model.num_labels(), "ilm_score");
  double total = 0.0;
  for (size_t u = 0; u < labels.size(); ++u) {
    total += IlmNextLogProbs(model, labels.subspan(0, u))
        [ToLabelIndex(labels[u])];
  }
  return total;
}

std::vector<Hypothesis> LabelSyncBeamSearch(const TransducerModel& model,
                                            const Matrix& enc,
                                            const LabelSyncOptions& options,
                                            const FusionConfig* fusion) {
  if (options.beam < 1) throw ConfigError("label sync search: beam < 1");
  if (options.max_symbols_per_frame < 1) {
    throw ConfigError("label sync search: max_symbols_per_frame < 1");
  }
  if (enc.rows() < 1) throw DataError("label sync search: empty encoder output");

  const int t_len = static_cast<int>(enc.rows());
  const int num_labels = model.num_labels();
  const int max_len = options.max_symbols_per_frame * t_len;
  const double alpha = fusion != nullptr ? fusion->alpha : 0.0;
  const double beta = fusion != nullptr ? fusion->beta : 0.0;
  const LmScorer* lm = fusion != nullptr ? fusion->external_lm : nullptr;

  struct Entry {
    TokenSequence y;
    std::vector<double> f;  // f[t]: mass of partial paths, t frames consumed
    std::vector<HatDistribution> row;  // node (t, y) for each frame t
    double ilm = 0.0;
    double ext = 0.0;
  };

  const auto fill_row = [&](Entry& e) {
    const Vector q = PredFeatures(model.pred, ContextAt(e.y));
    e.row.reserve(t_len);
    for (int t = 0; t < t_len; ++t) {
      e.row.push_back(JointForward(model.joint, enc.row(t).transpose(), q));
    }
  };
  // Exact completion: LSE_t of f[t] plus the blank products over frames
  // t..T-1, the last factor being the terminal blank at T-1.
  const auto complete = [&](const Entry& e) {
    double suffix = 0.0;
    double total = kLogZero;
    for (int t = t_len - 1; t >= 0; --t) {
      suffix += e.row[t].log_blank;
      total = LogAdd(total, e.f[t] + suffix);
    }
    return total;
  };
  const auto fused = [&](const Entry& e, double mass) {
    return mass - alpha * e.ilm + beta * e.ext;
  };

  Entry root;
  root.f.assign(t_len, kLogZero);
  root.f[0] = 0.0;
  fill_row(root);
  for (int t = 1; t < t_len; ++t) {
    root.f[t] = root.f[t - 1] + root.row[t - 1].log_blank;
  }

  std::vector<Entry> layer;
  layer.push_back(std::move(root));

  std::vector<Hypothesis> finished;
  const auto finish = [&](const Entry& e) {
    Hypothesis h;
    h.tokens = e.y;
    h.acoustic = complete(e);
    h.prior = e.ilm;
    h.external = e.ext;
    h.combined = fused(e, h.acoustic);
    finished.push_back(std::move(h));
  };

  for (const Entry& e : layer) finish(e);

  for (int len = 1; len <= max_len && !layer.empty(); ++len) {
    std::vector<Entry> next;
    for (Entry& parent : layer) {
      std::vector<double> ilm_row;
      if (alpha != 0.0) ilm_row = IlmNextLogProbs(model, parent.y);
      std::vector<double> lm_row;
      if (lm != nullptr) lm_row = lm->NextLogProbs(parent.y);

      for (int v = 1; v <= num_labels; ++v) {
        const int label = ToLabelIndex(v);
        Entry child;
        child.y = parent.y;
        child.y.push_back(v);
        child.ilm = parent.ilm + (alpha != 0.0 ? ilm_row[label] : 0.0);
        child.ext = parent.ext + (lm != nullptr ? lm_row[label] : 0.0);
        fill_row(child);
        child.f.assign(t_len, kLogZero);
        for (int t = 0; t < t_len; ++t) {
          double mass = parent.f[t] + parent.row[t].log_not_blank +
                        parent.row[t].log_labels[label];
          if (t >= 1) {
            mass = LogAdd(mass, child.f[t - 1] + child.row[t - 1].log_blank);
          }
          child.f[t] = mass;
        }
        next.push_back(std::move(child));
      }
    }

    // Prune by fused live mass; ties resolve to the lexicographically
    // smaller label sequence.
    std::sort(next.begin(), next.end(), [&](const Entry& a, const Entry& b) {
      const double sa = fused(a, LogSumExp(a.f));
      const double sb = fused(b, LogSumExp(b.f));
      if (sa != sb) return sa > sb;
      return std::lexicographical_compare(a.y.begin(), a.y.end(), b.y.begin(),
                                          b.y.end());
    });
    if (static_cast<int>(next.size()) > options.beam) {
      next.resize(options.beam);
    }
    for (const Entry& e : next) finish(e);
    layer = std::move(next);

    std::sort(finished.begin(), finished.end(), HypothesisBefore);
    if (static_cast<int>(finished.size()) > options.beam) {
      finished.resize(options.beam);
    }
    // Without ILM subtraction every extension or completion multiplies by
    // probabilities <= 1 (and beta >= 0 scales log probs <= 0), so a live
    // entry's fused mass bounds all of its descendants. Once the beam-th
    // finished hypothesis strictly beats the best live bound, further
    // layers cannot change the result. With alpha != 0 the bound fails and
    // the search runs to the max_len cap.
    if (alpha == 0.0 && beta >= 0.0 &&
        static_cast<int>(finished.size()) >= options.beam) {
      double best_live = kLogZero;
      for (const Entry& e : layer) {
        best_live = std::max(best_live, fused(e, LogSumExp(e.f)));
      }
      if (finished.back().combined > best_live) break;
    }
  }

  std::sort(finished.begin(), finished.end(), HypothesisBefore);
  if (static_cast<int>(finished.size()) > options.beam) {
    finished.resize(options.beam);
  }
  return finished;
}

}  // namespace latkit
