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

#include "latkit/ctc.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "latkit/error.h"
#include "latkit/tensor_io.h"

namespace latkit {
namespace {

// Expanded label sequence [b, y1, b, y2, ..., yU, b] of length 2U+1.
std::vector<int> Expand(std::span<const int> labels) {
  std::vector<int> z(2 * labels.size() + 1, kBlankId);
  for (size_t u = 0; u < labels.size(); ++u) z[2 * u + 1] = labels[u];
  return z;
}

void CheckLabels(const CtcPosteriorGrid& grid, std::span<const int> labels) {
  for (int y : labels) {
    if (y <= kBlankId || y >= grid.num_symbols()) {
      throw DataError("ctc: label id " + std::to_string(y) +
                      " out of range for grid with " +
                      std::to_string(grid.num_symbols()) + " symbols");
    }
  }
  if (!CtcIsFeasible(labels, grid.frames())) {
    throw DataError("ctc: infeasible pair, T=" +
                    std::to_string(grid.frames()) +
                    " < minimum alignment length");
  }
}

// alpha(t,s): mass of paths through the expanded sequence ending at symbol
// s after frame t, emission at t included. GravesTh standard recursion:
// a transition s-2 -> s is legal unless z_s is blank or equals z_{s-2}.
Matrix CtcForward(const CtcPosteriorGrid& grid, const std::vector<int>& z) {
  const int t_len = grid.frames();
  const int s_len = static_cast<int>(z.size());
  Matrix alpha = Matrix::Constant(t_len, s_len, kLogZero);
  alpha(0, 0) = grid.logprobs(0, z[0]);
  if (s_len > 1) alpha(0, 1) = grid.logprobs(0, z[1]);
  for (int t = 1; t < t_len; ++t) {
    for (int s = 0; s < s_len; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = LogAdd(a, alpha(t - 1, s - 1));
      if (s >= 2 && z[s] != kBlankId && z[s] != z[s - 2]) {
        a = LogAdd(a, alpha(t - 1, s - 2));
      }
      if (a != kLogZero) alpha(t, s) = a + grid.logprobs(t, z[s]);
    }
  }
  return alpha;
}

}  // namespace

CtcPosteriorGrid GridFromLogits(const Matrix& logits) {
  return CtcPosteriorGrid{LogSoftmaxRows(logits)};
}

void ValidateGrid(const CtcPosteriorGrid& grid, double tolerance) {
  std::vector<double> row(grid.num_symbols());
  for (int t = 0; t < grid.frames(); ++t) {
    for (int k = 0; k < grid.num_symbols(); ++k) {
      row[k] = grid.logprobs(t, k);
    }
    if (std::abs(LogSumExp(row)) > tolerance) {
      throw DataError("ctc grid row " + std::to_string(t) +
                      " is not log-normalized");
    }
  }
}

TokenSequence Collapse(std::span<const int> alignment) {
  TokenSequence out;
  int prev = kBlankId;
  for (int a : alignment) {
    if (a != prev && a != kBlankId) out.push_back(a);
    prev = a;
  }
  return out;
}

bool CtcIsFeasible(std::span<const int> labels, int frames) {
  int repeats = 0;
  for (size_t u = 1; u < labels.size(); ++u) {
    if (labels[u] == labels[u - 1]) ++repeats;
  }
  return frames >= static_cast<int>(labels.size()) + repeats;
}

double CtcLoss(const CtcPosteriorGrid& grid, std::span<const int> labels) {
  CheckLabels(grid, labels);
  const std::vector<int> z = Expand(labels);
  const Matrix alpha = CtcForward(grid, z);
  const int t_last = grid.frames() - 1;
  const int s_len = static_cast<int>(z.size());
  double ll = alpha(t_last, s_len - 1);
  if (s_len > 1) ll = LogAdd(ll, alpha(t_last, s_len - 2));
  return ll;
}

Matrix CtcOccupancy(const CtcPosteriorGrid& grid,
                    std::span<const int> labels) {
  CheckLabels(grid, labels);
  const std::vector<int> z = Expand(labels);
  const int t_len = grid.frames();
  const int s_len = static_cast<int>(z.size());
  const Matrix alpha = CtcForward(grid, z);

  // beta(t,s): mass of suffix paths that continue after frame t from symbol
  // s; emission at t excluded so gamma = alpha + beta - logP needs no
  // division by the frame posterior.
  Matrix beta = Matrix::Constant(t_len, s_len, kLogZero);
  beta(t_len - 1, s_len - 1) = 0.0;
  if (s_len > 1) beta(t_len - 1, s_len - 2) = 0.0;
  for (int t = t_len - 2; t >= 0; --t) {
    for (int s = 0; s < s_len; ++s) {
      double b = beta(t + 1, s) + grid.logprobs(t + 1, z[s]);
      if (s + 1 < s_len) {
        b = LogAdd(b, beta(t + 1, s + 1) + grid.logprobs(t + 1, z[s + 1]));
      }
      if (s + 2 < s_len && z[s + 2] != kBlankId && z[s + 2] != z[s]) {
        b = LogAdd(b, beta(t + 1, s + 2) + grid.logprobs(t + 1, z[s + 2]));
      }
      beta(t, s) = b;
    }
  }

  double ll = alpha(t_len - 1, s_len - 1);
  if (s_len > 1) ll = LogAdd(ll, alpha(t_len - 1, s_len - 2));
  if (ll == kLogZero) {
    throw NumericalError("ctc: zero-probability target sequence");
  }

  Matrix gamma = Matrix::Zero(t_len, grid.num_symbols());
  for (int t = 0; t < t_len; ++t) {
    for (int s = 0; s < s_len; ++s) {
      const double g = alpha(t, s) + beta(t, s) - ll;
      if (g != kLogZero) gamma(t, z[s]) += std::exp(g);
    }
  }
  return gamma;
}

Matrix CtcGrad(const CtcPosteriorGrid& grid, std::span<const int> labels) {
  const Matrix gamma = CtcOccupancy(grid, labels);
  return grid.logprobs.array().exp().matrix() - gamma;
}

TokenSequence GreedyDecode(const CtcPosteriorGrid& grid) {
  std::vector<int> path(grid.frames());
  for (int t = 0; t < grid.frames(); ++t) {
    int best = 0;
    for (int k = 1; k < grid.num_symbols(); ++k) {
      if (grid.logprobs(t, k) > grid.logprobs(t, best)) best = k;
    }
    path[t] = best;
  }
  return Collapse(path);
}

std::vector<Hypothesis> PrefixBeamSearch(const CtcPosteriorGrid& grid,
                                         const PrefixBeamOptions& options,
                                         const FusionConfig* fusion) {
  if (options.beam < 1) throw ConfigError("prefix beam search: beam < 1");
  const int num_symbols = grid.num_symbols();
  const double alpha = fusion != nullptr ? fusion->alpha : 0.0;
  const double beta = fusion != nullptr ? fusion->beta : 0.0;
  const std::vector<double>* prior = nullptr;
  if (fusion != nullptr && !fusion->log_prior.empty()) {
    if (static_cast<int>(fusion->log_prior.size()) != num_symbols) {
      throw ConfigError("prefix beam search: prior size mismatch");
    }
    prior = &fusion->log_prior;
  }
  const LmScorer* lm = fusion != nullptr ? fusion->external_lm : nullptr;
  const double blank_penalty = prior != nullptr ? alpha * (*prior)[0] : 0.0;

  struct State {
    double p_b = kLogZero;    // alignments ending in blank
    double p_nb = kLogZero;   // alignments ending in the last label
    double ext_sum = 0.0;     // accumulated log P_EXT
    double prior_sum = 0.0;   // accumulated label log prior
    double Total() const { return LogAdd(p_b, p_nb); }
  };
  using Beam = std::map<TokenSequence, State>;

  Beam beam;
  beam[{}].p_b = 0.0;

  std::vector<int> candidates;
  for (int t = 0; t < grid.frames(); ++t) {
    // Non-blank extension candidates: top-K columns by posterior.
    candidates.clear();
    for (int k = 1; k < num_symbols; ++k) candidates.push_back(k);
    const int keep =
        std::min<int>(options.expand_topk, static_cast<int>(candidates.size()));
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(), [&](int a, int b) {
                        if (grid.logprobs(t, a) != grid.logprobs(t, b)) {
                          return grid.logprobs(t, a) > grid.logprobs(t, b);
                        }
                        return a < b;
                      });
    candidates.resize(keep);

    Beam next;
    for (const auto& [prefix, state] : beam) {
      const double total = state.Total();
      // Blank transition keeps the prefix; blank_downscale applies here.
      {
        State& dst = next[prefix];
        dst.p_b = LogAdd(dst.p_b,
                         total + grid.logprobs(t, kBlankId) - blank_penalty);
        dst.ext_sum = state.ext_sum;
        dst.prior_sum = state.prior_sum;
      }
      const int last = prefix.empty() ? kBlankId : prefix.back();
      if (last != kBlankId) {
        // Repeated label without separating blank collapses into the same
        // prefix.
        State& dst = next[prefix];
        dst.p_nb = LogAdd(dst.p_nb, state.p_nb + grid.logprobs(t, last));
      }

      std::vector<double> lm_row;
      if (lm != nullptr) lm_row = lm->NextLogProbs(prefix);
      for (int k : candidates) {
        const double lm_k = lm != nullptr ? lm_row[ToLabelIndex(k)] : 0.0;
        const double prior_k = prior != nullptr ? (*prior)[k] : 0.0;
        const double bonus = beta * lm_k - alpha * prior_k;
        // A repeat right after p_nb collapses (handled above); only the
        // blank-terminated mass starts a new occurrence of `last`.
        const double base = (k == last) ? state.p_b : total;
        if (base == kLogZero) continue;
        TokenSequence extended = prefix;
        extended.push_back(k);
        State& dst = next[extended];
        dst.p_nb = LogAdd(dst.p_nb, base + grid.logprobs(t, k) + bonus);
        dst.ext_sum = state.ext_sum + lm_k;
        dst.prior_sum = state.prior_sum + prior_k;
      }
    }

    // Prune to the beam. std::map iteration is lexicographic, and
    // stable_sort keeps that order on score ties.
    std::vector<Beam::iterator> order;
    order.reserve(next.size());
    for (auto it = next.begin(); it != next.end(); ++it) order.push_back(it);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) {
                       return a->second.Total() > b->second.Total();
                     });
    Beam pruned;
    for (size_t i = 0; i < order.size() &&
                       i < static_cast<size_t>(options.beam); ++i) {
      pruned.insert(*order[i]);
    }
    beam = std::move(pruned);
  }

  std::vector<Hypothesis> out;
  out.reserve(beam.size());
  for (const auto& [prefix, state] : beam) {
    Hypothesis h;
    h.tokens = prefix;
    h.combined = state.Total();
    h.external = state.ext_sum;
    h.prior = state.prior_sum;
    h.acoustic = h.combined - beta * state.ext_sum + alpha * state.prior_sum;
    out.push_back(std::move(h));
  }
  std::sort(out.begin(), out.end(), HypothesisBefore);
  return out;
}

std::vector<double> MakePrior(PriorKind kind,
                              std::span<const CtcPosteriorGrid> grids,
                              int num_symbols, double blank_penalty) {
  std::vector<double> prior(num_symbols, 0.0);
  if (kind == PriorKind::kBlankDownscale) {
    prior[kBlankId] = blank_penalty;
    return prior;
  }
  if (grids.empty()) {
    throw DataError("make_prior: model_unigram requires at least one grid");
  }
  std::vector<double> mass(num_symbols, 0.0);
  double total = 0.0;
  for (const CtcPosteriorGrid& grid : grids) {
    if (grid.num_symbols() != num_symbols) {
      throw DataError("make_prior: grid symbol count mismatch");
    }
    for (int t = 0; t < grid.frames(); ++t) {
      for (int k = 1; k < num_symbols; ++k) {
        const double p = std::exp(grid.logprobs(t, k));
        mass[k] += p;
        total += p;
      }
    }
  }
  if (total <= 0.0) {
    throw NumericalError("make_prior: no non-blank posterior mass");
  }
  for (int k = 1; k < num_symbols; ++k) {
    prior[k] = std::log(mass[k]) - std::log(total);
  }
  return prior;
}

CtcHead InitCtcHead(int num_symbols, int enc_dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(enc_dim));
  std::uniform_real_distribution<double> dist(-s, s);
  CtcHead head;
  head.w = Matrix(num_symbols, enc_dim);
  for (Eigen::Index r = 0; r < head.w.rows(); ++r) {
    for (Eigen::Index c = 0; c < head.w.cols(); ++c) head.w(r, c) = dist(rng);
  }
  head.b = Vector::Zero(num_symbols);
  return head;
}

CtcPosteriorGrid HeadGrid(const CtcHead& head, const Matrix& encodings) {
  Matrix logits = encodings * head.w.transpose();
  logits.rowwise() += head.b.transpose();
  return GridFromLogits(logits);
}

void SaveCtcHead(const std::string& path, const CtcHead& head) {
  TensorFile file;
  file.SetMeta("kind", "ctc_head");
  file.Add("w", head.w);
  file.Add("b", head.b);
  file.Save(path);
}

CtcHead LoadCtcHead(const std::string& path) {
  const TensorFile file = TensorFile::Load(path);
  if (!file.HasMeta("kind") || file.GetMeta("kind") != "ctc_head") {
    throw DataError("ctc_head: " + path + " is not a CTC head file");
  }
  CtcHead head;
  head.w = file.Get("w");
  head.b = file.GetVector("b");
  return head;
}

}  // namespace latkit
