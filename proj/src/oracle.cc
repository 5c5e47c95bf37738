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

#include "latkit/oracle.h"

#include <cmath>
#include <map>
#include <vector>

#include "latkit/error.h"
#include "latkit/numerics.h"

namespace latkit::oracle {
namespace {

long double ExpL(double x) {
  return std::exp(static_cast<long double>(x));
}

double LogL(long double x) { return static_cast<double>(std::log(x)); }

// Local repeat-collapse + blank-removal so the oracle does not lean on the
// production Collapse.
TokenSequence CollapseAlignment(std::span<const int> alignment) {
  TokenSequence out;
  int prev = -1;
  for (int s : alignment) {
    if (s != prev && s != kBlankId) out.push_back(s);
    prev = s;
  }
  return out;
}

void CheckAlignmentBudget(int num_symbols, int frames,
                          const EnumerationBudget& budget) {
  long double paths = 1.0L;
  for (int t = 0; t < frames; ++t) {
    paths *= static_cast<long double>(num_symbols);
    if (paths > static_cast<long double>(budget.max_paths)) {
      throw ConfigError("oracle: alignment enumeration exceeds budget");
    }
  }
}

// Visits every alignment in (num_symbols)^frames odometer order and hands
// (alignment, direct-domain weight) to the sink. weight(t, k) supplies the
// per-cell factor.
template <typename WeightFn, typename Sink>
void ForEachAlignment(int frames, int num_symbols, WeightFn weight,
                      Sink sink) {
  std::vector<int> alignment(frames, 0);
  std::vector<long double> prefix(frames + 1, 1.0L);
  int t = 0;
  for (;;) {
    for (; t < frames; ++t) {
      prefix[t + 1] = prefix[t] * weight(t, alignment[t]);
    }
    sink(alignment, prefix[frames]);
    // Advance the odometer, keeping the shared prefix products.
    for (t = frames - 1; t >= 0; --t) {
      if (++alignment[t] < num_symbols) break;
      alignment[t] = 0;
    }
    if (t < 0) return;
  }
}

long double RnntPathSum(const RnntLattice& lattice,
                        std::span<const int> labels, long long* explored,
                        long long max_paths) {
  const int frames = lattice.frames;
  const int target = static_cast<int>(labels.size());
  long double total = 0.0L;
  // Explicit move walk: blank advances the frame, a label consumes the next
  // target symbol without advancing. Paths die at t == frames with u short.
  struct Frame {
    int t, u;
    long double weight;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 0, 1.0L});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.t == frames) {
      if (++*explored > max_paths) {
        throw ConfigError("oracle: path enumeration exceeds budget");
      }
      if (f.u == target) total += f.weight;
      continue;
    }
    const HatDistribution& node = lattice.at(f.t, f.u);
    stack.push_back({f.t + 1, f.u, f.weight * ExpL(node.log_blank)});
    if (f.u < target) {
      const int label = ToLabelIndex(labels[f.u]);
      const long double w = ExpL(node.log_not_blank) *
                            ExpL(node.log_labels[static_cast<size_t>(label)]);
      stack.push_back({f.t, f.u + 1, f.weight * w});
    }
  }
  return total;
}

double ExternalScore(const FusionConfig* fusion, std::span<const int> tokens) {
  if (fusion == nullptr || fusion->external_lm == nullptr) return 0.0;
  return fusion->external_lm->Score(tokens);
}

}  // namespace

double BruteCtcProb(const CtcPosteriorGrid& grid, std::span<const int> labels,
                    const EnumerationBudget& budget) {
  const int frames = grid.frames();
  const int num_symbols = grid.num_symbols();
  CheckAlignmentBudget(num_symbols, frames, budget);
  const TokenSequence want(labels.begin(), labels.end());
  long double total = 0.0L;
  ForEachAlignment(
      frames, num_symbols,
      [&](int t, int k) { return ExpL(grid.logprobs(t, k)); },
      [&](const std::vector<int>& alignment, long double weight) {
        if (CollapseAlignment(alignment) == want) total += weight;
      });
  if (total <= 0.0L) return kLogZero;
  return LogL(total);
}

double BruteRnntProb(const RnntLattice& lattice, std::span<const int> labels,
                     const EnumerationBudget& budget) {
  if (static_cast<int>(labels.size()) != lattice.target_len) {
    throw DataError("oracle: label length does not match lattice");
  }
  if (lattice.frames == 0) return labels.empty() ? 0.0 : kLogZero;
  long long explored = 0;
  const long double total =
      RnntPathSum(lattice, labels, &explored, budget.max_paths);
  if (total <= 0.0L) return kLogZero;
  return LogL(total);
}

Hypothesis BruteBestCtc(const CtcPosteriorGrid& grid,
                        const FusionConfig* fusion, int max_len,
                        const EnumerationBudget& budget) {
  const int frames = grid.frames();
  const int num_symbols = grid.num_symbols();
  CheckAlignmentBudget(num_symbols, frames, budget);
  const double alpha = fusion != nullptr ? fusion->alpha : 0.0;
  const double beta = fusion != nullptr ? fusion->beta : 0.0;
  const std::vector<double>* prior =
      (fusion != nullptr && !fusion->log_prior.empty()) ? &fusion->log_prior
                                                        : nullptr;
  const double blank_penalty =
      prior != nullptr ? alpha * (*prior)[kBlankId] : 0.0;

  // One enumeration pass groups alignment mass by collapsed sequence. The
  // blank_downscale penalty scales blank emissions, matching the acoustic
  // accounting of the beam search.
  std::map<TokenSequence, long double> mass;
  ForEachAlignment(
      frames, num_symbols,
      [&](int t, int k) {
        double lp = grid.logprobs(t, k);
        if (k == kBlankId) lp -= blank_penalty;
        return ExpL(lp);
      },
      [&](const std::vector<int>& alignment, long double weight) {
        if (weight > 0.0L) mass[CollapseAlignment(alignment)] += weight;
      });

  Hypothesis best;
  best.combined = kLogZero;
  bool have = false;
  // std::map iterates candidates in ascending lexicographic order, so a
  // strict > comparison realizes the shared tie rule.
  for (const auto& [tokens, m] : mass) {
    if (static_cast<int>(tokens.size()) > max_len || m <= 0.0L) continue;
    Hypothesis h;
    h.tokens = tokens;
    h.acoustic = LogL(m);
    for (int id : tokens) h.prior += prior != nullptr ? (*prior)[id] : 0.0;
    h.external = ExternalScore(fusion, tokens);
    h.combined = h.acoustic - alpha * h.prior + beta * h.external;
    if (!have || h.combined > best.combined) {
      best = std::move(h);
      have = true;
    }
  }
  return best;
}

Hypothesis BruteBestRnnt(const TransducerModel& model, const Matrix& enc,
                         const FusionConfig* fusion, int max_len,
                         const EnumerationBudget& budget) {
  const int num_labels = model.num_labels();
  const double alpha = fusion != nullptr ? fusion->alpha : 0.0;
  const double beta = fusion != nullptr ? fusion->beta : 0.0;
  long long explored = 0;

  Hypothesis best;
  best.combined = kLogZero;
  bool have = false;
  // Depth-first preorder over piece-id sequences is ascending lexicographic,
  // so a strict > comparison realizes the shared tie rule.
  TokenSequence tokens;
  auto visit = [&](auto&& self) -> void {
    RnntLattice lattice = BuildLattice(model, enc, tokens);
    const long double m =
        RnntPathSum(lattice, tokens, &explored, budget.max_paths);
    if (m > 0.0L) {
      Hypothesis h;
      h.tokens = tokens;
      h.acoustic = LogL(m);
      h.prior = alpha != 0.0 ? IlmScore(model, tokens) : 0.0;
      h.external = ExternalScore(fusion, tokens);
      h.combined = h.acoustic - alpha * h.prior + beta * h.external;
      if (!have || h.combined > best.combined) {
        best = std::move(h);
        have = true;
      }
    }
    if (static_cast<int>(tokens.size()) >= max_len) return;
    for (int v = 1; v <= num_labels; ++v) {
      tokens.push_back(v);
      self(self);
      tokens.pop_back();
    }
  };
  visit(visit);
  return best;
}

}  // namespace latkit::oracle
