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

#ifndef LATKIT_CTC_H_
#define LATKIT_CTC_H_

#include <span>
#include <string>
#include <vector>

#include "latkit/fusion.h"
#include "latkit/numerics.h"
#include "latkit/vocab.h"

namespace latkit {

// Frame-level log posteriors log P(a_t | h), rows log-normalized, blank in
// column 0. Columns are piece ids.
struct CtcPosteriorGrid {
  Matrix logprobs;

  int frames() const { return static_cast<int>(logprobs.rows()); }
  int num_symbols() const { return static_cast<int>(logprobs.cols()); }
};

// Row log-softmax over raw logits. Throws NumericalError on non-finite rows.
CtcPosteriorGrid GridFromLogits(const Matrix& logits);

// Throws DataError unless every row log-sums to 0 within tolerance.
void ValidateGrid(const CtcPosteriorGrid& grid, double tolerance = 1e-9);

// Repeat-collapse, then blank removal, in that order.
TokenSequence Collapse(std::span<const int> alignment);

// True iff frames >= |y| + (number of adjacent equal-label pairs in y), the
// minimum alignment length. Infeasible training pairs are discarded.
bool CtcIsFeasible(std::span<const int> labels, int frames);

// log P(y|x) by the forward recursion over the 2U+1 expanded label sequence.
// Throws DataError when (labels, T) is infeasible or a label id is out of
// range for the grid.
double CtcLoss(const CtcPosteriorGrid& grid, std::span<const int> labels);

// Posterior symbol occupancy gamma from forward-backward; rows sum to one.
Matrix CtcOccupancy(const CtcPosteriorGrid& grid,
                    std::span<const int> labels);

// d(-log P(y|x)) / d logits = softmax(logits) - gamma, as a T x K matrix.
Matrix CtcGrad(const CtcPosteriorGrid& grid, std::span<const int> labels);

// Per-frame argmax (ties to the lowest id, so blank wins ties) followed by
// Collapse.
TokenSequence GreedyDecode(const CtcPosteriorGrid& grid);

struct PrefixBeamOptions {
  int beam = 8;
  // Non-blank extension candidates per frame, by grid posterior. Blank and
  // last-label repeat transitions are always taken.
  int expand_topk = 16;
};

// CTC prefix beam search: per-prefix (p_blank, p_nonblank) masses merge all
// alignments that collapse to the same prefix. With fusion, each non-blank
// extension adds beta * log P_EXT(k|prefix) - alpha * prior[k], and blank
// emissions are downscaled by alpha * prior[blank] (the blank_downscale
// penalty, folded into the acoustic component). Ranking and returned
// combined scores use the fused mass.
std::vector<Hypothesis> PrefixBeamSearch(const CtcPosteriorGrid& grid,
                                         const PrefixBeamOptions& options,
                                         const FusionConfig* fusion);

enum class PriorKind { kBlankDownscale, kModelUnigram };

// Log prior over V union blank, length num_symbols, for FusionConfig.
// blank_downscale: zero log prior on labels plus the penalty scalar in slot
// 0. model_unigram: slot 0 zero, labels carry normalized expected posterior
// mass over all frames of the provided grids (DataError when grids is
// empty).
std::vector<double> MakePrior(PriorKind kind,
                              std::span<const CtcPosteriorGrid> grids,
                              int num_symbols, double blank_penalty);

// Linear CTC head over encoder embeddings.
struct CtcHead {
  Matrix w;  // num_symbols x enc_dim
  Vector b;  // num_symbols
};

CtcHead InitCtcHead(int num_symbols, int enc_dim, uint64_t seed);
CtcPosteriorGrid HeadGrid(const CtcHead& head, const Matrix& encodings);

void SaveCtcHead(const std::string& path, const CtcHead& head);
CtcHead LoadCtcHead(const std::string& path);

}  // namespace latkit

#endif  // LATKIT_CTC_H_
