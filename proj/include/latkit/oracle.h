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

#ifndef LATKIT_ORACLE_H_
#define LATKIT_ORACLE_H_

#include <span>

#include "latkit/ctc.h"
#include "latkit/fusion.h"
#include "latkit/transducer.h"

// Brute-force reference implementations for tests and the oracle-check CLI
// verb. These enumerate alignments and hypotheses in the direct probability
// domain with extended precision; they share model evaluation (grids,
// lattices, joint) with the production code, since that is the quantity
// under test, but none of the dynamic programming or search code.
namespace latkit::oracle {

struct EnumerationBudget {
  long long max_paths = 10'000'000;
};

// Sum over all (|V|+1)^T alignments whose collapse equals y. Returns
// kLogZero for unreachable y (e.g. infeasible length). Throws ConfigError
// when the enumeration exceeds the budget.
double BruteCtcProb(const CtcPosteriorGrid& grid, std::span<const int> labels,
                    const EnumerationBudget& budget = {});

// Sum over all blank/label interleavings of the lattice for y, walking
// moves explicitly; the terminal blank out of (T-1, U) is part of every
// path.
double BruteRnntProb(const RnntLattice& lattice, std::span<const int> labels,
                     const EnumerationBudget& budget = {});

// Exhaustive fused-objective argmax over every label sequence with
// |y| <= max_len, CTC flavor. Applies the same fusion accounting as
// PrefixBeamSearch (blank_downscale folded into the acoustic mass) and the
// shared tie rule.
Hypothesis BruteBestCtc(const CtcPosteriorGrid& grid,
                        const FusionConfig* fusion, int max_len,
                        const EnumerationBudget& budget = {});

// Exhaustive fused-objective argmax, transducer flavor: for every y with
// |y| <= max_len, acoustic mass by brute path enumeration, minus
// alpha * IlmScore, plus beta * log P_EXT.
Hypothesis BruteBestRnnt(const TransducerModel& model, const Matrix& enc,
                         const FusionConfig* fusion, int max_len,
                         const EnumerationBudget& budget = {});

}  // namespace latkit::oracle

#endif  // LATKIT_ORACLE_H_
