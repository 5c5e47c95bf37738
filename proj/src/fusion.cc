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

#include "latkit/fusion.h"

#include <algorithm>

namespace latkit {

double LmScorer::Score(std::span<const int> tokens) const {
  double total = 0.0;
  for (size_t u = 0; u < tokens.size(); ++u) {
    const std::vector<double> lp = NextLogProbs(tokens.subspan(0, u));
    total += lp[ToLabelIndex(tokens[u])];
  }
  return total;
}

bool HypothesisBefore(const Hypothesis& a, const Hypothesis& b) {
  if (a.combined != b.combined) return a.combined > b.combined;
  return std::lexicographical_compare(a.tokens.begin(), a.tokens.end(),
                                      b.tokens.begin(), b.tokens.end());
}

}  // namespace latkit
