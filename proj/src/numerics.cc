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

#include "latkit/numerics.h"

#include <algorithm>
#include <cmath>

#include "latkit/error.h"

namespace latkit {

double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  // log(e^a + e^b) = max + log1p(e^{min - max}); the exp argument is <= 0.
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double LogSumExp(std::span<const double> values) {
  if (values.empty()) return kLogZero;
  const double m = *std::max_element(values.begin(), values.end());
  if (m == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

std::vector<double> LogSoftmax(std::span<const double> logits) {
  for (double v : logits) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw NumericalError("LogSoftmax: non-finite logit");
    }
  }
  const double z = LogSumExp(logits);
  if (z == kLogZero) {
    throw NumericalError("LogSoftmax: all logits are log-zero");
  }
  std::vector<double> out(logits.begin(), logits.end());
  for (double& v : out) v -= z;
  return out;
}

Vector LogSoftmax(const Vector& logits) {
  std::vector<double> out =
      LogSoftmax(std::span<const double>(logits.data(), logits.size()));
  return Eigen::Map<const Vector>(out.data(), out.size());
}

Matrix LogSoftmaxRows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  std::vector<double> row(logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    for (Eigen::Index k = 0; k < logits.cols(); ++k) row[k] = logits(t, k);
    const std::vector<double> lp = LogSoftmax(row);
    for (Eigen::Index k = 0; k < logits.cols(); ++k) out(t, k) = lp[k];
  }
  return out;
}

}  // namespace latkit
