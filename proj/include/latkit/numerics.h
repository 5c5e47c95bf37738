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

#ifndef LATKIT_NUMERICS_H_
#define LATKIT_NUMERICS_H_

#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace latkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// log(0). All probabilities in the DP paths live in the log domain; -inf is
// the additive identity under LogAdd and is preserved by all routines here.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Returns log(exp(a) + exp(b)) without leaving the log domain.
// Shifts by max(a, b) so the argument of exp() is always <= 0.
double LogAdd(double a, double b);

// Returns log(sum_i exp(values[i])). Empty input yields kLogZero.
double LogSumExp(std::span<const double> values);

// Returns logits - LogSumExp(logits), i.e. log-probabilities that sum to one.
// Throws NumericalError if any input is NaN or +inf; kLogZero entries are
// allowed and stay kLogZero.
std::vector<double> LogSoftmax(std::span<const double> logits);
Vector LogSoftmax(const Vector& logits);

// Row-wise LogSoftmax, used to turn a T x K logit matrix into a
// log-posterior grid.
Matrix LogSoftmaxRows(const Matrix& logits);

}  // namespace latkit

#endif  // LATKIT_NUMERICS_H_
