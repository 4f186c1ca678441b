/*
 * Copyright 2026 The riskstack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>

#include "riskstack/common.hpp"

namespace riskstack {

struct LogisticFit {
  Vector weights;
  double intercept = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

/// Newton / IRLS for L2-regularized logistic regression. Minimizes
///   (1/n) sum_i [log(1 + e^{z_i}) - y_i z_i] + (l2 / 2n) ||w||^2
/// with z = X w + b; the intercept is not penalized. Stops when the
/// gradient 2-norm drops below `tol` or after `max_iter` Newton steps.
LogisticFit fit_logistic(const Matrix& x, const LabelVector& y, double l2,
                         int max_iter = 100, double tol = 1e-8);

struct LinearSvcFit {
  Vector weights;
  double intercept = 0.0;
  double platt_scale = 1.0;   // p = sigmoid(platt_scale * margin + platt_offset)
  double platt_offset = 0.0;
};

/// Averaged stochastic subgradient descent on
///   (lambda / 2) ||w||^2 + mean_i max(0, 1 - t_i (w.x_i + b)),  t_i = +-1,
/// for a fixed number of epochs, followed by a logistic link fitted on the
/// training margins.
LinearSvcFit fit_linear_svc(const Matrix& x, const LabelVector& y, double lambda,
                            int epochs, std::uint64_t seed);

}  // namespace riskstack
