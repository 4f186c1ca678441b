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

#include "riskstack/linear.hpp"

#include "riskstack/tree.hpp"  // logistic_loss

namespace riskstack {

LogisticFit fit_logistic(const Matrix& x, const LabelVector& y, double l2,
                         int max_iter, double tol) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n == 0) throw TrainingError("logistic regression needs at least one row");
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector target = y.cast<double>();

  Vector theta = Vector::Zero(p + 1);  // [intercept, weights]
  {
    const double prior = std::clamp(target.mean(), 1e-6, 1.0 - 1e-6);
    theta(0) = logit(prior);
  }
  Vector penalty = Vector::Constant(p + 1, l2 * inv_n);
  penalty(0) = 0.0;

  auto scores = [&](const Vector& th) -> Vector {
    return (x * th.tail(p)).array() + th(0);
  };
  auto objective = [&](const Vector& th) {
    const Vector z = scores(th);
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += logistic_loss(z(i), y(i));
    return s * inv_n + 0.5 * th.tail(p).squaredNorm() * l2 * inv_n;
  };

  LogisticFit fit;
  Vector grad(p + 1);
  for (int iter = 0;; ++iter) {
    const Vector z = scores(theta);
    const Vector prob = z.unaryExpr([](double v) { return sigmoid(v); });
    const Vector resid = prob - target;
    grad(0) = resid.sum() * inv_n;
    grad.tail(p) = x.transpose() * resid * inv_n;
    grad += penalty.cwiseProduct(theta);
    fit.gradient_norm = grad.norm();
    fit.iterations = iter;
    if (fit.gradient_norm < tol) {
      fit.converged = true;
      break;
    }
    if (iter >= max_iter) break;

    const Vector w = prob.array() * (1.0 - prob.array());
    Matrix hess(p + 1, p + 1);
    hess(0, 0) = w.sum();
    const Vector xw = x.transpose() * w;
    hess.block(0, 1, 1, p) = xw.transpose();
    hess.block(1, 0, p, 1) = xw;
    hess.block(1, 1, p, p) = x.transpose() * (x.array().colwise() * w.array()).matrix();
    hess *= inv_n;
    hess.diagonal() += penalty;
    hess.diagonal().array() += 1e-12;

    const Vector step = hess.ldlt().solve(grad);
    const double f0 = objective(theta);
    const double slope = grad.dot(step);
    double t = 1.0;
    Vector candidate = theta - step;
    for (int k = 0; k < 40 && objective(candidate) > f0 - 1e-4 * t * slope; ++k) {
      t *= 0.5;
      candidate = theta - t * step;
    }
    theta = candidate;
  }
  fit.intercept = theta(0);
  fit.weights = theta.tail(p);
  return fit;
}

LinearSvcFit fit_linear_svc(const Matrix& x, const LabelVector& y, double lambda,
                            int epochs, std::uint64_t seed) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (!(lambda > 0)) throw TrainingError("linear_svc lambda must be > 0");
  if (epochs < 1) throw TrainingError("linear_svc epochs must be >= 1");

  Vector w = Vector::Zero(p);
  double b = 0.0;
  Vector w_avg = Vector::Zero(p);
  double b_avg = 0.0;
  const double eta0 = 1.0;
  Rng rng(seed);
  std::vector<Index> order = iota_indices(n);
  std::uint64_t step = 0;
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    for (Index i : order) {
      const double sign = y(i) == 1 ? 1.0 : -1.0;
      const double eta = eta0 / (1.0 + lambda * eta0 * static_cast<double>(step));
      const double margin = sign * (x.row(i).dot(w) + b);
      w *= 1.0 - eta * lambda;
      if (margin < 1.0) {
        w += eta * sign * x.row(i).transpose();
        b += eta * sign;
      }
      ++step;
      const double mix = 1.0 / static_cast<double>(step);
      w_avg += mix * (w - w_avg);
      b_avg += mix * (b - b_avg);
    }
  }

  LinearSvcFit fit;
  fit.weights = w_avg;
  fit.intercept = b_avg;
  const Matrix margins = ((x * w_avg).array() + b_avg).matrix();
  const LogisticFit link = fit_logistic(margins, y, 1e-3);
  fit.platt_scale = link.weights(0);
  fit.platt_offset = link.intercept;
  return fit;
}

}  // namespace riskstack
