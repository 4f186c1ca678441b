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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "riskstack/dataset.hpp"

namespace riskstack {

enum class RankMethod { mi, rfe, lasso };

std::string to_string(RankMethod method);

/// One method's ordering of the features. rank 1 is best.
struct MethodRanking {
  RankMethod method = RankMethod::mi;
  std::vector<std::string> features;
  std::vector<int> rank;
  std::vector<double> score;
  std::vector<std::string> elimination_order;  // rfe only, first eliminated first

  int rank_of(const std::string& name) const;
  double score_of(const std::string& name) const;
  /// Names ordered best first.
  std::vector<std::string> ordered() const;
};

struct FeatureRanking {
  std::vector<MethodRanking> methods;
  std::vector<std::string> features;
  std::vector<double> aggregate;  // mean normalized rank, 0 best
  std::vector<std::string> selected;
};

/// Ranks 1..p by score (higher first unless `higher_is_better` is false),
/// ties broken by name.
std::vector<int> rank_scores(std::span<const double> scores,
                             std::span<const std::string> names,
                             bool higher_is_better = true);

/// Plug-in mutual information (nats) of two discrete code vectors.
double mutual_information(std::span<const int> a, std::span<const int> b);

/// Plug-in mutual information (nats) of a contingency table of counts.
double mutual_information(const Matrix& counts);

/// Discrete codes for one column: binary and ordinal values are used as-is,
/// continuous values go into at most `bins` quantile bins.
std::vector<int> discretize(const Eigen::Ref<const Vector>& column, FeatureKind kind,
                            int bins);

MethodRanking mutual_info(const Dataset& data, int bins = 10);

/// Recursive elimination with L2 logistic regression on standardized
/// features, one feature per round. Survivors rank 1..keep by name; the
/// rest rank by reverse elimination order.
MethodRanking rfe(const Dataset& data, int keep, double l2 = 1.0);

struct LassoFit {
  Vector coefficients;
  double intercept = 0.0;
  double lambda = 0.0;
  int iterations_run = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // after each full sweep
};

template <typename Scalar>
inline Scalar soft_threshold(Scalar z, Scalar lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return Scalar(0);
}

/// (1/2n) ||y - X beta - b||^2 + lambda ||beta||_1
template <typename DX, typename DY>
double lasso_objective(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                       const Vector& beta, double intercept, double lambda) {
  const double n = static_cast<double>(x.rows());
  const Vector resid = (y - x * beta).array() - intercept;
  return resid.squaredNorm() / (2.0 * n) + lambda * beta.cwiseAbs().sum();
}

/// Smallest lambda with an all-zero solution: max_j |x_j^T (y - ybar)| / n
/// over centered columns.
template <typename DX, typename DY>
double lasso_lambda_max(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
  const double n = static_cast<double>(x.rows());
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Vector yc = y.array() - y.mean();
  return (xc.transpose() * yc).cwiseAbs().maxCoeff() / n;
}

/// Cyclic coordinate descent for the LASSO with an unpenalized intercept.
/// Each update is beta_j <- S(rho_j, lambda) / z_j with
/// rho_j = x_j^T r / n + z_j beta_j and z_j = ||x_j||^2 / n on centered
/// columns. Stops once a full sweep moves no coefficient by `tol` or more.
template <typename DX, typename DY>
LassoFit lasso_coordinate_descent(const Eigen::MatrixBase<DX>& x,
                                  const Eigen::MatrixBase<DY>& y, double lambda,
                                  double tol = 1e-7, int max_sweeps = 10000) {
  const Index n = x.rows();
  const Index p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Matrix xc = x.rowwise() - x_mean;
  Vector resid = y.array() - y_mean;
  const Vector z = xc.colwise().squaredNorm().transpose() * inv_n;

  LassoFit fit;
  fit.lambda = lambda;
  fit.coefficients = Vector::Zero(p);
  Vector& beta = fit.coefficients;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (z(j) <= 0.0) continue;
      const double rho = xc.col(j).dot(resid) * inv_n + z(j) * beta(j);
      double updated = soft_threshold(rho, lambda) / z(j);
      const double excess = std::abs(rho) - lambda;
      if (updated != 0.0 && excess <= 1e-8 * lambda) {
        // |rho| exceeds lambda by less than the rounding error of the dot
        // product: the exact value may sit on the threshold.
        const double bound = (xc.col(j).cwiseAbs().dot(resid.cwiseAbs()) * inv_n +
                              z(j) * std::abs(beta(j))) *
                             static_cast<double>(n + 2) * std::numeric_limits<double>::epsilon();
        if (excess <= bound) updated = 0.0;
      }
      const double delta = updated - beta(j);
      if (delta != 0.0) {
        resid.noalias() -= delta * xc.col(j);
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    fit.iterations_run = sweep;
    fit.objective_trace.push_back(resid.squaredNorm() * inv_n * 0.5 +
                                  lambda * beta.cwiseAbs().sum());
    if (max_change < tol) {
      fit.converged = true;
      break;
    }
  }
  fit.intercept = y_mean - x_mean.dot(beta);
  return fit;
}

/// Column means and 1/n standard deviations; constant columns get scale 1.
void standardize_columns(const Matrix& x, Matrix& out, Vector& center, Vector& scale);

/// LASSO of the 0/1 label on standardized features. Coefficients are on the
/// standardized scale.
LassoFit lasso_fit(const Dataset& data, double lambda, double tol = 1e-7,
                   int max_sweeps = 10000);

/// Ranks by |coefficient| at lambda_max / 100; zero coefficients rank last.
MethodRanking lasso_rank(const Dataset& data);

/// Mean of (rank - 1) / (p - 1) across methods; keeps the `keep` lowest,
/// ties broken by name.
FeatureRanking aggregate(std::span<const MethodRanking> rankings, int keep);

/// MI + RFE + LASSO followed by aggregate().
FeatureRanking rank_features(const Dataset& data, int keep);

nlohmann::json to_json(const MethodRanking& ranking);
nlohmann::json to_json(const FeatureRanking& ranking);
std::string format_table(const FeatureRanking& ranking);

}  // namespace riskstack
