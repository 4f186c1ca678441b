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

#include "riskstack/synthetic.hpp"

#include <cmath>
#include <limits>

namespace riskstack {

const std::vector<std::string>& brfss_feature_names() {
  static const std::vector<std::string> names{
      "HighBP",   "HighChol",  "CholCheck", "BMI",          "Smoker",
      "Stroke",   "HeartDiseaseorAttack",   "PhysActivity", "Fruits",
      "Veggies",  "HvyAlcoholConsump",      "AnyHealthcare", "NoDocbcCost",
      "GenHlth",  "MentHlth",  "PhysHlth",  "DiffWalk",     "Sex",
      "Age",      "Education", "Income"};
  return names;
}

namespace {

double bernoulli(Rng& rng, double logit_p) { return rng.uniform() < sigmoid(logit_p) ? 1.0 : 0.0; }

double clamp_round(double v, double lo, double hi) { return std::clamp(std::round(v), lo, hi); }

}  // namespace

Dataset synthetic_brfss(Index rows, std::uint64_t seed, double positive_rate,
                        double missing_rate) {
  const auto& names = brfss_feature_names();
  const Index p = static_cast<Index>(names.size());
  Matrix x(rows, p);
  Vector risk(rows);
  Rng rng(seed);
  for (Index i = 0; i < rows; ++i) {
    const double age = clamp_round(1 + 12 * std::sqrt(rng.uniform()), 1, 13);
    const double frailty = rng.normal() + 0.15 * (age - 7);
    const double wealth = rng.normal();
    const double bmi = clamp_round(28 + 5.5 * rng.normal() + 1.5 * frailty, 12, 98);
    const double high_bp = bernoulli(rng, -0.6 + 0.8 * frailty + 0.08 * (bmi - 28));
    const double high_chol = bernoulli(rng, -0.4 + 0.6 * frailty);
    const double gen_hlth = clamp_round(2.5 + 0.9 * frailty - 0.3 * wealth + 0.4 * rng.normal(), 1, 5);
    const double income = clamp_round(6 + 1.8 * wealth, 1, 8);
    const double education = clamp_round(4.5 + 0.9 * wealth + 0.5 * rng.normal(), 1, 6);
    const double phys = clamp_round(std::max(0.0, 4 * frailty + 3 * rng.normal()), 0, 30);
    const double ment = clamp_round(std::max(0.0, 2 + 3 * rng.normal() - wealth), 0, 30);
    const double row[] = {
        high_bp,
        high_chol,
        bernoulli(rng, 3.0),
        bmi,
        bernoulli(rng, -0.2 + 0.2 * frailty),
        bernoulli(rng, -3.5 + 0.7 * frailty),
        bernoulli(rng, -2.8 + 0.8 * frailty),
        bernoulli(rng, 1.0 - 0.6 * frailty + 0.3 * wealth),
        bernoulli(rng, 0.4 + 0.2 * wealth),
        bernoulli(rng, 1.5 + 0.2 * wealth),
        bernoulli(rng, -2.8),
        bernoulli(rng, 2.8 + 0.5 * wealth),
        bernoulli(rng, -2.2 - 0.5 * wealth),
        gen_hlth,
        ment,
        phys,
        bernoulli(rng, -2.0 + 1.1 * frailty),
        bernoulli(rng, -0.2),
        age,
        education,
        income};
    for (Index j = 0; j < p; ++j) x(i, j) = row[j];
    risk(i) = 0.9 * (gen_hlth - 2.5) + 0.9 * high_bp + 0.09 * (bmi - 28) + 0.18 * (age - 7) +
              0.5 * high_chol - 0.08 * (income - 6) + 0.4 * x(i, 6) + 0.6 * rng.normal();
  }

  // Intercept chosen so the expected positive share matches positive_rate.
  double lo = -20.0;
  double hi = 20.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rate = (risk.array() + mid).unaryExpr([](double v) { return sigmoid(v); }).mean();
    (rate < positive_rate ? lo : hi) = mid;
  }
  LabelVector y(rows);
  for (Index i = 0; i < rows; ++i) y(i) = rng.uniform() < sigmoid(risk(i) + lo) ? 1 : 0;

  if (missing_rate > 0) {
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < p; ++j) {
        if (rng.uniform() < missing_rate) x(i, j) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  Dataset d = make_dataset(std::move(x), std::move(y), names, "Diabetes_binary");
  return d;
}

}  // namespace riskstack
