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
#include <string>
#include <vector>

#include "riskstack/dataset.hpp"

namespace riskstack {

/// The 21 survey columns of the diabetes health-indicators table, in file order.
const std::vector<std::string>& brfss_feature_names();

/// Synthetic rows with the survey's column names and value codings. The
/// label comes from a logistic model on a shared latent health factor, so
/// features are correlated and informative but nothing here is real data.
/// `missing_rate` blanks random cells (labels are never missing).
Dataset synthetic_brfss(Index rows, std::uint64_t seed, double positive_rate = 0.14,
                        double missing_rate = 0.0);

}  // namespace riskstack
