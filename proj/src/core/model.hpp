// Copyright 2026 The UNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "dataset.hpp"
#include "losses.hpp"
#include "neighbors.hpp"

namespace unn {

/// Prototypes with their leveraging coefficients alpha (one row of C reals per
/// prototype). After filtering, `prototypes` holds only the retained rows and
/// `original_ids` maps them back to training indices.
struct LeveragedModel {
    Dataset prototypes;
    std::vector<double> alpha;  // row-major, size() x C
    std::size_t k = 0;
    Metric metric = Metric::Euclidean;
    LossKind loss = LossKind::Exponential;
    std::vector<std::size_t> original_ids;
    // Per-class prototype pools (indices into prototypes). Empty means every
    // class searches the whole prototype set.
    std::vector<std::vector<std::size_t>> class_pools;

    std::size_t size() const { return prototypes.size(); }
    int num_classes() const { return prototypes.num_classes(); }
    double coeff(std::size_t j, int c) const {
        return alpha[j * static_cast<std::size_t>(num_classes()) + static_cast<std::size_t>(c)];
    }
    double& coeff(std::size_t j, int c) {
        return alpha[j * static_cast<std::size_t>(num_classes()) + static_cast<std::size_t>(c)];
    }
    bool per_class() const { return !class_pools.empty(); }

    bool operator==(const LeveragedModel& o) const;
};

// Untrained model over `prototypes`: alpha is all zero.
LeveragedModel make_model(Dataset prototypes, std::size_t k, Metric metric, LossKind loss);

inline constexpr int kModelFormatVersion = 1;

// Versioned text format; doubles use shortest round-trip notation so a
// save/load cycle is bit-exact.
void save_model(const LeveragedModel& model, const std::string& path);
LeveragedModel load_model(const std::string& path);
std::string serialize_model(const LeveragedModel& model);
LeveragedModel deserialize_model(const std::string& text, const std::string& origin = "<memory>");

}  // namespace unn
