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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"
#include "neighbors.hpp"

namespace unn {

enum class Rule { Classic, Leveraged };
std::string to_string(Rule r);
Rule parse_rule(const std::string& s);

struct Contribution {
    std::size_t prototype_id = 0;  // original training index
    int c = 0;
    double value = 0.0;            // alpha_jc * y_jc
};

struct Prediction {
    std::vector<double> scores;
    int label = 0;
    bool tie = false;  // several classes shared the maximum score
    std::vector<Contribution> contributions;
};

// Index of the largest score; ties go to the lowest class index.
int argmax_lowest(std::span<const double> scores, bool* tie = nullptr);

// Uniform vote: scores[c] counts the k nearest prototypes of class c.
Prediction score_classic(std::span<const double> query, const Dataset& prototypes, std::size_t k,
                         Metric metric = Metric::Euclidean);

// Leveraged vote: scores[c] = sum over the k nearest retained prototypes of
// alpha_jc * y_jc.
Prediction score_leveraged(std::span<const double> query, const LeveragedModel& model,
                           bool with_contributions = false);

/// Reusable search structure over a model's prototypes (one index per class
/// pool when the model has per-class pools).
class Scorer {
public:
    Scorer(const LeveragedModel& model, Backend backend = Backend::KdTree);

    Prediction leveraged(std::span<const double> query, std::size_t k, bool with_contributions = false) const;
    Prediction classic(std::span<const double> query, std::size_t k) const;

private:
    const LeveragedModel& model_;
    std::vector<NeighborIndex> indexes_;
};

// k = 0 uses model.k.
std::vector<Prediction> predict_batch(const LeveragedModel& model, const Dataset& queries, Rule rule,
                                      std::size_t k = 0, Backend backend = Backend::KdTree,
                                      bool with_contributions = false);

inline constexpr int kPredictionsFormatVersion = 1;
// query,label,score_<class>... with class names as labels.
std::string predictions_csv(const std::vector<Prediction>& predictions, const std::vector<std::string>& class_names);
// query,prototype,class,value; prototype is the original training index.
std::string contributions_csv(const std::vector<Prediction>& predictions,
                              const std::vector<std::string>& class_names);

struct FilterSpec {
    enum class Mode { Threshold, Fraction };
    Mode mode = Mode::Fraction;
    double alpha_tilde = 0.0;  // threshold mode: keep j iff max_c alpha_jc > alpha_tilde
    double theta = 1.0;        // fraction mode: keep ceil(theta m) rows with largest ||alpha_j||^2
    bool per_class = false;    // separate pools per class instead of one shared pool
    bool exclude_nonpositive = false;  // fraction mode: drop rows whose max_c alpha_jc <= 0

    static FilterSpec threshold(double alpha_tilde);
    static FilterSpec fraction(double theta);
    std::string describe() const;
};

// Rows whose coefficients are all zero are always dropped.
LeveragedModel filter_model(const LeveragedModel& model, const FilterSpec& spec);

// ceil(theta * m), robust to representation error in theta * m.
std::size_t retained_count(double theta, std::size_t m);

}  // namespace unn
