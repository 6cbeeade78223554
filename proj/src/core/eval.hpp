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

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "classify.hpp"
#include "dataset.hpp"
#include "model.hpp"
#include "train.hpp"

namespace unn {

inline constexpr int kReportFormatVersion = 1;

// Mean over (i, c) of [y_ic * scores_ic < 0]; scores is m x C row-major. A
// zero edge is not an error.
double empirical_risk(std::span<const double> scores, const Dataset& data);

/// Confusion rows are true classes, columns predicted classes.
/// mean_per_class_accuracy is the unweighted mean of the diagonal rates over
/// classes that have at least one query; it is reported as "mAP".
struct EvalReport {
    Rule rule = Rule::Leveraged;
    std::size_t k = 0;
    std::size_t prototypes = 0;
    std::vector<std::string> class_names;
    std::vector<std::vector<std::size_t>> confusion;
    std::vector<double> per_class_rate;  // NaN for classes without queries
    double mean_per_class_accuracy = 0.0;
    double empirical_risk = 0.0;
    double error_rate = 0.0;
    double surrogate_risk = std::numeric_limits<double>::quiet_NaN();  // training set only
    std::size_t queries = 0;
    std::size_t ties = 0;

    double mAP() const { return mean_per_class_accuracy; }
};

// Builds the report from precomputed predictions of `test`.
EvalReport summarize(const std::vector<Prediction>& predictions, const Dataset& test, Rule rule, std::size_t k,
                     std::size_t prototypes);

// k = 0 uses model.k.
EvalReport evaluate(const LeveragedModel& model, const Dataset& test, Rule rule, std::size_t k = 0,
                    Backend backend = Backend::KdTree);

// `count` distinct ids drawn uniformly from [0, m), returned ascending.
std::vector<std::size_t> sample_prototypes(std::size_t m, std::size_t count, std::uint64_t seed);

struct CvConfig {
    std::size_t folds = 3;
    TrainConfig train;
    FilterSpec filter = FilterSpec::threshold(0.0);
    std::size_t eval_k = 0;  // 0 uses train.k
    std::uint64_t seed = 0;
    // Size of the random prototype sample for the classic baseline as a
    // fraction of the training fold; 0 matches the leveraged arm's retained
    // fraction fold by fold.
    double baseline_fraction = 1.0;
    Backend backend = Backend::KdTree;
};

struct FoldResult {
    std::size_t fold = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t retained = 0;
    double retained_fraction = 0.0;
    EvalReport leveraged;
    EvalReport classic;
};

struct CvReport {
    CvConfig config;
    std::vector<FoldResult> folds;
    double mean_map_leveraged = 0.0;
    double mean_map_classic = 0.0;
    double mean_error_leveraged = 0.0;
    double mean_error_classic = 0.0;
    double mean_retained_fraction = 0.0;
};

// Each fold trains on its own part and is evaluated on the union of the
// others.
CvReport cross_validate(const Dataset& data, const CvConfig& config);

struct MarginClassStats {
    int c = 0;
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double min_positive = std::numeric_limits<double>::quiet_NaN();  // smallest edge > 0
    std::size_t nonpositive = 0;
};

struct MarginReport {
    std::size_t prototypes = 0;
    std::vector<MarginClassStats> classes;
    double min_positive = std::numeric_limits<double>::quiet_NaN();
};

// Edges y_ic * h_c(o_i) of the leveraged rule on the training set, divided
// by sum_j |alpha_jc| over the model's prototypes. An example never votes for
// itself. `model` may be filtered; its original ids index into `train`.
MarginReport margin_stats(const LeveragedModel& model, const Dataset& train);
std::vector<double> normalized_edges(const LeveragedModel& model, const Dataset& train, int c);

struct ReproConfig {
    std::size_t m_train = 250;
    std::size_t m_test = 1000;
    std::uint64_t seed = 1;
    std::size_t k = 9;
    std::vector<double> thetas{0.25, 0.5, 0.75, 1.0};
    std::vector<std::size_t> eval_ks{1, 3, 5, 7, 9, 11, 13, 15};
};

struct ReproResult {
    std::string surrogate_csv;  // oracle,class,t,surrogate
    std::string error_csv;      // theta,k,retained,error_leveraged,error_classic
    std::string summary_json;
};

// Generate, train under both the boosting and the lazy random oracle, then
// sweep the filter fraction and the evaluation k.
ReproResult repro_ripley(const ReproConfig& config);

std::string to_json(const EvalReport& report, int indent = 2);
std::string to_text(const EvalReport& report);
std::string to_json(const CvReport& report, int indent = 2);
std::string to_text(const CvReport& report);
std::string to_json(const MarginReport& report, int indent = 2);
std::string to_text(const MarginReport& report);
std::string to_json(const RateBoundReport& report, int indent = 2);
std::string cv_folds_csv(const CvReport& report);

}  // namespace unn
