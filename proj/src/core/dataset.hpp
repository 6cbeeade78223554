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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "common.hpp"

namespace unn {

/// Symmetric class vector: 1 at the true class, -1/(C-1) elsewhere, so the
/// entries sum to zero.
struct ClassVector {
    std::vector<double> entries;
    int true_class = 0;
};

ClassVector encode_class_vector(int label, int num_classes);

// Single entry of the symmetric encoding, without allocating.
inline double class_entry(int label, int c, int num_classes) {
    return label == c ? 1.0 : -1.0 / static_cast<double>(num_classes - 1);
}

/// m labelled observations of dimension n over C classes. Features are stored
/// row-major; labels index into class_names. Immutable once built.
class Dataset {
public:
    Dataset() = default;

    // Validates shapes, label range and finiteness.
    Dataset(std::size_t dim, std::vector<std::string> class_names, std::vector<double> features,
            std::vector<int> labels);

    std::size_t size() const { return labels_.size(); }
    std::size_t dim() const { return dim_; }
    int num_classes() const { return static_cast<int>(class_names_.size()); }
    const std::vector<std::string>& class_names() const { return class_names_; }

    std::span<const double> row(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
    int label(std::size_t i) const { return labels_[i]; }
    double y(std::size_t i, int c) const { return class_entry(labels_[i], c, num_classes()); }
    ClassVector class_vector(std::size_t i) const { return encode_class_vector(labels_[i], num_classes()); }

    const std::vector<double>& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }

    // Free-form provenance (generator name, parameters, seed) as a JSON object string.
    const std::string& metadata() const { return metadata_; }
    void set_metadata(std::string json) { metadata_ = std::move(json); }

    Dataset subset(std::span<const std::size_t> ids) const;

    // Content hash over dimension, class names, features and labels.
    std::uint64_t hash() const;

    bool operator==(const Dataset& other) const;

private:
    std::size_t dim_ = 0;
    std::vector<std::string> class_names_;
    std::vector<double> features_;
    std::vector<int> labels_;
    std::string metadata_;
};

// CSV ingestion. Feature columns are every non-label column in header order;
// classes are the distinct label strings sorted lexicographically. Leading
// lines starting with '#' are skipped.
// Files written by save_csv start with "# unn-dataset <version>"; a
// different version is rejected, files without the line are accepted.
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr std::string_view kDatasetMagic = "# unn-dataset ";
Dataset load_csv(const std::string& path, const std::string& label_column = "label");
void save_csv(const Dataset& data, const std::string& path, const std::string& label_column = "label");

// Per-feature min-max scaling to [0, 1]; constant features map to 0.
Dataset normalize_minmax(const Dataset& data);

// Canonical two-class Ripley mixture: class P is an equal mixture of
// N((-0.7, 0.3), 0.03 I) and N((0.3, 0.3), 0.03 I); class N of
// N((-0.3, 0.7), 0.03 I) and N((0.4, 0.7), 0.03 I). Classes alternate so the
// sets are balanced.
std::pair<Dataset, Dataset> gen_ripley(std::size_t m_train, std::size_t m_test, std::uint64_t seed);

// Bayes-optimal label (0 = N, 1 = P) under the Ripley mixture densities.
int ripley_bayes_label(double x, double y);

// C isotropic Gaussian clusters with standard deviation `spread`. Cluster c is
// centred on +/-(1 + c / (2n)) e_{c mod n}, so distinct centres are at least
// sqrt(2) apart whenever C <= 2n.
Dataset gen_blobs(int num_classes, std::size_t per_class, std::size_t dim, double spread, std::uint64_t seed);
std::vector<double> blob_center(int c, std::size_t dim);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Shuffled k-fold partition. Fold f's `test` holds its own ids and `train`
// the rest; sizes differ by at most one.
std::vector<Fold> split_kfold(std::size_t m, std::size_t folds, std::uint64_t seed);

}  // namespace unn
