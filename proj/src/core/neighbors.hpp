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

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace unn {

enum class Metric { Euclidean };
enum class Backend { Exhaustive, KdTree };

std::string to_string(Metric m);
Metric parse_metric(const std::string& s);
std::string to_string(Backend b);
Backend parse_backend(const std::string& s);

// Squared Euclidean distance, accumulated in coordinate order. Both backends
// use this exact routine so their orderings agree bit for bit.
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Exact k-NN search over a fixed candidate set of dataset rows. Results are
/// ordered by (distance, index) ascending, so ties go to the lower index.
class NeighborIndex {
public:
    NeighborIndex(const Dataset& data, Metric metric, Backend backend);
    // Restricts the searchable rows to `candidates` (indices into data).
    NeighborIndex(const Dataset& data, std::vector<std::size_t> candidates, Metric metric, Backend backend);
    ~NeighborIndex();
    NeighborIndex(NeighborIndex&&) noexcept;
    NeighborIndex& operator=(NeighborIndex&&) noexcept;

    std::vector<std::size_t> query(std::span<const double> point, std::size_t k,
                                   std::optional<std::size_t> exclude = std::nullopt) const;

    std::size_t size() const { return candidates_.size(); }
    Backend backend() const { return backend_; }

private:
    struct KdTree;
    const Dataset* data_;
    std::vector<std::size_t> candidates_;
    Metric metric_;
    Backend backend_;
    std::unique_ptr<KdTree> tree_;
};

std::vector<std::size_t> knn_search(std::span<const double> query, const Dataset& data, std::size_t k,
                                    Metric metric = Metric::Euclidean,
                                    std::optional<std::size_t> exclude = std::nullopt,
                                    Backend backend = Backend::Exhaustive);

/// Direct k-NN lists of every training example (self excluded) and their
/// inverse, the reciprocal lists. The support of the edge matrix of class c is
/// exactly {(i, j) : j in direct(i)}.
class NeighborGraph {
public:
    NeighborGraph() = default;
    // Builds the reciprocal lists from `direct` (m rows of k entries each).
    NeighborGraph(std::size_t m, std::size_t k, std::vector<std::size_t> direct, Metric metric,
                  std::uint64_t data_hash);

    std::size_t size() const { return m_; }
    std::size_t k() const { return k_; }
    Metric metric() const { return metric_; }
    std::uint64_t data_hash() const { return data_hash_; }

    std::span<const std::size_t> direct(std::size_t i) const { return {direct_.data() + i * k_, k_}; }
    std::span<const std::size_t> reciprocal(std::size_t j) const {
        return {reciprocal_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
    }
    bool is_neighbor(std::size_t i, std::size_t j) const;

    bool operator==(const NeighborGraph& o) const {
        return m_ == o.m_ && k_ == o.k_ && direct_ == o.direct_ && reciprocal_ == o.reciprocal_;
    }

private:
    std::size_t m_ = 0;
    std::size_t k_ = 0;
    Metric metric_ = Metric::Euclidean;
    std::uint64_t data_hash_ = 0;
    std::vector<std::size_t> direct_;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> reciprocal_;
};

// k >= m is clamped to m - 1 with a warning.
NeighborGraph build_graph(const Dataset& data, std::size_t k, Metric metric = Metric::Euclidean,
                          Backend backend = Backend::KdTree);

// r_ij^(c) = y_ic * y_jc when j is a direct neighbour of i, 0 otherwise.
double edge_value(const NeighborGraph& graph, const Dataset& data, std::size_t i, std::size_t j, int c);

// Text cache of the direct lists keyed by (dataset hash, k, metric).
void save_graph(const NeighborGraph& graph, const std::string& path);
NeighborGraph load_graph(const std::string& path, const Dataset& data, std::size_t k, Metric metric);

}  // namespace unn
