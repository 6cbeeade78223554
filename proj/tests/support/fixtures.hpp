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

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "neighbors.hpp"

namespace fixture {

// Directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("unn-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Gaussian points in [dim] dimensions with uniformly drawn labels; every class
// is guaranteed at least one row when m >= C.
inline unn::Dataset random_dataset(std::size_t m, std::size_t dim, int num_classes, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> f(m * dim);
    for (double& v : f) v = normal(g);
    std::vector<int> labels(m);
    for (std::size_t i = 0; i < m; ++i)
        labels[i] = i < static_cast<std::size_t>(num_classes) ? static_cast<int>(i)
                                                              : static_cast<int>(g() % static_cast<unsigned>(num_classes));
    std::vector<std::string> names;
    for (int c = 0; c < num_classes; ++c) names.push_back("c" + std::to_string(c));
    return unn::Dataset(dim, std::move(names), std::move(f), std::move(labels));
}

// Graph with hand-written direct lists (k entries per row).
inline unn::NeighborGraph manual_graph(const unn::Dataset& data, std::size_t k, std::vector<std::size_t> direct) {
    return unn::NeighborGraph(data.size(), k, std::move(direct), unn::Metric::Euclidean, data.hash());
}

// One-dimensional dataset whose features are the row index.
inline unn::Dataset line_dataset(const std::vector<int>& labels, int num_classes) {
    std::vector<double> f;
    for (std::size_t i = 0; i < labels.size(); ++i) f.push_back(static_cast<double>(i));
    std::vector<std::string> names;
    for (int c = 0; c < num_classes; ++c) names.push_back(std::string(1, static_cast<char>('A' + c)));
    return unn::Dataset(1, std::move(names), std::move(f), labels);
}

}  // namespace fixture
