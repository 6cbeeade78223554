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

#include "neighbors.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <utility>

namespace unn {

std::string to_string(Metric) { return "euclidean"; }

Metric parse_metric(const std::string& s) {
    if (s == "euclidean") return Metric::Euclidean;
    fail(ErrorKind::Domain, "unknown metric '" + s + "'");
}

std::string to_string(Backend b) { return b == Backend::KdTree ? "kdtree" : "exhaustive"; }

Backend parse_backend(const std::string& s) {
    if (s == "kdtree" || s == "kd-tree") return Backend::KdTree;
    if (s == "exhaustive" || s == "brute") return Backend::Exhaustive;
    fail(ErrorKind::Domain, "unknown search backend '" + s + "'");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

namespace {

using Candidate = std::pair<double, std::size_t>;  // (squared distance, index)

// Bounded max-heap keeping the k lexicographically smallest candidates.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

    bool full() const { return heap_.size() == k_; }
    double worst() const { return heap_.front().first; }

    void offer(Candidate c) {
        if (k_ == 0) return;
        if (!full()) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (c < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    std::vector<std::size_t> sorted_ids() {
        std::sort_heap(heap_.begin(), heap_.end());
        std::vector<std::size_t> ids;
        ids.reserve(heap_.size());
        for (const auto& c : heap_) ids.push_back(c.second);
        return ids;
    }

private:
    std::size_t k_;
    std::vector<Candidate> heap_;
};

constexpr std::size_t kLeafSize = 8;

}  // namespace

struct NeighborIndex::KdTree {
    struct Node {
        std::size_t begin = 0, end = 0;  // range into order
        std::size_t split_dim = 0;
        double split_value = 0.0;
        int left = -1, right = -1;
    };

    std::vector<std::size_t> order;
    std::vector<Node> nodes;

    KdTree(const Dataset& data, const std::vector<std::size_t>& candidates) : order(candidates) {
        if (!order.empty()) build(data, 0, order.size());
    }

    int build(const Dataset& data, std::size_t begin, std::size_t end) {
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({begin, end});
        if (end - begin <= kLeafSize) return id;

        const std::size_t dim = data.dim();
        std::size_t best_dim = 0;
        double best_spread = -1.0;
        for (std::size_t d = 0; d < dim; ++d) {
            double lo = data.row(order[begin])[d], hi = lo;
            for (std::size_t p = begin + 1; p < end; ++p) {
                double v = data.row(order[p])[d];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                best_dim = d;
            }
        }
        if (best_spread <= 0.0) return id;  // all points coincide

        const std::size_t mid = begin + (end - begin) / 2;
        auto key_less = [&](std::size_t a, std::size_t b) {
            double va = data.row(a)[best_dim], vb = data.row(b)[best_dim];
            return va < vb || (va == vb && a < b);
        };
        std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(mid),
                         order.begin() + static_cast<std::ptrdiff_t>(end), key_less);
        nodes[static_cast<std::size_t>(id)].split_dim = best_dim;
        nodes[static_cast<std::size_t>(id)].split_value = data.row(order[mid])[best_dim];
        int left = build(data, begin, mid);
        int right = build(data, mid, end);
        nodes[static_cast<std::size_t>(id)].left = left;
        nodes[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    // Left subtree holds coordinates <= split_value, right holds >= split_value.
    void search(const Dataset& data, int node_id, std::span<const double> q, std::optional<std::size_t> exclude,
                TopK& top) const {
        const Node& node = nodes[static_cast<std::size_t>(node_id)];
        if (node.left < 0) {
            for (std::size_t p = node.begin; p < node.end; ++p) {
                std::size_t idx = order[p];
                if (exclude && *exclude == idx) continue;
                top.offer({squared_distance(q, data.row(idx)), idx});
            }
            return;
        }
        const double diff = q[node.split_dim] - node.split_value;
        const int near = diff <= 0 ? node.left : node.right;
        const int far = diff <= 0 ? node.right : node.left;
        search(data, near, q, exclude, top);
        // A lower bound on the far side; equality must still be visited since
        // an equidistant point with a smaller index may live there.
        if (!top.full() || diff * diff <= top.worst()) search(data, far, q, exclude, top);
    }
};

NeighborIndex::NeighborIndex(const Dataset& data, Metric metric, Backend backend)
    : NeighborIndex(data,
                    [&] {
                        std::vector<std::size_t> all(data.size());
                        std::iota(all.begin(), all.end(), 0);
                        return all;
                    }(),
                    metric, backend) {}

NeighborIndex::NeighborIndex(const Dataset& data, std::vector<std::size_t> candidates, Metric metric,
                             Backend backend)
    : data_(&data), candidates_(std::move(candidates)), metric_(metric), backend_(backend) {
    for (std::size_t c : candidates_) require(c < data.size(), "candidate index out of range");
    if (backend_ == Backend::KdTree) tree_ = std::make_unique<KdTree>(data, candidates_);
}

NeighborIndex::~NeighborIndex() = default;
NeighborIndex::NeighborIndex(NeighborIndex&&) noexcept = default;
NeighborIndex& NeighborIndex::operator=(NeighborIndex&&) noexcept = default;

std::vector<std::size_t> NeighborIndex::query(std::span<const double> point, std::size_t k,
                                              std::optional<std::size_t> exclude) const {
    require(k >= 1, "k must be at least 1");
    if (point.size() != data_->dim())
        fail(ErrorKind::Domain, "query has dimension " + std::to_string(point.size()) + ", expected " +
                                    std::to_string(data_->dim()));
    std::size_t available = candidates_.size();
    if (exclude && std::find(candidates_.begin(), candidates_.end(), *exclude) != candidates_.end()) --available;
    TopK top(std::min(k, available));
    if (tree_ && !tree_->nodes.empty()) {
        tree_->search(*data_, 0, point, exclude, top);
    } else {
        for (std::size_t idx : candidates_) {
            if (exclude && *exclude == idx) continue;
            top.offer({squared_distance(point, data_->row(idx)), idx});
        }
    }
    return top.sorted_ids();
}

std::vector<std::size_t> knn_search(std::span<const double> query, const Dataset& data, std::size_t k, Metric metric,
                                    std::optional<std::size_t> exclude, Backend backend) {
    return NeighborIndex(data, metric, backend).query(query, k, exclude);
}

NeighborGraph::NeighborGraph(std::size_t m, std::size_t k, std::vector<std::size_t> direct_lists, Metric metric,
                             std::uint64_t data_hash)
    : m_(m), k_(k), metric_(metric), data_hash_(data_hash), direct_(std::move(direct_lists)) {
    require(direct_.size() == m_ * k_, "direct list buffer does not match m x k");
    std::vector<std::size_t> counts(m_ + 1, 0);
    for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t j : direct(i)) {
            require(j < m_ && j != i, "direct list entry out of range or self-referential");
            ++counts[j + 1];
        }
    }
    offsets_.assign(m_ + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), offsets_.begin());
    reciprocal_.assign(direct_.size(), 0);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t j : direct(i)) reciprocal_[fill[j]++] = i;
}

bool NeighborGraph::is_neighbor(std::size_t i, std::size_t j) const {
    auto row = direct(i);
    return std::find(row.begin(), row.end(), j) != row.end();
}

NeighborGraph build_graph(const Dataset& data, std::size_t k, Metric metric, Backend backend) {
    require(k >= 1, "k must be at least 1");
    const std::size_t m = data.size();
    require(m >= 2, "a neighbour graph needs at least 2 examples");
    if (k >= m) {
        warn("k = " + std::to_string(k) + " >= m = " + std::to_string(m) + "; clamping k to " +
             std::to_string(m - 1));
        k = m - 1;
    }
    NeighborIndex index(data, metric, backend);
    std::vector<std::size_t> direct(m * k);
    parallel_for(m, [&](std::size_t i) {
        auto ids = index.query(data.row(i), k, i);
        std::copy(ids.begin(), ids.end(), direct.begin() + static_cast<std::ptrdiff_t>(i * k));
    });
    return NeighborGraph(m, k, std::move(direct), metric, data.hash());
}

double edge_value(const NeighborGraph& graph, const Dataset& data, std::size_t i, std::size_t j, int c) {
    require(i < graph.size() && j < graph.size(), "edge index out of range");
    require(c >= 0 && c < data.num_classes(), "class index out of range");
    if (!graph.is_neighbor(i, j)) return 0.0;
    return data.y(i, c) * data.y(j, c);
}

namespace {
constexpr const char* kGraphMagic = "unn-graph";
constexpr int kGraphVersion = 1;
}  // namespace

void save_graph(const NeighborGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
    out << kGraphMagic << ' ' << kGraphVersion << '\n';
    out << "hash " << std::hex << graph.data_hash() << std::dec << '\n';
    out << "metric " << to_string(graph.metric()) << '\n';
    out << "m " << graph.size() << "\nk " << graph.k() << '\n';
    for (std::size_t i = 0; i < graph.size(); ++i) {
        auto row = graph.direct(i);
        for (std::size_t p = 0; p < row.size(); ++p) out << (p ? " " : "") << row[p];
        out << '\n';
    }
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

NeighborGraph load_graph(const std::string& path, const Dataset& data, std::size_t k, Metric metric) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
    std::string magic, key, metric_name;
    int version = 0;
    std::uint64_t hash = 0;
    std::size_t m = 0, stored_k = 0;
    in >> magic >> version;
    if (magic != kGraphMagic) fail(ErrorKind::Parse, path + ": not a neighbour graph file");
    if (version != kGraphVersion)
        fail(ErrorKind::Version, path + ": graph format version " + std::to_string(version) + ", expected " +
                                     std::to_string(kGraphVersion));
    in >> key >> std::hex >> hash >> std::dec >> key >> metric_name >> key >> m >> key >> stored_k;
    if (!in) fail(ErrorKind::Parse, path + ": malformed graph header");

    const std::size_t expected_k = std::min(k, data.size() - 1);
    if (hash != data.hash() || m != data.size() || stored_k != expected_k || metric_name != to_string(metric))
        fail(ErrorKind::Version, path + ": cached graph key does not match (dataset hash, k, metric)");

    std::vector<std::size_t> direct(m * stored_k);
    for (auto& v : direct)
        if (!(in >> v)) fail(ErrorKind::Parse, path + ": truncated neighbour lists");
    return NeighborGraph(m, stored_k, std::move(direct), metric, hash);
}

}  // namespace unn
