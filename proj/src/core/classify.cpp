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

#include "classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace unn {

std::string to_string(Rule r) { return r == Rule::Classic ? "classic" : "leveraged"; }

Rule parse_rule(const std::string& s) {
    if (s == "classic") return Rule::Classic;
    if (s == "leveraged") return Rule::Leveraged;
    fail(ErrorKind::Domain, "unknown rule '" + s + "' (expected classic or leveraged)");
}

int argmax_lowest(std::span<const double> scores, bool* tie) {
    int best = 0;
    bool tied = false;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[static_cast<std::size_t>(best)]) {
            best = static_cast<int>(c);
            tied = false;
        } else if (scores[c] == scores[static_cast<std::size_t>(best)]) {
            tied = true;
        }
    }
    if (tie) *tie = tied;
    return best;
}

namespace {

Prediction classic_from_neighbors(const Dataset& prototypes, std::span<const std::size_t> neighbors) {
    Prediction p;
    p.scores.assign(static_cast<std::size_t>(prototypes.num_classes()), 0.0);
    for (std::size_t j : neighbors) p.scores[static_cast<std::size_t>(prototypes.label(j))] += 1.0;
    p.label = argmax_lowest(p.scores, &p.tie);
    return p;
}

}  // namespace

Prediction score_classic(std::span<const double> query, const Dataset& prototypes, std::size_t k, Metric metric) {
    auto neighbors = knn_search(query, prototypes, k, metric);
    return classic_from_neighbors(prototypes, neighbors);
}

Scorer::Scorer(const LeveragedModel& model, Backend backend) : model_(model) {
    require(model.size() > 0, "model has no retained prototypes");
    if (model.per_class()) {
        for (const auto& pool : model.class_pools) {
            require(!pool.empty(), "model has an empty class pool");
            indexes_.emplace_back(model.prototypes, pool, model.metric, backend);
        }
    } else {
        indexes_.emplace_back(model.prototypes, model.metric, backend);
    }
}

Prediction Scorer::leveraged(std::span<const double> query, std::size_t k, bool with_contributions) const {
    const int C = model_.num_classes();
    const auto& protos = model_.prototypes;
    // Positive and negative votes are summed apart so that equal multisets of
    // votes give bit-identical scores whatever the neighbour order.
    std::vector<double> pos(static_cast<std::size_t>(C), 0.0), neg(static_cast<std::size_t>(C), 0.0);
    Prediction p;
    auto add = [&](std::size_t j, int c) {
        double v = model_.coeff(j, c) * protos.y(j, c);
        (v >= 0.0 ? pos : neg)[static_cast<std::size_t>(c)] += v;
        if (with_contributions) p.contributions.push_back({model_.original_ids[j], c, v});
    };
    if (model_.per_class()) {
        for (int c = 0; c < C; ++c)
            for (std::size_t j : indexes_[static_cast<std::size_t>(c)].query(query, k)) add(j, c);
    } else {
        // Neighbour-major order: all classes of the nearest prototype first.
        for (std::size_t j : indexes_.front().query(query, k))
            for (int c = 0; c < C; ++c) add(j, c);
    }
    p.scores.resize(static_cast<std::size_t>(C));
    for (std::size_t c = 0; c < p.scores.size(); ++c) p.scores[c] = pos[c] + neg[c];
    p.label = argmax_lowest(p.scores, &p.tie);
    return p;
}

Prediction Scorer::classic(std::span<const double> query, std::size_t k) const {
    // Classic voting ignores pools and coefficients: all retained prototypes vote.
    if (model_.per_class()) {
        NeighborIndex all(model_.prototypes, model_.metric, Backend::Exhaustive);
        return classic_from_neighbors(model_.prototypes, all.query(query, k));
    }
    return classic_from_neighbors(model_.prototypes, indexes_.front().query(query, k));
}

Prediction score_leveraged(std::span<const double> query, const LeveragedModel& model, bool with_contributions) {
    return Scorer(model, Backend::Exhaustive).leveraged(query, model.k, with_contributions);
}

std::vector<Prediction> predict_batch(const LeveragedModel& model, const Dataset& queries, Rule rule, std::size_t k,
                                      Backend backend, bool with_contributions) {
    require(queries.dim() == model.prototypes.dim(),
            "query dimension " + std::to_string(queries.dim()) + " does not match model dimension " +
                std::to_string(model.prototypes.dim()));
    if (k == 0) k = model.k;
    LeveragedModel classic_view;
    const LeveragedModel* target = &model;
    if (rule == Rule::Classic && model.per_class()) {
        classic_view = model;
        classic_view.class_pools.clear();
        target = &classic_view;
    }
    Scorer scorer(*target, backend);
    std::vector<Prediction> out(queries.size());
    parallel_for(queries.size(), [&](std::size_t q) {
        out[q] = rule == Rule::Classic ? scorer.classic(queries.row(q), k)
                                       : scorer.leveraged(queries.row(q), k, with_contributions);
    });
    return out;
}

std::string predictions_csv(const std::vector<Prediction>& predictions, const std::vector<std::string>& class_names) {
    std::ostringstream out;
    out << "# unn-predictions " << kPredictionsFormatVersion << '\n';
    out << "query,label";
    for (const auto& name : class_names) out << ",score_" << name;
    out << '\n';
    for (std::size_t q = 0; q < predictions.size(); ++q) {
        const auto& p = predictions[q];
        out << q << ',' << class_names[static_cast<std::size_t>(p.label)];
        for (double s : p.scores) out << ',' << format_double(s);
        out << '\n';
    }
    return out.str();
}

std::string contributions_csv(const std::vector<Prediction>& predictions,
                              const std::vector<std::string>& class_names) {
    std::ostringstream out;
    out << "# unn-contributions " << kPredictionsFormatVersion << '\n';
    out << "query,prototype,class,value\n";
    for (std::size_t q = 0; q < predictions.size(); ++q) {
        for (const auto& c : predictions[q].contributions)
            out << q << ',' << c.prototype_id << ',' << class_names[static_cast<std::size_t>(c.c)] << ','
                << format_double(c.value) << '\n';
    }
    return out.str();
}

FilterSpec FilterSpec::threshold(double alpha_tilde) {
    FilterSpec s;
    s.mode = Mode::Threshold;
    s.alpha_tilde = alpha_tilde;
    return s;
}

FilterSpec FilterSpec::fraction(double theta) {
    FilterSpec s;
    s.mode = Mode::Fraction;
    s.theta = theta;
    return s;
}

std::string FilterSpec::describe() const {
    std::ostringstream out;
    if (mode == Mode::Threshold) {
        out << "threshold alpha_tilde=" << format_double(alpha_tilde);
    } else {
        out << "fraction theta=" << format_double(theta);
        if (exclude_nonpositive) out << " exclude-nonpositive";
    }
    if (per_class) out << " per-class";
    return out.str();
}

std::size_t retained_count(double theta, std::size_t m) {
    const double target = theta * static_cast<double>(m);
    const double rounded = std::round(target);
    if (std::abs(target - rounded) <= 1e-9 * std::max(1.0, target)) return static_cast<std::size_t>(rounded);
    return static_cast<std::size_t>(std::ceil(target));
}

namespace {

// Indices of rows in `candidates` with the largest key, ties by ascending index.
std::vector<std::size_t> top_by(std::vector<std::size_t> candidates, const std::vector<double>& key,
                                std::size_t count) {
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        return key[a] > key[b] || (key[a] == key[b] && a < b);
    });
    if (candidates.size() > count) candidates.resize(count);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

}  // namespace

LeveragedModel filter_model(const LeveragedModel& model, const FilterSpec& spec) {
    const std::size_t m = model.size();
    const int C = model.num_classes();
    const auto Cs = static_cast<std::size_t>(C);

    if (spec.mode == FilterSpec::Mode::Threshold) {
        require(spec.alpha_tilde >= 0.0 && std::isfinite(spec.alpha_tilde), "alpha_tilde must be finite and >= 0");
    } else {
        require(spec.theta > 0.0 && spec.theta <= 1.0, "theta must lie in (0, 1]");
    }

    auto nonzero = [&](std::size_t j) {
        for (int c = 0; c < C; ++c)
            if (model.coeff(j, c) != 0.0) return true;
        return false;
    };
    auto max_alpha = [&](std::size_t j) {
        double best = model.coeff(j, 0);
        for (int c = 1; c < C; ++c) best = std::max(best, model.coeff(j, c));
        return best;
    };

    // Pools over current prototype indices; one pool when shared.
    std::vector<std::vector<std::size_t>> pools;
    if (spec.mode == FilterSpec::Mode::Threshold) {
        if (spec.per_class) {
            pools.resize(Cs);
            for (std::size_t j = 0; j < m; ++j)
                for (int c = 0; c < C; ++c)
                    if (model.coeff(j, c) > spec.alpha_tilde) pools[static_cast<std::size_t>(c)].push_back(j);
        } else {
            pools.resize(1);
            for (std::size_t j = 0; j < m; ++j)
                if (max_alpha(j) > spec.alpha_tilde) pools[0].push_back(j);
        }
    } else {
        const std::size_t count = retained_count(spec.theta, m);
        if (spec.per_class) {
            pools.resize(Cs);
            for (int c = 0; c < C; ++c) {
                std::vector<std::size_t> cand;
                std::vector<double> key(m, 0.0);
                for (std::size_t j = 0; j < m; ++j) {
                    double a = model.coeff(j, c);
                    if (a == 0.0 || (spec.exclude_nonpositive && a <= 0.0)) continue;
                    cand.push_back(j);
                    key[j] = a * a;
                }
                pools[static_cast<std::size_t>(c)] = top_by(std::move(cand), key, count);
            }
        } else {
            std::vector<std::size_t> cand;
            std::vector<double> key(m, 0.0);
            for (std::size_t j = 0; j < m; ++j) {
                if (!nonzero(j) || (spec.exclude_nonpositive && max_alpha(j) <= 0.0)) continue;
                cand.push_back(j);
                for (int c = 0; c < C; ++c) key[j] += model.coeff(j, c) * model.coeff(j, c);
            }
            pools.assign(1, top_by(std::move(cand), key, count));
        }
    }

    std::vector<char> keep(m, 0);
    for (std::size_t p = 0; p < pools.size(); ++p) {
        if (pools[p].empty()) {
            std::string where = spec.per_class ? " for class " + std::to_string(p) : "";
            fail(ErrorKind::Domain, "filter '" + spec.describe() + "' retains no prototypes" + where);
        }
        for (std::size_t j : pools[p]) keep[j] = 1;
    }

    std::vector<std::size_t> retained;
    for (std::size_t j = 0; j < m; ++j)
        if (keep[j]) retained.push_back(j);
    std::vector<std::size_t> new_index(m, m);
    for (std::size_t r = 0; r < retained.size(); ++r) new_index[retained[r]] = r;

    LeveragedModel out;
    out.prototypes = model.prototypes.subset(retained);
    out.k = model.k;
    out.metric = model.metric;
    out.loss = model.loss;
    out.alpha.reserve(retained.size() * Cs);
    for (std::size_t j : retained) {
        for (int c = 0; c < C; ++c) out.alpha.push_back(model.coeff(j, c));
        out.original_ids.push_back(model.original_ids[j]);
    }
    if (spec.per_class) {
        out.class_pools.resize(Cs);
        for (std::size_t c = 0; c < Cs; ++c)
            for (std::size_t j : pools[c]) out.class_pools[c].push_back(new_index[j]);
    } else if (model.per_class()) {
        // Shared filtering of a per-class model keeps its pools, restricted.
        out.class_pools.resize(Cs);
        for (std::size_t c = 0; c < Cs; ++c) {
            for (std::size_t j : model.class_pools[c])
                if (keep[j]) out.class_pools[c].push_back(new_index[j]);
            if (out.class_pools[c].empty())
                fail(ErrorKind::Domain, "filter '" + spec.describe() + "' empties the pool of class " +
                                            std::to_string(c));
        }
    }
    return out;
}

}  // namespace unn
