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

#include "train.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace unn {

std::string to_string(Oracle o) {
    switch (o) {
        case Oracle::LazyRandom: return "lazy-random";
        case Oracle::LazyOrdered: return "lazy-ordered";
        case Oracle::Boosting: return "boosting";
        case Oracle::BoostingOnce: return "boosting-once";
    }
    return "?";
}

Oracle parse_oracle(const std::string& s) {
    if (s == "lazy-random" || s == "lazy_random") return Oracle::LazyRandom;
    if (s == "lazy-ordered" || s == "lazy_ordered") return Oracle::LazyOrdered;
    if (s == "boosting") return Oracle::Boosting;
    if (s == "boosting-once" || s == "boosting_once") return Oracle::BoostingOnce;
    fail(ErrorKind::Domain, "unknown oracle '" + s + "'");
}

std::string to_string(Smoothing s) { return s == Smoothing::Always ? "always" : "on-zero"; }

Smoothing parse_smoothing(const std::string& s) {
    if (s == "on-zero" || s == "on_zero") return Smoothing::OnZero;
    if (s == "always") return Smoothing::Always;
    fail(ErrorKind::Domain, "unknown smoothing policy '" + s + "'");
}

std::string to_string(DeltaMode d) {
    switch (d) {
        case DeltaMode::Auto: return "auto";
        case DeltaMode::Closed: return "closed";
        case DeltaMode::Exact: return "exact";
    }
    return "?";
}

DeltaMode parse_delta_mode(const std::string& s) {
    if (s == "auto") return DeltaMode::Auto;
    if (s == "closed") return DeltaMode::Closed;
    if (s == "exact") return DeltaMode::Exact;
    fail(ErrorKind::Domain, "unknown delta mode '" + s + "'");
}

std::size_t effective_iterations(const TrainConfig& config, std::size_t m) {
    if (config.iterations > 0) return config.iterations;
    return m;
}

ClassTrainer::ClassTrainer(const Dataset& data, const NeighborGraph& graph, int c, const TrainConfig& config)
    : data_(data), graph_(graph), c_(c), config_(config), m_(data.size()),
      rng_(make_rng(config.seed, static_cast<std::uint64_t>(c) + 1)) {
    require(graph.size() == m_, "graph has " + std::to_string(graph.size()) + " nodes but dataset has " +
                                    std::to_string(m_) + " examples");
    require(graph.data_hash() == 0 || graph.data_hash() == data.hash(), "graph was built from a different dataset");
    require(c >= 0 && c < data.num_classes(), "class index out of range");
    require(config.convergence_tol >= 0.0, "convergence tolerance must be non-negative");

    y_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) y_[i] = data.y(i, c);
    const double w0 = weight_from_edge(config.loss, 0.0);
    weights_.assign(m_, w0);
    edges_.assign(m_, 0.0);
    alpha_.assign(m_, 0.0);
    used_.assign(m_, 0);
    loss_sum_ = static_cast<double>(m_) * loss_value(config.loss, 0.0);
    weight_l1_ = static_cast<double>(m_) * std::abs(w0);

    order_.resize(m_);
    std::iota(order_.begin(), order_.end(), 0);
    std::shuffle(order_.begin(), order_.end(), rng_);

    trace_.c = c;
    trace_.initial_surrogate = loss_value(config.loss, 0.0);
}

void ClassTrainer::refresh_weight_norm() {
    weight_l1_ = 0.0;
    for (double w : weights_) weight_l1_ += std::abs(w);
}

bool ClassTrainer::use_closed_form() const {
    switch (config_.delta_mode) {
        case DeltaMode::Closed: return true;
        case DeltaMode::Exact: return false;
        case DeltaMode::Auto:
            return config_.loss == LossKind::Exponential ||
                   (config_.loss == LossKind::Squared && data_.num_classes() == 2);
    }
    return true;
}

ClassTrainer::Step ClassTrainer::compute_step(std::size_t j) const {
    Step step;
    auto recips = graph_.reciprocal(j);
    if (recips.empty()) return step;
    step.covered = true;

    double norm1 = 0.0;
    for (std::size_t i : recips) {
        double rij = r(i, j);
        (rij > 0 ? step.w_plus : step.w_minus) += weights_[i];
        norm1 += std::abs(rij);
    }
    const LossKind loss = config_.loss;
    step.smoothed = loss != LossKind::Squared &&
                    (config_.smoothing == Smoothing::Always || step.w_plus == 0.0 || step.w_minus == 0.0);

    if (use_closed_form()) {
        if (loss == LossKind::Squared) {
            step.delta = solve_delta_closed(loss, step.w_plus, step.w_minus, norm1).delta;
        } else {
            auto [wp, wm] = step.smoothed ? smooth(step.w_plus, step.w_minus, m_)
                                          : std::pair{step.w_plus, step.w_minus};
            step.delta = solve_delta_closed(loss, wp, wm).delta;
        }
    } else {
        std::vector<EdgeTerm> terms;
        terms.reserve(recips.size() + 2);
        for (std::size_t i : recips) terms.push_back({r(i, j), edges_[i]});
        auto add_virtual = [&] {
            const double rho = smoothing_edge(loss, m_);
            terms.push_back({1.0, rho});
            terms.push_back({-1.0, rho});
        };
        if (step.smoothed) add_virtual();
        try {
            step.delta = solve_delta_exact(loss, terms).delta;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Divergence || step.smoothed || loss == LossKind::Squared) throw;
            step.smoothed = true;
            add_virtual();
            step.delta = solve_delta_exact(loss, terms).delta;
        }
    }
    if (!std::isfinite(step.delta))
        fail(ErrorKind::Internal, "non-finite leveraging step for index " + std::to_string(j));
    return step;
}

double ClassTrainer::peek_delta(std::size_t j) const { return compute_step(j).delta; }

double ClassTrainer::iterate_once(std::size_t j) {
    require(j < m_, "index out of range");
    const Step step = compute_step(j);
    const LossKind loss = config_.loss;
    const bool exp_loss = loss == LossKind::Exponential;

    IterationRecord rec;
    rec.t = ++steps_;
    rec.j = j;
    rec.smoothed = step.smoothed;

    const double covered_mass = step.w_plus + step.w_minus;
    if (step.covered && step.w_plus >= 0 && step.w_minus >= 0 && covered_mass > 0 && weight_l1_ > 0) {
        rec.gamma = std::abs(step.w_plus / covered_mass - 0.5);
        rec.eta = covered_mass / weight_l1_;
    }
    rec.wia = rec.gamma > 0 && rec.eta > 0;

    const double delta = step.delta;
    const double l1_before = weight_l1_;
    double loss_change = 0.0;
    double bregman = 0.0;
    for (std::size_t i : graph_.reciprocal(j)) {
        const double rij = r(i, j);
        const double w_old = weights_[i];
        const double rho_old = edges_[i];
        const double rho_new = rho_old + delta * rij;
        double w_new;
        if (loss == LossKind::Logistic && !(w_old > 0.0 && w_old < 1.0)) {
            w_new = weight_from_edge(loss, rho_new);
        } else {
            w_new = update_weight(loss, w_old, delta, rij);
        }
        loss_change += loss_value(loss, rho_new) - loss_value(loss, rho_old);
        if (exp_loss && w_old > 0.0 && w_new > 0.0) bregman += w_new * std::log(w_new / w_old) - w_new + w_old;
        if (rho_new < 0) ++negatives_;
        if (rho_old < 0) --negatives_;
        weight_l1_ += std::abs(w_new) - std::abs(w_old);
        if (loss == LossKind::Squared && w_new < 0 && w_old >= 0) ++trace_.negative_weight_events;
        if (exp_loss && w_new >= 1e300 && w_old < 1e300) {
            if (trace_.weight_clamp_events++ == 0)
                warn("exponential weight clamped at 1e300 (class " + std::to_string(c_) + ")");
        }

        weights_[i] = w_new;
        edges_[i] = rho_new;
    }
    alpha_[j] += delta;
    loss_sum_ += loss_change;
    used_[j] = 1;

    const double md = static_cast<double>(m_);
    if (exp_loss) {
        double aug_change = loss_change;
        double aug_bregman = bregman;
        if (step.smoothed) {
            // The smoothed step is stationary for the weights augmented with
            // two virtual examples of weight 1/m and edges +1, -1.
            const double wv = 1.0 / md;
            for (double rv : {1.0, -1.0}) {
                const double wn = wv * std::exp(-delta * rv);
                aug_change += wn - wv;
                aug_bregman += wn * std::log(wn / wv) - wn + wv;
            }
        }
        rec.bregman_residual = (aug_change + aug_bregman) / md;
    }

    rec.delta = delta;
    rec.surrogate = loss_sum_ / md;
    rec.risk01 = static_cast<double>(negatives_) / md;
    rec.normalizer = l1_before > 0 ? weight_l1_ / l1_before : 1.0;
    if (rec.wia) {
        ++trace_.tau;
        trace_.gamma_min = trace_.tau == 1 ? rec.gamma : std::min(trace_.gamma_min, rec.gamma);
        trace_.eta_min = trace_.tau == 1 ? rec.eta : std::min(trace_.eta_min, rec.eta);
    }
    rec.bound = trace_.tau == 0 ? 1.0
                                : std::exp(-2.0 * trace_.eta_min * trace_.gamma_min * trace_.gamma_min *
                                           static_cast<double>(trace_.tau));
    trace_.iterations.push_back(rec);

    if (gains_ready_) refresh_gains_around(j);
    if (steps_ % m_ == 0) refresh_weight_norm();
    if (config_.drift_check_every > 0 && steps_ % config_.drift_check_every == 0)
        trace_.max_weight_drift = std::max(trace_.max_weight_drift, weight_drift());
    return delta;
}

double ClassTrainer::column_gain(std::size_t j, double* delta) const {
    const Step step = compute_step(j);
    if (delta) *delta = step.delta;
    if (!step.covered) return 0.0;
    double change = 0.0;
    for (std::size_t i : graph_.reciprocal(j)) {
        const double rho = edges_[i];
        change += loss_value(config_.loss, rho + step.delta * r(i, j)) - loss_value(config_.loss, rho);
    }
    return -change;
}

void ClassTrainer::refresh_gains_around(std::size_t j) {
    ++epoch_;
    for (std::size_t i : graph_.reciprocal(j)) {
        for (std::size_t jj : graph_.direct(i)) {
            if (stamp_[jj] == epoch_) continue;
            stamp_[jj] = epoch_;
            gain_[jj] = column_gain(jj, &gain_delta_[jj]);
        }
    }
}

std::size_t ClassTrainer::select(std::size_t t) {
    switch (config_.oracle) {
        case Oracle::LazyOrdered: return order_[t % m_];
        case Oracle::LazyRandom: return std::uniform_int_distribution<std::size_t>(0, m_ - 1)(rng_);
        case Oracle::Boosting:
        case Oracle::BoostingOnce: {
            if (!gains_ready_) {
                gain_.resize(m_);
                gain_delta_.resize(m_);
                stamp_.assign(m_, 0);
                for (std::size_t j = 0; j < m_; ++j) gain_[j] = column_gain(j, &gain_delta_[j]);
                gains_ready_ = true;
            }
            const bool once = config_.oracle == Oracle::BoostingOnce;
            std::size_t best = kNoIndex;
            double best_gain = 0.0;
            for (std::size_t j = 0; j < m_; ++j) {
                if (graph_.reciprocal(j).empty() || (once && used_[j])) continue;
                if (gain_[j] > best_gain) {
                    best_gain = gain_[j];
                    best = j;
                }
            }
            return best;
        }
    }
    return kNoIndex;
}

void ClassTrainer::run() {
    const std::size_t total = effective_iterations(config_, m_);
    const bool boosting = config_.oracle == Oracle::Boosting || config_.oracle == Oracle::BoostingOnce;
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t j = select(t);
        if (j == kNoIndex) {
            trace_.stopped_early = true;
            break;
        }
        if (boosting && std::abs(gain_delta_[j]) < config_.convergence_tol) {
            trace_.stopped_early = true;
            break;
        }
        iterate_once(j);
    }
}

double ClassTrainer::surrogate() const {
    double s = 0.0;
    for (double e : edges_) s += loss_value(config_.loss, e);
    return s / static_cast<double>(m_);
}

double ClassTrainer::weight_drift() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
        double rho = 0.0;
        for (std::size_t j : graph_.direct(i)) rho += r(i, j) * alpha_[j];
        double expected = weight_from_edge(config_.loss, rho);
        double scale = std::max(1.0, std::abs(expected));
        worst = std::max(worst, std::abs(weights_[i] - expected) / scale);
    }
    return worst;
}

TrainResult train(const Dataset& data, const NeighborGraph& graph, const TrainConfig& config) {
    const std::size_t m = data.size();
    require(data.num_classes() >= 2, "training needs at least 2 classes");
    require(graph.size() == m, "graph/dataset mismatch: graph has " + std::to_string(graph.size()) +
                                   " nodes, dataset has " + std::to_string(m));
    require(graph.data_hash() == 0 || graph.data_hash() == data.hash(),
            "graph/dataset mismatch: graph was built from a different dataset");
    require(config.k >= 1, "k must be at least 1");
    require(graph.k() == std::min(config.k, m - 1),
            "graph/dataset mismatch: graph has k = " + std::to_string(graph.k()) + ", config asks for " +
                std::to_string(config.k));

    const int C = data.num_classes();
    std::vector<std::vector<double>> columns(static_cast<std::size_t>(C));
    std::vector<ClassTrace> traces(static_cast<std::size_t>(C));
    parallel_for(static_cast<std::size_t>(C), [&](std::size_t c) {
        ClassTrainer trainer(data, graph, static_cast<int>(c), config);
        trainer.run();
        columns[c].assign(trainer.alpha().begin(), trainer.alpha().end());
        traces[c] = trainer.take_trace();
    });

    TrainResult result;
    result.model = make_model(data, graph.k(), graph.metric(), config.loss);
    for (std::size_t j = 0; j < m; ++j)
        for (int c = 0; c < C; ++c) result.model.coeff(j, c) = columns[static_cast<std::size_t>(c)][j];
    result.diagnostics.loss = config.loss;
    result.diagnostics.m = m;
    result.diagnostics.num_classes = C;
    result.diagnostics.classes = std::move(traces);
    return result;
}

std::vector<double> class_edges(std::span<const double> alpha, const NeighborGraph& graph, const Dataset& data,
                                int c) {
    const std::size_t m = data.size();
    const auto C = static_cast<std::size_t>(data.num_classes());
    require(alpha.size() == m * C, "alpha must be m x C");
    require(graph.size() == m, "graph/dataset mismatch");
    std::vector<double> edges(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j : graph.direct(i)) s += data.y(i, c) * data.y(j, c) * alpha[j * C + static_cast<std::size_t>(c)];
        edges[i] = s;
    }
    return edges;
}

double surrogate_risk(std::span<const double> alpha, const NeighborGraph& graph, const Dataset& data,
                      LossKind loss) {
    double total = 0.0;
    for (int c = 0; c < data.num_classes(); ++c)
        for (double e : class_edges(alpha, graph, data, c)) total += loss_value(loss, e);
    return total / (static_cast<double>(data.size()) * data.num_classes());
}

RateBoundReport check_rate_bound(const TrainDiagnostics& diagnostics) {
    constexpr double kSlack = 1e-12;
    RateBoundReport report;
    double normalizer_sum = 0.0;
    double risk_sum = 0.0;
    for (const auto& trace : diagnostics.classes) {
        RateBoundClassReport cr;
        cr.c = trace.c;
        cr.applicable = diagnostics.loss == LossKind::Exponential;
        cr.tau = trace.tau;
        cr.gamma_min = trace.gamma_min;
        cr.eta_min = trace.eta_min;
        const double rate = 2.0 * trace.eta_min * trace.gamma_min * trace.gamma_min;
        cr.final_bound = std::exp(-rate * static_cast<double>(trace.tau));

        std::size_t tau = 0;
        double product = 1.0;
        for (const auto& rec : trace.iterations) {
            if (rec.wia) ++tau;
            product *= rec.normalizer;
            if (!cr.applicable) continue;
            const double bound = std::exp(-rate * static_cast<double>(tau));
            if (rec.risk01 > bound + kSlack) {
                if (cr.violations++ == 0) cr.first_violation_t = rec.t;
            }
            if (rec.risk01 > product + kSlack) ++cr.normalizer_violations;
        }
        cr.normalizer_product = product;
        cr.final_risk01 = trace.iterations.empty() ? 0.0 : trace.iterations.back().risk01;
        report.total_violations += cr.violations;
        normalizer_sum += product;
        risk_sum += cr.final_risk01;
        report.classes.push_back(cr);
    }
    if (!report.classes.empty()) {
        report.normalizer_bound = normalizer_sum / static_cast<double>(report.classes.size());
        report.final_risk01 = risk_sum / static_cast<double>(report.classes.size());
    }
    return report;
}

std::string diagnostics_csv(const TrainDiagnostics& diagnostics) {
    std::ostringstream out;
    out << "# unn-diagnostics " << kDiagnosticsFormatVersion << " loss=" << to_string(diagnostics.loss)
        << " m=" << diagnostics.m << " classes=" << diagnostics.num_classes << '\n';
    out << "class,t,j,delta,surrogate,gamma,eta,bound,bregman_residual,risk01,normalizer,smoothed\n";
    for (const auto& trace : diagnostics.classes) {
        for (const auto& rec : trace.iterations) {
            out << trace.c << ',' << rec.t << ',' << rec.j << ',' << format_double(rec.delta) << ','
                << format_double(rec.surrogate) << ',' << format_double(rec.gamma) << ','
                << format_double(rec.eta) << ',' << format_double(rec.bound) << ','
                << format_double(rec.bregman_residual) << ',' << format_double(rec.risk01) << ','
                << format_double(rec.normalizer) << ',' << (rec.smoothed ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

void save_diagnostics_csv(const TrainDiagnostics& diagnostics, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
    out << diagnostics_csv(diagnostics);
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace unn
