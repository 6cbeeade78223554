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

#include "dataset.hpp"
#include "losses.hpp"
#include "model.hpp"
#include "neighbors.hpp"
#include "rng.hpp"

namespace unn {

/// Weak index chooser. The lazy variants visit indices in a seeded order
/// (each once per sweep) or uniformly at random; the boosting variant picks
/// the index whose step decreases the surrogate most, possibly repeatedly,
/// and stops once no step decreases it; BoostingOnce never repeats an index.
enum class Oracle { LazyRandom, LazyOrdered, Boosting, BoostingOnce };
enum class Smoothing { OnZero, Always };
// Auto uses the closed form for the exponential loss and for the squared loss
// with two classes, and the root finder elsewhere.
enum class DeltaMode { Auto, Closed, Exact };

std::string to_string(Oracle o);
Oracle parse_oracle(const std::string& s);
std::string to_string(Smoothing s);
Smoothing parse_smoothing(const std::string& s);
std::string to_string(DeltaMode d);
DeltaMode parse_delta_mode(const std::string& s);

struct TrainConfig {
    LossKind loss = LossKind::Exponential;
    std::size_t k = 9;
    std::size_t iterations = 0;  // per class; 0 picks m
    Oracle oracle = Oracle::Boosting;
    Smoothing smoothing = Smoothing::OnZero;
    DeltaMode delta_mode = DeltaMode::Auto;
    double convergence_tol = 1e-8;
    std::uint64_t seed = 0;
    // Recompute weights from alpha every this many iterations and record the
    // largest discrepancy (0 disables).
    std::size_t drift_check_every = 0;
};

std::size_t effective_iterations(const TrainConfig& config, std::size_t m);

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct IterationRecord {
    std::size_t t = 0;             // 1-based
    std::size_t j = kNoIndex;      // kNoIndex for a no-op (uncovered index)
    double delta = 0.0;
    double surrogate = 0.0;        // per-class surrogate risk after the step
    double gamma = 0.0;            // |p_j - 1/2|
    double eta = 0.0;              // (w+ + w-) / ||w||_1
    double bound = 1.0;            // exp(-2 eta gamma^2 tau) with running minima
    double bregman_residual = std::numeric_limits<double>::quiet_NaN();
    double risk01 = 0.0;           // fraction of examples with negative edge for this class
    double normalizer = 1.0;       // ||w_t+1||_1 / ||w_t||_1
    bool smoothed = false;
    bool wia = false;
};

struct ClassTrace {
    int c = 0;
    double initial_surrogate = 0.0;
    std::vector<IterationRecord> iterations;
    std::size_t tau = 0;                  // iterations where the weak index assumption held
    double gamma_min = 0.0;
    double eta_min = 0.0;
    bool stopped_early = false;
    std::size_t negative_weight_events = 0;
    std::size_t weight_clamp_events = 0;
    double max_weight_drift = 0.0;
};

struct TrainDiagnostics {
    LossKind loss = LossKind::Exponential;
    std::size_t m = 0;
    int num_classes = 0;
    std::vector<ClassTrace> classes;
};

/// One-vs-all training of the leveraging coefficients. Every class is an
/// independent problem with its own weights and random stream, so classes may
/// run concurrently and the result does not depend on scheduling.
struct TrainResult {
    LeveragedModel model;
    TrainDiagnostics diagnostics;
};

TrainResult train(const Dataset& data, const NeighborGraph& graph, const TrainConfig& config);

/// Incremental state of a single class problem. Exposed for tests and for
/// callers that want to drive the chooser themselves.
class ClassTrainer {
public:
    ClassTrainer(const Dataset& data, const NeighborGraph& graph, int c, const TrainConfig& config);

    // Leverages index j (partial sums, step, weight update, alpha increment) and
    // returns the applied delta. An index
    // without reciprocal neighbours is a no-op returning 0.
    double iterate_once(std::size_t j);

    // Weak index chooser for step t (0-based). Returns kNoIndex when the
    // oracle has nothing left to pick.
    std::size_t select(std::size_t t);

    // The delta iterate_once(j) would apply, without applying it.
    double peek_delta(std::size_t j) const;

    // Runs the configured number of iterations.
    void run();

    std::span<const double> weights() const { return weights_; }
    std::span<const double> edges() const { return edges_; }
    std::span<const double> alpha() const { return alpha_; }
    double surrogate() const;  // (1/m) sum_i psi(edge_i)
    const ClassTrace& trace() const { return trace_; }
    ClassTrace take_trace() { return std::move(trace_); }

    // Largest |w_i - weight_from_edge(rho_i)| with rho recomputed from alpha.
    double weight_drift() const;

private:
    struct Step {
        double delta = 0.0;
        double w_plus = 0.0;
        double w_minus = 0.0;
        bool smoothed = false;
        bool covered = false;
    };

    Step compute_step(std::size_t j) const;
    double r(std::size_t i, std::size_t j) const { return y_[i] * y_[j]; }
    bool use_closed_form() const;
    // Surrogate decrease (times m) of the step iterate_once(j) would apply.
    double column_gain(std::size_t j, double* delta) const;
    void refresh_gains_around(std::size_t j);
    void refresh_weight_norm();

    const Dataset& data_;
    const NeighborGraph& graph_;
    int c_;
    TrainConfig config_;
    std::size_t m_;
    std::vector<double> y_;
    std::vector<double> weights_;
    std::vector<double> edges_;
    std::vector<double> alpha_;
    // Boosting oracle cache: gain and step of every column. After leveraging
    // j only the columns sharing a reciprocal neighbour with j change.
    std::vector<double> gain_;
    std::vector<double> gain_delta_;
    std::vector<std::size_t> stamp_;
    std::size_t epoch_ = 0;
    bool gains_ready_ = false;
    std::vector<char> used_;
    std::vector<std::size_t> order_;
    Rng rng_;
    double loss_sum_ = 0.0;
    double weight_l1_ = 0.0;
    std::size_t negatives_ = 0;
    std::size_t steps_ = 0;
    ClassTrace trace_;
};

// Surrogate risk over all classes: (1/mC) sum_c sum_i psi(edge_ic).
double surrogate_risk(std::span<const double> alpha, const NeighborGraph& graph, const Dataset& data,
                      LossKind loss);
// Leveraged edges (R^(c) alpha^(c))_i of one class, alpha being m x C row-major.
std::vector<double> class_edges(std::span<const double> alpha, const NeighborGraph& graph, const Dataset& data,
                                int c);

struct RateBoundClassReport {
    int c = 0;
    bool applicable = false;       // exponential loss only
    std::size_t tau = 0;
    double gamma_min = 0.0;
    double eta_min = 0.0;
    double final_bound = 1.0;      // exp(-2 eta_min gamma_min^2 tau)
    std::size_t violations = 0;    // risk01 > bound + 1e-12 at some iteration
    std::size_t first_violation_t = 0;
    double normalizer_product = 1.0;
    std::size_t normalizer_violations = 0;  // risk01 > prod Z_t + 1e-12
    double final_risk01 = 0.0;
};

struct RateBoundReport {
    std::vector<RateBoundClassReport> classes;
    std::size_t total_violations = 0;
    double normalizer_bound = 1.0;  // (1/C) sum_c prod_t Z_t
    double final_risk01 = 0.0;      // (1/C) sum_c risk01_c
};

RateBoundReport check_rate_bound(const TrainDiagnostics& diagnostics);

inline constexpr int kDiagnosticsFormatVersion = 1;
void save_diagnostics_csv(const TrainDiagnostics& diagnostics, const std::string& path);
std::string diagnostics_csv(const TrainDiagnostics& diagnostics);

}  // namespace unn
