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


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "common.hpp"
#include "dataset.hpp"
#include "fixtures.hpp"
#include "losses.hpp"
#include "model.hpp"
#include "neighbors.hpp"
#include "oracles.hpp"
#include "train.hpp"

using namespace unn;

namespace {

// Index 0 (class A) is the direct neighbour of rows 1-4; three of them share
// its class. Row 9 is nobody's neighbour.
struct StepFixture {
    Dataset data = fixture::line_dataset({0, 0, 0, 0, 1, 0, 1, 0, 1, 0}, 2);
    NeighborGraph graph = fixture::manual_graph(data, 1, {1, 0, 0, 0, 0, 6, 5, 8, 7, 8});
};

// Column 0 is covered only by rows of its own class; every other covered
// column is covered by one agreeing and one disagreeing row.
struct ImbalanceFixture {
    Dataset data = fixture::line_dataset({0, 0, 0, 1, 0, 1}, 2);
    NeighborGraph graph = fixture::manual_graph(data, 1, {3, 0, 0, 5, 5, 3});
};

TrainConfig config_with(LossKind loss, Oracle oracle, std::size_t k, std::size_t iterations = 0) {
    TrainConfig c;
    c.loss = loss;
    c.oracle = oracle;
    c.k = k;
    c.iterations = iterations;
    return c;
}

void check_monotone(const TrainDiagnostics& d) {
    for (const auto& trace : d.classes) {
        double prev = trace.initial_surrogate;
        for (const auto& rec : trace.iterations) {
            CHECK(rec.surrogate <= prev + 1e-12);
            prev = rec.surrogate;
        }
    }
}

// First seeded random instance (m = 8, k = 2) whose exponential surrogate
// attains its minimum.
struct OptimumInstance {
    Dataset data;
    oracle::Minimum minimum;
};

OptimumInstance attainable_instance(std::size_t m, std::size_t k) {
    for (std::uint64_t seed = 0;; ++seed) {
        Dataset d = fixture::random_dataset(m, 2, 2, 1000 + seed);
        auto direct = oracle::knn_graph(d, k);
        auto R = oracle::edge_matrix(d, direct, k, 0);
        bool mixed = true;
        for (std::size_t j = 0; j < m && mixed; ++j) {
            bool pos = false, neg = false;
            for (std::size_t i = 0; i < m; ++i) {
                pos |= R[i][j] > 0;
                neg |= R[i][j] < 0;
            }
            mixed = pos == neg;
        }
        if (!mixed) continue;
        auto best = oracle::minimize_exp(R, 1e-10, 5000);
        if (best.converged && best.max_abs_edge < 15 && best.value < 0.999) return {d, best};
    }
}

}  // namespace

TEST_CASE("one leveraging step") {
    StepFixture f;
    SUBCASE("plain step") {
        ClassTrainer t(f.data, f.graph, 0, config_with(LossKind::Exponential, Oracle::LazyOrdered, 1));
        CHECK(t.peek_delta(0) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-14));
        const double delta = t.iterate_once(0);
        CHECK(delta == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-14));
        CHECK(t.alpha()[0] == delta);
        CHECK(t.weights()[1] == doctest::Approx(std::exp(-delta)).epsilon(1e-14));
        CHECK(t.weights()[4] == doctest::Approx(std::exp(delta)).epsilon(1e-14));
        CHECK_FALSE(t.trace().iterations.back().smoothed);
    }
    SUBCASE("always smoothed") {
        auto cfg = config_with(LossKind::Exponential, Oracle::LazyOrdered, 1);
        cfg.smoothing = Smoothing::Always;
        ClassTrainer t(f.data, f.graph, 0, cfg);
        CHECK(t.iterate_once(0) == doctest::Approx(0.5 * std::log(3.1 / 1.1)).epsilon(1e-14));
        CHECK(t.trace().iterations.back().smoothed);
        CHECK(0.5 * std::log(3.1 / 1.1) == doctest::Approx(0.5181).epsilon(1e-4));
    }
    SUBCASE("an uncovered index is a no-op") {
        ClassTrainer t(f.data, f.graph, 0, config_with(LossKind::Exponential, Oracle::LazyOrdered, 1));
        std::vector<double> before(t.weights().begin(), t.weights().end());
        CHECK(f.graph.reciprocal(9).empty());
        CHECK(t.iterate_once(9) == 0.0);
        CHECK(std::equal(before.begin(), before.end(), t.weights().begin()));
        CHECK(t.alpha()[9] == 0.0);
    }
}

TEST_CASE("only reciprocal weights move") {
    auto [train, test] = gen_ripley(120, 2, 4);
    auto g = build_graph(train, 5);
    for (LossKind loss : {LossKind::Exponential, LossKind::Squared, LossKind::Logistic}) {
        ClassTrainer t(train, g, 1, config_with(loss, Oracle::LazyRandom, 5));
        for (std::size_t step = 0; step < 60; ++step) {
            std::vector<double> before(t.weights().begin(), t.weights().end());
            const std::size_t j = t.select(step);
            REQUIRE(j < train.size());
            t.iterate_once(j);
            auto rec = g.reciprocal(j);
            std::set<std::size_t> touched(rec.begin(), rec.end());
            for (std::size_t i = 0; i < train.size(); ++i)
                if (!touched.count(i)) CHECK(t.weights()[i] == before[i]);
        }
    }
}

TEST_CASE("weights stay consistent with the coefficients") {
    auto [train, test] = gen_ripley(100, 2, 6);
    auto g = build_graph(train, 7);
    for (LossKind loss : {LossKind::Exponential, LossKind::Squared, LossKind::Logistic}) {
        auto cfg = config_with(loss, Oracle::Boosting, 7, 300);
        cfg.drift_check_every = 1;
        auto result = unn::train(train, g, cfg);
        for (const auto& trace : result.diagnostics.classes) CHECK(trace.max_weight_drift <= 1e-9);
        ClassTrainer t(train, g, 0, cfg);
        t.run();
        CHECK(t.weight_drift() <= 1e-9);
    }
}

TEST_CASE("smoothing") {
    CHECK(smooth(0.0, 4.0, 4) == std::pair{0.25, 4.25});
    // Pure neighbourhoods: every step is smoothed, positive and decreasing.
    Dataset d = gen_blobs(2, 20, 2, 0.01, 3);
    auto g = build_graph(d, 3);
    auto result = unn::train(d, g, config_with(LossKind::Exponential, Oracle::Boosting, 3));
    for (const auto& trace : result.diagnostics.classes) {
        REQUIRE_FALSE(trace.iterations.empty());
        double prev = trace.initial_surrogate;
        for (const auto& rec : trace.iterations) {
            CHECK(rec.delta > 0.0);
            CHECK(rec.smoothed);
            CHECK(rec.surrogate < prev);
            prev = rec.surrogate;
        }
    }
}

TEST_CASE("index choosers") {
    auto [train, test] = gen_ripley(90, 2, 8);
    auto g = build_graph(train, 4);

    SUBCASE("lazy ordered visits every index once in m steps") {
        ClassTrainer t(train, g, 0, config_with(LossKind::Exponential, Oracle::LazyOrdered, 4));
        std::vector<std::size_t> seen;
        for (std::size_t s = 0; s < train.size(); ++s) {
            seen.push_back(t.select(s));
            t.iterate_once(seen.back());
        }
        std::sort(seen.begin(), seen.end());
        std::vector<std::size_t> all(train.size());
        std::iota(all.begin(), all.end(), 0);
        CHECK(seen == all);
    }
    SUBCASE("lazy random is reproducible") {
        auto sequence = [&](std::uint64_t seed) {
            auto cfg = config_with(LossKind::Exponential, Oracle::LazyRandom, 4);
            cfg.seed = seed;
            ClassTrainer t(train, g, 0, cfg);
            std::vector<std::size_t> out;
            for (std::size_t s = 0; s < 50; ++s) {
                out.push_back(t.select(s));
                t.iterate_once(out.back());
            }
            return out;
        };
        CHECK(sequence(5) == sequence(5));
        CHECK(sequence(5) != sequence(6));
    }
    SUBCASE("boosting picks the one unbalanced column") {
        ImbalanceFixture f;
        ClassTrainer t(f.data, f.graph, 0, config_with(LossKind::Exponential, Oracle::Boosting, 1));
        CHECK(t.select(0) == 0);
        t.iterate_once(0);
        // The other covered columns stay balanced; only column 0 can still
        // lower the surrogate.
        CHECK(t.select(1) == 0);
        CHECK(t.peek_delta(3) == 0.0);
        CHECK(t.peek_delta(5) == 0.0);
    }
    SUBCASE("boosting once never repeats") {
        ClassTrainer t(train, g, 0, config_with(LossKind::Exponential, Oracle::BoostingOnce, 4));
        std::set<std::size_t> seen;
        for (std::size_t s = 0; s < train.size(); ++s) {
            const std::size_t j = t.select(s);
            if (j == kNoIndex) break;
            CHECK(seen.insert(j).second);
            t.iterate_once(j);
        }
    }
    CHECK(effective_iterations(TrainConfig{}, 250) == 250);
    TrainConfig fixed;
    fixed.iterations = 17;
    CHECK(effective_iterations(fixed, 250) == 17);
}

TEST_CASE("surrogate at zero coefficients") {
    auto [train, test] = gen_ripley(40, 2, 1);
    auto g = build_graph(train, 3);
    std::vector<double> zero(train.size() * 2, 0.0);
    CHECK(surrogate_risk(zero, g, train, LossKind::Exponential) == 1.0);
    CHECK(surrogate_risk(zero, g, train, LossKind::Logistic) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(surrogate_risk(zero, g, train, LossKind::Squared) == 1.0);
}

TEST_CASE("surrogate decreases monotonically under boosting") {
    auto [ripley, unused] = gen_ripley(250, 2, 1);
    auto rg = build_graph(ripley, 9);
    for (LossKind loss : {LossKind::Exponential, LossKind::Squared, LossKind::Logistic}) {
        auto result = unn::train(ripley, rg, config_with(loss, Oracle::Boosting, 9));
        check_monotone(result.diagnostics);
        // Recorded surrogate matches a recomputation from the coefficients.
        const double last = (result.diagnostics.classes[0].iterations.back().surrogate +
                             result.diagnostics.classes[1].iterations.back().surrogate) /
                            2.0;
        CHECK(surrogate_risk(result.model.alpha, rg, ripley, loss) == doctest::Approx(last).epsilon(1e-9));
    }
    Dataset blobs = gen_blobs(8, 40, 16, 0.4, 3);
    auto bg = build_graph(blobs, 11);
    check_monotone(unn::train(blobs, bg, config_with(LossKind::Exponential, Oracle::Boosting, 11)).diagnostics);
}

TEST_CASE("converged surrogate is the global minimum") {
    auto inst = attainable_instance(8, 2);
    auto g = build_graph(inst.data, 2);
    auto cfg = config_with(LossKind::Exponential, Oracle::Boosting, 2, 20000);
    cfg.convergence_tol = 1e-14;
    auto result = unn::train(inst.data, g, cfg);
    const auto& trace = result.diagnostics.classes[0];
    REQUIRE_FALSE(trace.iterations.empty());
    CHECK(std::abs(trace.iterations.back().surrogate - inst.minimum.value) <= 1e-6);
    CHECK(trace.stopped_early);
}

TEST_CASE("surrogate decrement equals the Bregman sum") {
    auto [train, test] = gen_ripley(250, 2, 1);
    auto g = build_graph(train, 9);
    ClassTrainer t(train, g, 0, config_with(LossKind::Exponential, Oracle::Boosting, 9));
    const double m = static_cast<double>(train.size());
    std::size_t plain_steps = 0;
    for (std::size_t s = 0; s < train.size(); ++s) {
        const std::size_t j = t.select(s);
        if (j == kNoIndex) break;
        std::vector<double> before(t.weights().begin(), t.weights().end());
        const double old_value = t.surrogate();
        t.iterate_once(j);
        const auto& rec = t.trace().iterations.back();
        CHECK(std::abs(rec.bregman_residual) <= 1e-8);
        if (rec.smoothed) continue;
        ++plain_steps;
        std::vector<double> after(t.weights().begin(), t.weights().end());
        CHECK(std::abs((old_value - t.surrogate()) - oracle::bregman_xlogx(after, before) / m) <= 1e-8);
    }
    CHECK(plain_steps > 100);
}

TEST_CASE("rate bound report") {
    SUBCASE("no iterations") {
        TrainDiagnostics d;
        d.num_classes = 1;
        d.classes.resize(1);
        auto report = check_rate_bound(d);
        CHECK(report.classes[0].final_bound == 1.0);
        CHECK(report.total_violations == 0);
    }
    SUBCASE("separable data") {
        Dataset d = gen_blobs(3, 20, 2, 0.01, 1);
        auto g = build_graph(d, 3);
        auto report = check_rate_bound(unn::train(d, g, config_with(LossKind::Exponential, Oracle::Boosting, 3)).diagnostics);
        CHECK(report.total_violations == 0);
    }
    SUBCASE("ripley") {
        auto [train, test] = gen_ripley(250, 2, 1);
        auto g = build_graph(train, 9);
        auto result = unn::train(train, g, config_with(LossKind::Exponential, Oracle::Boosting, 9));
        auto report = check_rate_bound(result.diagnostics);
        CHECK(report.total_violations == 0);
        for (const auto& c : report.classes) {
            CHECK(c.applicable);
            CHECK(c.tau > 0);
            CHECK(c.final_risk01 <= c.final_bound);
        }
    }
}

TEST_CASE("classes train independently") {
    Dataset d = gen_blobs(5, 30, 4, 0.6, 9);
    auto g = build_graph(d, 7);
    auto cfg = config_with(LossKind::Exponential, Oracle::LazyRandom, 7);
    cfg.seed = 42;
    set_thread_count(1);
    auto serial = unn::train(d, g, cfg);
    set_thread_count(4);
    auto parallel = unn::train(d, g, cfg);
    set_thread_count(0);
    CHECK(serial.model.alpha == parallel.model.alpha);
    CHECK(serialize_model(serial.model) == serialize_model(parallel.model));

    // A lone class trainer reproduces the column of the full run.
    ClassTrainer t(d, g, 3, cfg);
    t.run();
    for (std::size_t j = 0; j < d.size(); ++j) CHECK(t.alpha()[j] == serial.model.coeff(j, 3));
}

TEST_CASE("uncovered prototypes keep zero coefficients") {
    auto [train, test] = gen_ripley(250, 2, 2);
    auto g = build_graph(train, 3);
    auto result = unn::train(train, g, config_with(LossKind::Exponential, Oracle::Boosting, 3));
    std::size_t uncovered = 0;
    for (std::size_t j = 0; j < train.size(); ++j)
        if (g.reciprocal(j).empty()) {
            ++uncovered;
            CHECK(result.model.coeff(j, 0) == 0.0);
            CHECK(result.model.coeff(j, 1) == 0.0);
        }
    CHECK(uncovered > 0);
}

TEST_CASE("closed and exact steps agree for two classes") {
    auto [train, test] = gen_ripley(150, 2, 3);
    auto g = build_graph(train, 5);
    auto cfg = config_with(LossKind::Exponential, Oracle::LazyOrdered, 5);
    cfg.delta_mode = DeltaMode::Closed;
    auto closed = unn::train(train, g, cfg);
    cfg.delta_mode = DeltaMode::Exact;
    auto exact = unn::train(train, g, cfg);
    for (std::size_t i = 0; i < closed.model.alpha.size(); ++i)
        CHECK(std::abs(closed.model.alpha[i] - exact.model.alpha[i]) <= 1e-9);
}

TEST_CASE("model files") {
    fixture::TempDir dir;
    auto [train, test] = gen_ripley(60, 2, 5);
    LeveragedModel blank = make_model(train, 5, Metric::Euclidean, LossKind::Exponential);
    CHECK(std::all_of(blank.alpha.begin(), blank.alpha.end(), [](double a) { return a == 0.0; }));

    auto g = build_graph(train, 5);
    auto result = unn::train(train, g, config_with(LossKind::Logistic, Oracle::Boosting, 5));
    const std::string text = serialize_model(result.model);
    CHECK(text.rfind("unn-model 1", 0) == 0);
    CHECK(deserialize_model(text) == result.model);
    save_model(result.model, dir.file("m.unn"));
    LeveragedModel back = load_model(dir.file("m.unn"));
    CHECK(back == result.model);
    CHECK(serialize_model(back) == text);

    try {
        deserialize_model("unn-model 9" + text.substr(std::string("unn-model 1").size()));
        FAIL("expected a version error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Version);
        CHECK(std::string(e.what()).find("9") != std::string::npos);
    }
    CHECK_THROWS_AS(deserialize_model("not a model"), Error);
    CHECK_THROWS_AS(deserialize_model(text.substr(0, text.size() / 2)), Error);
}

TEST_CASE("diagnostics csv") {
    auto [train, test] = gen_ripley(40, 2, 5);
    auto g = build_graph(train, 3);
    auto result = unn::train(train, g, config_with(LossKind::Exponential, Oracle::Boosting, 3, 5));
    const std::string csv = diagnostics_csv(result.diagnostics);
    CHECK(csv.rfind("# unn-diagnostics 1", 0) == 0);
    CHECK(csv.find("class,t,j,delta,surrogate,gamma,eta,bound,bregman_residual") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 2 * 5);
}
