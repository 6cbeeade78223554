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

#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "rng.hpp"

namespace unn {

using nlohmann::ordered_json;

double empirical_risk(std::span<const double> scores, const Dataset& data) {
    const auto C = static_cast<std::size_t>(data.num_classes());
    require(scores.size() == data.size() * C, "score matrix does not match the dataset");
    if (scores.empty()) return 0.0;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t c = 0; c < C; ++c)
            if (data.y(i, static_cast<int>(c)) * scores[i * C + c] < 0.0) ++errors;
    return static_cast<double>(errors) / static_cast<double>(scores.size());
}

EvalReport summarize(const std::vector<Prediction>& predictions, const Dataset& test, Rule rule, std::size_t k,
                     std::size_t prototypes) {
    require(test.size() > 0, "evaluation needs a non-empty test set");
    require(predictions.size() == test.size(), "prediction count does not match the test set");
    const auto C = static_cast<std::size_t>(test.num_classes());
    EvalReport r;
    r.rule = rule;
    r.k = k;
    r.prototypes = prototypes;
    r.class_names = test.class_names();
    r.queries = test.size();
    r.confusion.assign(C, std::vector<std::size_t>(C, 0));
    std::vector<double> scores;
    scores.reserve(test.size() * C);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& p = predictions[i];
        require(p.scores.size() == C, "prediction has the wrong number of classes");
        ++r.confusion[static_cast<std::size_t>(test.label(i))][static_cast<std::size_t>(p.label)];
        if (p.label != test.label(i)) ++wrong;
        if (p.tie) ++r.ties;
        scores.insert(scores.end(), p.scores.begin(), p.scores.end());
    }
    r.per_class_rate.assign(C, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < C; ++c) {
        std::size_t row = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), std::size_t{0});
        if (row == 0) continue;
        r.per_class_rate[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
        sum += r.per_class_rate[c];
        ++present;
    }
    r.mean_per_class_accuracy = sum / static_cast<double>(present);
    r.error_rate = static_cast<double>(wrong) / static_cast<double>(test.size());
    r.empirical_risk = empirical_risk(scores, test);
    return r;
}

EvalReport evaluate(const LeveragedModel& model, const Dataset& test, Rule rule, std::size_t k, Backend backend) {
    require(test.size() > 0, "evaluation needs a non-empty test set");
    require(test.num_classes() == model.num_classes() && test.class_names() == model.prototypes.class_names(),
            "test classes do not match the model classes");
    if (k == 0) k = model.k;
    auto predictions = predict_batch(model, test, rule, k, backend);
    EvalReport r = summarize(predictions, test, rule, k, model.size());
    // Evaluating an unfiltered model on its own training set also reports the
    // surrogate it was trained on.
    if (model.size() == test.size() && model.prototypes == test && model.size() >= 2) {
        NeighborGraph graph = build_graph(test, model.k, model.metric, backend);
        r.surrogate_risk = surrogate_risk(model.alpha, graph, test, model.loss);
    }
    return r;
}

std::vector<std::size_t> sample_prototypes(std::size_t m, std::size_t count, std::uint64_t seed) {
    require(count <= m, "cannot sample more prototypes than available");
    std::vector<std::size_t> ids(m);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng = make_rng(seed, 0x73616d706c65ull);
    // Partial Fisher-Yates: the first `count` slots are a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, m - 1);
        std::swap(ids[i], ids[pick(rng)]);
    }
    ids.resize(count);
    std::sort(ids.begin(), ids.end());
    return ids;
}

CvReport cross_validate(const Dataset& data, const CvConfig& config) {
    require(config.folds >= 2, "cross-validation needs at least 2 folds");
    require(data.size() >= config.folds, "fewer examples than folds");
    require(config.baseline_fraction >= 0.0 && config.baseline_fraction <= 1.0,
            "baseline fraction must lie in [0, 1]");
    const std::size_t eval_k = config.eval_k == 0 ? config.train.k : config.eval_k;
    CvReport report;
    report.config = config;
    auto folds = split_kfold(data.size(), config.folds, config.seed);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        // The fold's own part trains; the rest is held out.
        const auto& train_ids = folds[f].test;
        const auto& test_ids = folds[f].train;
        Dataset train = data.subset(train_ids);
        Dataset test = data.subset(test_ids);
        require(train.num_classes() == data.num_classes(), "fold lost classes");

        NeighborGraph graph = build_graph(train, config.train.k, Metric::Euclidean, config.backend);
        TrainResult trained = unn::train(train, graph, config.train);
        LeveragedModel filtered = filter_model(trained.model, config.filter);

        FoldResult fr;
        fr.fold = f;
        fr.train_size = train.size();
        fr.test_size = test.size();
        fr.retained = filtered.size();
        fr.retained_fraction = static_cast<double>(fr.retained) / static_cast<double>(fr.train_size);
        fr.leveraged = evaluate(filtered, test, Rule::Leveraged, eval_k, config.backend);

        std::size_t count = config.baseline_fraction == 0.0
                                ? fr.retained
                                : retained_count(config.baseline_fraction, train.size());
        count = std::clamp<std::size_t>(count, 1, train.size());
        auto sample = sample_prototypes(train.size(), count, config.seed + 0x9e3779b97f4a7c15ull * (f + 1));
        LeveragedModel baseline = make_model(train.subset(sample), eval_k, Metric::Euclidean, config.train.loss);
        fr.classic = evaluate(baseline, test, Rule::Classic, eval_k, config.backend);
        report.folds.push_back(std::move(fr));
    }
    const double n = static_cast<double>(report.folds.size());
    for (const auto& fr : report.folds) {
        report.mean_map_leveraged += fr.leveraged.mAP() / n;
        report.mean_map_classic += fr.classic.mAP() / n;
        report.mean_error_leveraged += fr.leveraged.error_rate / n;
        report.mean_error_classic += fr.classic.error_rate / n;
        report.mean_retained_fraction += fr.retained_fraction / n;
    }
    return report;
}

std::vector<double> normalized_edges(const LeveragedModel& model, const Dataset& train, int c) {
    require(c >= 0 && c < model.num_classes(), "class index out of range");
    require(train.class_names() == model.prototypes.class_names(), "dataset classes do not match the model");
    std::unordered_map<std::size_t, std::size_t> proto_of;
    for (std::size_t j = 0; j < model.size(); ++j) {
        require(model.original_ids[j] < train.size(), "model prototype id outside the dataset");
        proto_of.emplace(model.original_ids[j], j);
    }
    std::vector<std::size_t> pool;
    if (model.per_class()) {
        pool = model.class_pools[static_cast<std::size_t>(c)];
    } else {
        pool.resize(model.size());
        std::iota(pool.begin(), pool.end(), 0);
    }
    double scale = 0.0;
    for (std::size_t j : pool) scale += std::abs(model.coeff(j, c));
    NeighborIndex index(model.prototypes, pool, model.metric, Backend::KdTree);

    std::vector<double> edges(train.size(), 0.0);
    if (scale == 0.0) return edges;
    parallel_for(train.size(), [&](std::size_t i) {
        std::optional<std::size_t> self;
        if (auto it = proto_of.find(i); it != proto_of.end()) self = it->second;
        double h = 0.0;
        for (std::size_t j : index.query(train.row(i), model.k, self))
            h += model.coeff(j, c) * model.prototypes.y(j, c);
        edges[i] = train.y(i, c) * h / scale;
    });
    return edges;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

MarginReport margin_stats(const LeveragedModel& model, const Dataset& train) {
    MarginReport report;
    report.prototypes = model.size();
    for (int c = 0; c < model.num_classes(); ++c) {
        auto edges = normalized_edges(model, train, c);
        std::sort(edges.begin(), edges.end());
        MarginClassStats s;
        s.c = c;
        s.count = edges.size();
        if (!edges.empty()) {
            s.min = edges.front();
            s.max = edges.back();
            s.q1 = quantile(edges, 0.25);
            s.median = quantile(edges, 0.5);
            s.q3 = quantile(edges, 0.75);
            s.mean = std::accumulate(edges.begin(), edges.end(), 0.0) / static_cast<double>(edges.size());
        }
        auto first_pos = std::upper_bound(edges.begin(), edges.end(), 0.0);
        s.nonpositive = static_cast<std::size_t>(first_pos - edges.begin());
        if (first_pos != edges.end()) {
            s.min_positive = *first_pos;
            if (!(report.min_positive <= s.min_positive)) report.min_positive = s.min_positive;
        }
        report.classes.push_back(s);
    }
    return report;
}

ReproResult repro_ripley(const ReproConfig& config) {
    auto [train, test] = gen_ripley(config.m_train, config.m_test, config.seed);
    NeighborGraph graph = build_graph(train, config.k);
    TrainConfig boosting;
    boosting.k = config.k;
    boosting.seed = config.seed;
    TrainConfig lazy = boosting;
    lazy.oracle = Oracle::LazyRandom;
    lazy.iterations = effective_iterations(boosting, train.size());
    TrainResult boosted = unn::train(train, graph, boosting);
    TrainResult lazied = unn::train(train, graph, lazy);

    ReproResult out;
    std::ostringstream trace;
    trace << "# unn-repro-surrogate " << kReportFormatVersion << " seed=" << config.seed << '\n';
    trace << "oracle,class,t,surrogate\n";
    for (const auto* run : {&boosted, &lazied}) {
        const std::string name = run == &boosted ? "boosting" : "lazy-random";
        for (const auto& ct : run->diagnostics.classes) {
            trace << name << ',' << ct.c << ",0," << format_double(ct.initial_surrogate) << '\n';
            for (const auto& rec : ct.iterations)
                trace << name << ',' << ct.c << ',' << rec.t << ',' << format_double(rec.surrogate) << '\n';
        }
    }
    out.surrogate_csv = trace.str();

    LeveragedModel full = make_model(train, config.k, Metric::Euclidean, LossKind::Exponential);
    std::ostringstream errors;
    errors << "# unn-repro-error " << kReportFormatVersion << " seed=" << config.seed << '\n';
    errors << "theta,k,retained,error_leveraged,error_classic,error_classic_sampled\n";
    ordered_json summary;
    summary["format"] = "unn-repro";
    summary["version"] = kReportFormatVersion;
    summary["seed"] = config.seed;
    summary["m_train"] = config.m_train;
    summary["m_test"] = config.m_test;
    summary["k"] = config.k;
    summary["bayes_error_test"] = [&] {
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < test.size(); ++i)
            if (ripley_bayes_label(test.row(i)[0], test.row(i)[1]) != test.label(i)) ++wrong;
        return static_cast<double>(wrong) / static_cast<double>(test.size());
    }();
    ordered_json rows = ordered_json::array();
    for (double theta : config.thetas) {
        LeveragedModel filtered = filter_model(boosted.model, FilterSpec::fraction(theta));
        auto sample = sample_prototypes(train.size(), filtered.size(), config.seed);
        LeveragedModel sampled = make_model(train.subset(sample), config.k, Metric::Euclidean, LossKind::Exponential);
        for (std::size_t k : config.eval_ks) {
            double el = evaluate(filtered, test, Rule::Leveraged, k).error_rate;
            double ec = evaluate(full, test, Rule::Classic, k).error_rate;
            double es = evaluate(sampled, test, Rule::Classic, k).error_rate;
            errors << format_double(theta) << ',' << k << ',' << filtered.size() << ',' << format_double(el) << ','
                   << format_double(ec) << ',' << format_double(es) << '\n';
            rows.push_back({{"theta", theta},
                            {"k", k},
                            {"retained", filtered.size()},
                            {"error_leveraged", el},
                            {"error_classic", ec},
                            {"error_classic_sampled", es}});
        }
    }
    summary["sweep"] = rows;
    out.error_csv = errors.str();
    out.summary_json = summary.dump(2) + "\n";
    return out;
}

namespace {

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json eval_json(const EvalReport& r) {
    ordered_json j;
    j["rule"] = to_string(r.rule);
    j["k"] = r.k;
    j["prototypes"] = r.prototypes;
    j["queries"] = r.queries;
    j["classes"] = r.class_names;
    j["confusion"] = r.confusion;
    ordered_json rates = ordered_json::array();
    for (double v : r.per_class_rate) rates.push_back(number_or_null(v));
    j["per_class_rate"] = rates;
    j["mAP"] = r.mean_per_class_accuracy;
    j["mean_per_class_accuracy"] = r.mean_per_class_accuracy;
    j["empirical_risk"] = r.empirical_risk;
    j["error_rate"] = r.error_rate;
    j["surrogate_risk"] = number_or_null(r.surrogate_risk);
    j["ties"] = r.ties;
    return j;
}

ordered_json header(const char* kind) {
    ordered_json j;
    j["format"] = "unn-report";
    j["version"] = kReportFormatVersion;
    j["kind"] = kind;
    return j;
}

std::string fixed(double v, int digits = 4) {
    if (!std::isfinite(v)) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

}  // namespace

std::string to_json(const EvalReport& report, int indent) {
    ordered_json j = header("eval");
    j.update(eval_json(report));
    return j.dump(indent) + "\n";
}

std::string to_text(const EvalReport& r) {
    std::ostringstream out;
    out << "rule " << to_string(r.rule) << "  k " << r.k << "  prototypes " << r.prototypes << "  queries "
        << r.queries << '\n';
    std::size_t width = 9;
    for (const auto& name : r.class_names) width = std::max(width, name.size() + 2);
    out << std::left << std::setw(static_cast<int>(width)) << "true\\pred";
    for (const auto& name : r.class_names) out << std::right << std::setw(static_cast<int>(width)) << name;
    out << std::right << std::setw(10) << "rate" << '\n';
    for (std::size_t c = 0; c < r.class_names.size(); ++c) {
        out << std::left << std::setw(static_cast<int>(width)) << r.class_names[c];
        for (std::size_t v : r.confusion[c]) out << std::right << std::setw(static_cast<int>(width)) << v;
        out << std::right << std::setw(10) << fixed(r.per_class_rate[c]) << '\n';
    }
    out << "mAP            " << fixed(r.mean_per_class_accuracy) << '\n';
    out << "error rate     " << fixed(r.error_rate) << '\n';
    out << "empirical risk " << fixed(r.empirical_risk) << '\n';
    if (std::isfinite(r.surrogate_risk)) out << "surrogate risk " << fixed(r.surrogate_risk, 6) << '\n';
    out << "ties           " << r.ties << '\n';
    return out.str();
}

std::string to_json(const CvReport& report, int indent) {
    ordered_json j = header("cv");
    const auto& cfg = report.config;
    j["folds"] = cfg.folds;
    j["seed"] = cfg.seed;
    j["train"] = {{"loss", to_string(cfg.train.loss)},
                  {"k", cfg.train.k},
                  {"iterations", cfg.train.iterations},
                  {"oracle", to_string(cfg.train.oracle)},
                  {"smoothing", to_string(cfg.train.smoothing)},
                  {"delta_mode", to_string(cfg.train.delta_mode)},
                  {"seed", cfg.train.seed}};
    j["filter"] = cfg.filter.describe();
    j["eval_k"] = cfg.eval_k == 0 ? cfg.train.k : cfg.eval_k;
    j["baseline_fraction"] = cfg.baseline_fraction;
    ordered_json folds = ordered_json::array();
    for (const auto& f : report.folds) {
        folds.push_back({{"fold", f.fold},
                         {"train_size", f.train_size},
                         {"test_size", f.test_size},
                         {"retained", f.retained},
                         {"retained_fraction", f.retained_fraction},
                         {"leveraged", eval_json(f.leveraged)},
                         {"classic", eval_json(f.classic)}});
    }
    j["per_fold"] = folds;
    j["mean"] = {{"mAP_leveraged", report.mean_map_leveraged},
                 {"mAP_classic", report.mean_map_classic},
                 {"error_leveraged", report.mean_error_leveraged},
                 {"error_classic", report.mean_error_classic},
                 {"retained_fraction", report.mean_retained_fraction}};
    return j.dump(indent) + "\n";
}

std::string to_text(const CvReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(6) << "fold" << std::right << std::setw(8) << "train" << std::setw(8) << "test"
        << std::setw(10) << "retained" << std::setw(12) << "mAP unn" << std::setw(12) << "mAP knn" << std::setw(12)
        << "err unn" << std::setw(12) << "err knn" << '\n';
    for (const auto& f : report.folds) {
        out << std::left << std::setw(6) << f.fold << std::right << std::setw(8) << f.train_size << std::setw(8)
            << f.test_size << std::setw(10) << f.retained << std::setw(12) << fixed(f.leveraged.mAP())
            << std::setw(12) << fixed(f.classic.mAP()) << std::setw(12) << fixed(f.leveraged.error_rate)
            << std::setw(12) << fixed(f.classic.error_rate) << '\n';
    }
    out << std::left << std::setw(6) << "mean" << std::right << std::setw(8) << "" << std::setw(8) << ""
        << std::setw(10) << fixed(report.mean_retained_fraction, 3) << std::setw(12)
        << fixed(report.mean_map_leveraged) << std::setw(12) << fixed(report.mean_map_classic) << std::setw(12)
        << fixed(report.mean_error_leveraged) << std::setw(12) << fixed(report.mean_error_classic) << '\n';
    return out.str();
}

std::string cv_folds_csv(const CvReport& report) {
    std::ostringstream out;
    out << "# unn-cv-folds " << kReportFormatVersion << '\n';
    out << "fold,train_size,test_size,retained,retained_fraction,map_leveraged,map_classic,error_leveraged,"
           "error_classic\n";
    for (const auto& f : report.folds) {
        out << f.fold << ',' << f.train_size << ',' << f.test_size << ',' << f.retained << ','
            << format_double(f.retained_fraction) << ',' << format_double(f.leveraged.mAP()) << ','
            << format_double(f.classic.mAP()) << ',' << format_double(f.leveraged.error_rate) << ','
            << format_double(f.classic.error_rate) << '\n';
    }
    return out.str();
}

std::string to_json(const MarginReport& report, int indent) {
    ordered_json j = header("margins");
    j["prototypes"] = report.prototypes;
    ordered_json classes = ordered_json::array();
    for (const auto& s : report.classes) {
        classes.push_back({{"class", s.c},
                           {"count", s.count},
                           {"min", s.min},
                           {"q1", s.q1},
                           {"median", s.median},
                           {"q3", s.q3},
                           {"max", s.max},
                           {"mean", s.mean},
                           {"min_positive", number_or_null(s.min_positive)},
                           {"nonpositive", s.nonpositive}});
    }
    j["classes"] = classes;
    j["min_positive"] = number_or_null(report.min_positive);
    return j.dump(indent) + "\n";
}

std::string to_text(const MarginReport& report) {
    std::ostringstream out;
    out << "prototypes " << report.prototypes << '\n';
    out << std::left << std::setw(7) << "class" << std::right;
    for (const char* h : {"min", "q1", "median", "q3", "max", "mean", "min>0"}) out << std::setw(11) << h;
    out << std::setw(8) << "<=0" << '\n';
    for (const auto& s : report.classes) {
        out << std::left << std::setw(7) << s.c << std::right;
        for (double v : {s.min, s.q1, s.median, s.q3, s.max, s.mean, s.min_positive})
            out << std::setw(11) << fixed(v, 5);
        out << std::setw(8) << s.nonpositive << '\n';
    }
    return out.str();
}

std::string to_json(const RateBoundReport& report, int indent) {
    ordered_json j = header("rate-bound");
    ordered_json classes = ordered_json::array();
    for (const auto& c : report.classes) {
        classes.push_back({{"class", c.c},
                           {"applicable", c.applicable},
                           {"tau", c.tau},
                           {"gamma_min", c.gamma_min},
                           {"eta_min", c.eta_min},
                           {"final_bound", c.final_bound},
                           {"violations", c.violations},
                           {"first_violation_t", c.first_violation_t},
                           {"normalizer_product", c.normalizer_product},
                           {"normalizer_violations", c.normalizer_violations},
                           {"final_risk01", c.final_risk01}});
    }
    j["classes"] = classes;
    j["total_violations"] = report.total_violations;
    j["normalizer_bound"] = report.normalizer_bound;
    j["final_risk01"] = report.final_risk01;
    return j.dump(indent) + "\n";
}

}  // namespace unn
