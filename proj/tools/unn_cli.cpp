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

// Command-line front end. Talks to the library through the C interface only.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "unn/unn.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

struct CliFailure {
    int code;
    std::string message;
};

[[noreturn]] void raise_status(unn_status s, const std::string& context) {
    std::string msg = context + ": " + unn_last_error();
    throw CliFailure{s == UNN_ERR_IO ? kExitIo : kExitData, msg};
}

void check(unn_status s, const std::string& context) {
    if (s != UNN_OK) raise_status(s, context);
}

template <class T, void (*Free)(T*)>
struct HandleDeleter {
    void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<unn_dataset, HandleDeleter<unn_dataset, unn_dataset_free>>;
using Graph = std::unique_ptr<unn_graph, HandleDeleter<unn_graph, unn_graph_free>>;
using Model = std::unique_ptr<unn_model, HandleDeleter<unn_model, unn_model_free>>;
using Diagnostics = std::unique_ptr<unn_diagnostics, HandleDeleter<unn_diagnostics, unn_diagnostics_free>>;
using Predictions = std::unique_ptr<unn_predictions, HandleDeleter<unn_predictions, unn_predictions_free>>;

// Takes ownership of a string returned by the library.
std::string take(char* s) {
    if (!s) return {};
    std::string out(s);
    unn_string_free(s);
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw CliFailure{kExitIo, "cannot write '" + path + "'"};
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw CliFailure{kExitIo, "cannot create directory '" + dir + "': " + ec.message()};
}

Dataset load_dataset(const std::string& path, const std::string& label_column) {
    unn_dataset* d = nullptr;
    check(unn_dataset_load_csv(path.c_str(), label_column.c_str(), &d), "reading " + path);
    return Dataset(d);
}

Model load_model(const std::string& path) {
    unn_model* m = nullptr;
    check(unn_model_load(path.c_str(), &m), "reading " + path);
    return Model(m);
}

const std::map<std::string, unn_loss> kLosses{
    {"exp", UNN_LOSS_EXP}, {"squared", UNN_LOSS_SQUARED}, {"logistic", UNN_LOSS_LOGISTIC}};
const std::map<std::string, unn_oracle> kOracles{{"boosting", UNN_ORACLE_BOOSTING},
                                                 {"boosting-once", UNN_ORACLE_BOOSTING_ONCE},
                                                 {"lazy-random", UNN_ORACLE_LAZY_RANDOM},
                                                 {"lazy-ordered", UNN_ORACLE_LAZY_ORDERED}};
const std::map<std::string, unn_smoothing> kSmoothing{{"on-zero", UNN_SMOOTHING_ON_ZERO},
                                                      {"always", UNN_SMOOTHING_ALWAYS}};
const std::map<std::string, unn_delta_mode> kDeltaModes{
    {"auto", UNN_DELTA_AUTO}, {"closed", UNN_DELTA_CLOSED}, {"exact", UNN_DELTA_EXACT}};
const std::map<std::string, unn_backend> kBackends{{"kdtree", UNN_BACKEND_KDTREE},
                                                   {"exhaustive", UNN_BACKEND_EXHAUSTIVE}};
const std::map<std::string, unn_rule> kRules{{"leveraged", UNN_RULE_LEVERAGED}, {"classic", UNN_RULE_CLASSIC}};

template <class E>
CLI::Option* add_choice(CLI::App* app, const std::string& name, E& target, const std::map<std::string, E>& table,
                        const std::string& help) {
    return app->add_option(name, target, help)
        ->transform(CLI::CheckedTransformer(table, CLI::ignore_case))
        ->capture_default_str();
}

template <class E>
std::string choice_name(E value, const std::map<std::string, E>& table) {
    for (const auto& [k, v] : table)
        if (v == value) return k;
    return "?";
}

struct TrainFlags {
    unn_train_config config{};
    bool exact_delta = false;

    TrainFlags() { unn_train_config_init(&config); }

    void attach(CLI::App* app, std::size_t default_k) {
        config.k = default_k;
        add_choice(app, "--loss", config.loss, kLosses, "surrogate loss");
        app->add_option("--k", config.k, "neighbourhood size")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--iters", config.iterations, "iterations per class; 0 means one per example")
            ->capture_default_str();
        add_choice(app, "--oracle", config.oracle, kOracles, "index selection rule");
        add_choice(app, "--smoothing", config.smoothing, kSmoothing, "when to smooth the partial weight sums");
        add_choice(app, "--delta", config.delta_mode, kDeltaModes, "step size computation");
        app->add_flag("--exact-delta", exact_delta, "shorthand for --delta exact");
        app->add_option("--tol", config.convergence_tol, "stop when a step decreases the surrogate by less")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        app->add_option("--seed", config.seed, "random seed")->capture_default_str();
        app->add_option("--drift-check", config.drift_check_every,
                        "recompute weights from scratch every this many steps (0 disables)")
            ->capture_default_str();
    }

    unn_train_config resolved() const {
        unn_train_config c = config;
        if (exact_delta) c.delta_mode = UNN_DELTA_EXACT;
        return c;
    }
};

struct FilterFlags {
    double theta = 1.0;
    double alpha_tilde = 0.0;
    bool per_class = false;
    bool exclude_nonpositive = false;
    CLI::Option* theta_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;

    void attach(CLI::App* app) {
        theta_opt = app->add_option("--theta", theta, "keep this fraction of prototypes with largest squared norm")
                        ->check(CLI::Range(0.0, 1.0))
                        ->capture_default_str();
        alpha_opt = app->add_option("--alpha-tilde", alpha_tilde, "keep prototypes whose largest coefficient exceeds this")
                        ->excludes(theta_opt);
        app->add_flag("--per-class-filter", per_class, "filter each class pool separately");
        app->add_flag("--exclude-nonpositive", exclude_nonpositive,
                      "fraction mode: drop prototypes with no positive coefficient");
    }

    unn_filter_spec spec(bool threshold_by_default) const {
        unn_filter_spec s;
        unn_filter_spec_init(&s);
        const bool threshold = alpha_opt->count() > 0 || (threshold_by_default && theta_opt->count() == 0);
        s.mode = threshold ? UNN_FILTER_THRESHOLD : UNN_FILTER_FRACTION;
        s.theta = theta;
        s.alpha_tilde = alpha_tilde;
        s.per_class = per_class ? 1 : 0;
        s.exclude_nonpositive = exclude_nonpositive ? 1 : 0;
        return s;
    }
};

// Loads the graph cache when it matches the data, otherwise builds it and
// refreshes the cache.
Graph obtain_graph(const unn_dataset* data, std::size_t k, unn_backend backend, const std::string& cache) {
    unn_graph* g = nullptr;
    if (!cache.empty() && fs::exists(cache)) {
        unn_status s = unn_graph_load(cache.c_str(), data, k, &g);
        if (s == UNN_OK) return Graph(g);
        if (s != UNN_ERR_VERSION) raise_status(s, "reading " + cache);
        std::cerr << "warning: " << unn_last_error() << "; rebuilding " << cache << "\n";
    }
    check(unn_graph_build(data, k, backend, &g), "building neighbour graph");
    Graph graph(g);
    if (!cache.empty()) check(unn_graph_save(graph.get(), cache.c_str()), "writing " + cache);
    return graph;
}

// ---- subcommands ----------------------------------------------------------

struct GenArgs {
    std::size_t train = 250;
    std::size_t test = 1000;
    int classes = 8;
    std::size_t per_class = 100;
    std::size_t dim = 16;
    double spread = 0.4;
    std::uint64_t seed = 1;
    std::string out = ".";
    std::string prefix;
};

void write_sidecar(const std::string& path, const std::string& generator,
                   const std::vector<std::pair<std::string, const unn_dataset*>>& files) {
    nlohmann::ordered_json j;
    j["format"] = "unn-dataset-meta";
    j["version"] = 1;
    j["generator"] = generator;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& [name, d] : files) {
        char* meta = nullptr;
        check(unn_dataset_metadata(d, &meta), "reading metadata");
        list.push_back({{"file", name}, {"rows", unn_dataset_size(d)}, {"parameters", nlohmann::json::parse(take(meta))}});
    }
    j["files"] = list;
    write_file(path, j.dump(2) + "\n");
}

int run_gen_ripley(const GenArgs& a) {
    ensure_dir(a.out);
    unn_dataset *tr = nullptr, *te = nullptr;
    check(unn_gen_ripley(a.train, a.test, a.seed, &tr, &te), "generating ripley");
    Dataset train(tr), test(te);
    const std::string stem = a.prefix.empty() ? "ripley" : a.prefix;
    const std::string train_name = stem + "_train.csv", test_name = stem + "_test.csv";
    check(unn_dataset_save_csv(train.get(), (fs::path(a.out) / train_name).c_str()), "writing " + train_name);
    check(unn_dataset_save_csv(test.get(), (fs::path(a.out) / test_name).c_str()), "writing " + test_name);
    write_sidecar((fs::path(a.out) / (stem + ".meta.json")).string(), "ripley",
                  {{train_name, train.get()}, {test_name, test.get()}});
    std::cout << "wrote " << unn_dataset_size(train.get()) << " training and " << unn_dataset_size(test.get())
              << " test rows to " << a.out << "\n";
    return kExitOk;
}

int run_gen_blobs(const GenArgs& a) {
    ensure_dir(a.out);
    unn_dataset* d = nullptr;
    check(unn_gen_blobs(a.classes, a.per_class, a.dim, a.spread, a.seed, &d), "generating blobs");
    Dataset data(d);
    const std::string stem = a.prefix.empty() ? "blobs" : a.prefix;
    const std::string name = stem + ".csv";
    check(unn_dataset_save_csv(data.get(), (fs::path(a.out) / name).c_str()), "writing " + name);
    write_sidecar((fs::path(a.out) / (stem + ".meta.json")).string(), "blobs", {{name, data.get()}});
    std::cout << "wrote " << unn_dataset_size(data.get()) << " rows to " << (fs::path(a.out) / name).string()
              << "\n";
    return kExitOk;
}

struct GraphArgs {
    std::string data;
    std::string label = "label";
    std::size_t k = 9;
    unn_backend backend = UNN_BACKEND_KDTREE;
    std::string out;
};

int run_graph(const GraphArgs& a) {
    Dataset data = load_dataset(a.data, a.label);
    unn_graph* g = nullptr;
    check(unn_graph_build(data.get(), a.k, a.backend, &g), "building neighbour graph");
    Graph graph(g);
    check(unn_graph_save(graph.get(), a.out.c_str()), "writing " + a.out);
    std::cout << "graph over " << unn_graph_size(graph.get()) << " examples, k = " << unn_graph_k(graph.get())
              << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string data;
    std::string label = "label";
    TrainFlags train;
    std::string graph;
    unn_backend backend = UNN_BACKEND_KDTREE;
    std::string model = "model.unn";
    std::string diagnostics;
    std::string rate_bound;
};

int run_train(const TrainArgs& a) {
    Dataset data = load_dataset(a.data, a.label);
    const unn_train_config cfg = a.train.resolved();
    Graph graph = obtain_graph(data.get(), cfg.k, a.backend, a.graph);
    unn_model* m = nullptr;
    unn_diagnostics* d = nullptr;
    check(unn_train(data.get(), graph.get(), &cfg, &m, &d), "training");
    Model model(m);
    Diagnostics diag(d);
    check(unn_model_save(model.get(), a.model.c_str()), "writing " + a.model);
    if (!a.diagnostics.empty())
        check(unn_diagnostics_save_csv(diag.get(), a.diagnostics.c_str()), "writing " + a.diagnostics);
    char* bound_json = nullptr;
    std::size_t violations = 0;
    check(unn_diagnostics_rate_bound(diag.get(), &bound_json, &violations), "checking rate bound");
    std::string bound = take(bound_json);
    if (!a.rate_bound.empty()) write_file(a.rate_bound, bound + "\n");

    std::cout << "trained " << unn_model_num_classes(model.get()) << " classes over "
              << unn_model_size(model.get()) << " prototypes (loss " << choice_name(cfg.loss, kLosses) << ", oracle "
              << choice_name(cfg.oracle, kOracles) << ", k " << unn_model_k(model.get()) << ")\n";
    for (int c = 0; c < unn_diagnostics_num_classes(diag.get()); ++c) {
        const std::size_t steps = unn_diagnostics_iterations(diag.get(), c);
        double last = unn_diagnostics_initial_surrogate(diag.get(), c);
        if (steps > 0) {
            unn_iteration_record r;
            check(unn_diagnostics_record(diag.get(), c, steps - 1, &r), "reading diagnostics");
            last = r.surrogate;
        }
        std::printf("  class %-12s steps %6zu  surrogate %.6g -> %.6g%s\n",
                    unn_dataset_class_name(data.get(), c), steps, unn_diagnostics_initial_surrogate(diag.get(), c),
                    last, unn_diagnostics_stopped_early(diag.get(), c) ? "  (converged)" : "");
    }
    if (cfg.loss == UNN_LOSS_EXP) std::cout << "rate bound violations: " << violations << "\n";
    std::cout << "model written to " << a.model << "\n";
    return kExitOk;
}

struct FilterArgs {
    std::string model;
    FilterFlags filter;
    std::string out = "filtered.unn";
};

int run_filter(const FilterArgs& a) {
    Model model = load_model(a.model);
    const unn_filter_spec spec = a.filter.spec(false);
    unn_model* f = nullptr;
    check(unn_model_filter(model.get(), &spec, &f), "filtering");
    Model filtered(f);
    check(unn_model_save(filtered.get(), a.out.c_str()), "writing " + a.out);
    std::cout << "retained " << unn_model_size(filtered.get()) << " of " << unn_model_size(model.get())
              << " prototypes\n";
    return kExitOk;
}

struct PredictArgs {
    std::string model;
    std::string data;
    std::string label = "label";
    unn_rule rule = UNN_RULE_LEVERAGED;
    std::size_t k = 0;
    unn_backend backend = UNN_BACKEND_KDTREE;
    std::string out = "predictions.csv";
    std::string contributions;
};

int run_predict(const PredictArgs& a) {
    Model model = load_model(a.model);
    Dataset queries = load_dataset(a.data, a.label);
    unn_predictions* p = nullptr;
    check(unn_predict(model.get(), queries.get(), a.rule, a.k, a.backend, a.contributions.empty() ? 0 : 1, &p),
          "predicting");
    Predictions preds(p);
    char* csv = nullptr;
    check(unn_predictions_csv(preds.get(), &csv), "formatting predictions");
    write_file(a.out, take(csv));
    if (!a.contributions.empty()) {
        check(unn_predictions_contributions_csv(preds.get(), &csv), "formatting contributions");
        write_file(a.contributions, take(csv));
    }
    std::cout << "predicted " << unn_predictions_count(preds.get()) << " queries\n";
    return kExitOk;
}

struct EvalArgs {
    std::string model;
    std::string train;
    std::string data;
    std::string label = "label";
    unn_rule rule = UNN_RULE_LEVERAGED;
    std::size_t k = 0;
    unn_backend backend = UNN_BACKEND_KDTREE;
    std::string json;
};

int run_eval(const EvalArgs& a) {
    Model model;
    if (!a.model.empty()) {
        model = load_model(a.model);
    } else {
        // A raw training set only supports the classic rule.
        if (a.rule != UNN_RULE_CLASSIC) throw CliFailure{kExitUsage, "--train requires --mode classic"};
        Dataset train = load_dataset(a.train, a.label);
        unn_model* m = nullptr;
        check(unn_model_from_dataset(train.get(), a.k == 0 ? 9 : a.k, &m), "building prototype set");
        model.reset(m);
    }
    Dataset test = load_dataset(a.data, a.label);
    char *json = nullptr, *text = nullptr;
    check(unn_evaluate(model.get(), test.get(), a.rule, a.k, a.backend, nullptr, &json, &text), "evaluating");
    std::string j = take(json);
    if (!a.json.empty()) write_file(a.json, j + "\n");
    std::cout << take(text);
    return kExitOk;
}

struct CvArgs {
    std::string data;
    std::string label = "label";
    bool normalize = false;
    std::size_t folds = 3;
    TrainFlags train;
    FilterFlags filter;
    std::size_t eval_k = 0;
    std::uint64_t seed = 0;
    double baseline_fraction = 1.0;
    unn_backend backend = UNN_BACKEND_KDTREE;
    std::string json;
    std::string folds_csv;
};

int run_cv(const CvArgs& a) {
    Dataset data = load_dataset(a.data, a.label);
    if (a.normalize) {
        unn_dataset* n = nullptr;
        check(unn_dataset_normalize(data.get(), &n), "normalizing");
        data.reset(n);
    }
    unn_cv_config cfg;
    unn_cv_config_init(&cfg);
    cfg.folds = a.folds;
    cfg.train = a.train.resolved();
    cfg.filter = a.filter.spec(true);
    cfg.eval_k = a.eval_k;
    cfg.seed = a.seed;
    cfg.baseline_fraction = a.baseline_fraction;
    cfg.backend = a.backend;
    char *json = nullptr, *text = nullptr, *csv = nullptr;
    check(unn_cross_validate(data.get(), &cfg, nullptr, &json, &text, &csv), "cross-validating");
    std::string j = take(json), t = take(text), c = take(csv);
    if (!a.json.empty()) write_file(a.json, j + "\n");
    if (!a.folds_csv.empty()) write_file(a.folds_csv, c);
    std::cout << t;
    return kExitOk;
}

struct MarginArgs {
    std::string model;
    std::string train;
    std::string label = "label";
    std::string json;
};

int run_margins(const MarginArgs& a) {
    Model model = load_model(a.model);
    Dataset train = load_dataset(a.train, a.label);
    char *json = nullptr, *text = nullptr;
    check(unn_margin_stats(model.get(), train.get(), nullptr, &json, &text), "computing margins");
    std::string j = take(json);
    if (!a.json.empty()) write_file(a.json, j + "\n");
    std::cout << take(text);
    return kExitOk;
}

struct ReproArgs {
    unn_repro_config config{};
    std::string out = "repro";

    ReproArgs() { unn_repro_config_init(&config); }
};

int run_repro_ripley(const ReproArgs& a) {
    ensure_dir(a.out);
    char *surrogate = nullptr, *error = nullptr, *summary = nullptr;
    check(unn_repro_ripley(&a.config, &surrogate, &error, &summary), "running ripley pipeline");
    const fs::path dir(a.out);
    write_file((dir / "surrogate.csv").string(), take(surrogate));
    write_file((dir / "error.csv").string(), take(error));
    std::string s = take(summary);
    write_file((dir / "summary.json").string(), s + "\n");
    std::cout << s << "\n";
    return kExitOk;
}

void warning_to_stderr(const char* message, void*) { std::cerr << "warning: " << message << "\n"; }
void discard_warning(const char*, void*) {}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Leveraged k-nearest-neighbour training and evaluation"};
    app.set_version_flag("--version", std::string(unn_version()));
    app.set_config("--config", "", "read flags from a TOML/INI file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0 uses every core)")->capture_default_str();
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "suppress warnings");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset");
    gen_cmd->require_subcommand(1);
    auto* ripley_cmd = gen_cmd->add_subcommand("ripley", "two-class Gaussian mixture, train and test splits");
    ripley_cmd->add_option("--train", gen.train, "training rows")->capture_default_str();
    ripley_cmd->add_option("--test", gen.test, "test rows")->capture_default_str();
    auto* blobs_cmd = gen_cmd->add_subcommand("blobs", "isotropic Gaussian clusters, one per class");
    blobs_cmd->add_option("--classes", gen.classes, "number of classes")->check(CLI::Range(2, 1 << 20))
        ->capture_default_str();
    blobs_cmd->add_option("--per-class", gen.per_class, "rows per class")->capture_default_str();
    blobs_cmd->add_option("--dim", gen.dim, "dimension")->check(CLI::PositiveNumber)->capture_default_str();
    blobs_cmd->add_option("--spread", gen.spread, "cluster standard deviation")->check(CLI::PositiveNumber)
        ->capture_default_str();
    for (auto* sub : {ripley_cmd, blobs_cmd}) {
        sub->add_option("--seed", gen.seed, "random seed")->capture_default_str();
        sub->add_option("--out", gen.out, "output directory")->capture_default_str();
        sub->add_option("--prefix", gen.prefix, "file name stem (defaults to the generator name)");
    }

    GraphArgs graph;
    auto* graph_cmd = app.add_subcommand("graph", "build and cache the k-nearest-neighbour graph");
    graph_cmd->add_option("--data", graph.data, "training CSV")->required()->check(CLI::ExistingFile);
    graph_cmd->add_option("--label-column", graph.label, "label column name")->capture_default_str();
    graph_cmd->add_option("--k", graph.k, "neighbourhood size")->check(CLI::PositiveNumber)->capture_default_str();
    add_choice(graph_cmd, "--backend", graph.backend, kBackends, "neighbour search backend");
    graph_cmd->add_option("--out", graph.out, "graph file")->required();

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "learn leveraging coefficients");
    train_cmd->add_option("--data", train.data, "training CSV")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--label-column", train.label, "label column name")->capture_default_str();
    train.train.attach(train_cmd, 9);
    train_cmd->add_option("--graph", train.graph, "graph cache file (read when valid, written otherwise)");
    add_choice(train_cmd, "--backend", train.backend, kBackends, "neighbour search backend");
    train_cmd->add_option("--model", train.model, "model output file")->capture_default_str();
    train_cmd->add_option("--diagnostics", train.diagnostics, "per-iteration diagnostics CSV");
    train_cmd->add_option("--rate-bound", train.rate_bound, "rate bound report JSON");

    FilterArgs filter;
    auto* filter_cmd = app.add_subcommand("filter", "keep the most leveraged prototypes");
    filter_cmd->add_option("--model", filter.model, "model file")->required()->check(CLI::ExistingFile);
    filter.filter.attach(filter_cmd);
    filter_cmd->add_option("--out", filter.out, "filtered model file")->capture_default_str();

    PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "classify queries");
    predict_cmd->add_option("--model", predict.model, "model file")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--data", predict.data, "query CSV")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--label-column", predict.label, "label column name")->capture_default_str();
    add_choice(predict_cmd, "--mode", predict.rule, kRules, "voting rule");
    predict_cmd->add_option("--k", predict.k, "neighbourhood size (0 uses the model's)")->capture_default_str();
    add_choice(predict_cmd, "--backend", predict.backend, kBackends, "neighbour search backend");
    predict_cmd->add_option("--out", predict.out, "predictions CSV")->capture_default_str();
    predict_cmd->add_option("--contributions", predict.contributions, "per-prototype vote CSV");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate on a labelled test set");
    auto* eval_model = eval_cmd->add_option("--model", eval.model, "model file")->check(CLI::ExistingFile);
    eval_cmd->add_option("--train", eval.train, "raw training CSV (classic rule only)")
        ->check(CLI::ExistingFile)
        ->excludes(eval_model);
    eval_cmd->add_option("--data", eval.data, "test CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--label-column", eval.label, "label column name")->capture_default_str();
    add_choice(eval_cmd, "--mode", eval.rule, kRules, "voting rule");
    eval_cmd->add_option("--k", eval.k, "neighbourhood size (0 uses the model's)")->capture_default_str();
    add_choice(eval_cmd, "--backend", eval.backend, kBackends, "neighbour search backend");
    eval_cmd->add_option("--json", eval.json, "report JSON");

    CvArgs cv;
    auto* cv_cmd = app.add_subcommand("cv", "cross-validate against plain k-NN");
    cv_cmd->add_option("--data", cv.data, "dataset CSV")->required()->check(CLI::ExistingFile);
    cv_cmd->add_option("--label-column", cv.label, "label column name")->capture_default_str();
    cv_cmd->add_flag("--normalize", cv.normalize, "scale every feature to [0, 1] first");
    cv_cmd->add_option("--folds", cv.folds, "number of folds")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    cv.train.attach(cv_cmd, 11);
    cv.filter.attach(cv_cmd);
    cv_cmd->add_option("--eval-k", cv.eval_k, "evaluation neighbourhood size (0 uses --k)")->capture_default_str();
    cv_cmd->add_option("--split-seed", cv.seed, "fold assignment seed")->capture_default_str();
    cv_cmd->add_option("--baseline-fraction", cv.baseline_fraction,
                       "plain k-NN prototype sample fraction (0 matches the retained fraction)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    add_choice(cv_cmd, "--backend", cv.backend, kBackends, "neighbour search backend");
    cv_cmd->add_option("--json", cv.json, "report JSON");
    cv_cmd->add_option("--folds-csv", cv.folds_csv, "per-fold CSV");

    MarginArgs margins;
    auto* margins_cmd = app.add_subcommand("margins", "distribution of normalised training margins");
    margins_cmd->add_option("--model", margins.model, "model file")->required()->check(CLI::ExistingFile);
    margins_cmd->add_option("--train", margins.train, "training CSV the model was fitted on")
        ->required()
        ->check(CLI::ExistingFile);
    margins_cmd->add_option("--label-column", margins.label, "label column name")->capture_default_str();
    margins_cmd->add_option("--json", margins.json, "report JSON");

    ReproArgs repro;
    auto* repro_cmd = app.add_subcommand("repro", "canned experiment pipelines");
    repro_cmd->require_subcommand(1);
    auto* repro_ripley = repro_cmd->add_subcommand("ripley", "generate, train, filter sweep and k sweep on Ripley");
    repro_ripley->add_option("--train", repro.config.m_train, "training rows")->capture_default_str();
    repro_ripley->add_option("--test", repro.config.m_test, "test rows")->capture_default_str();
    repro_ripley->add_option("--seed", repro.config.seed, "random seed")->capture_default_str();
    repro_ripley->add_option("--k", repro.config.k, "training neighbourhood size")->check(CLI::PositiveNumber)
        ->capture_default_str();
    repro_ripley->add_option("--out", repro.out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    unn_set_threads(threads);
    unn_set_warning_handler(quiet ? discard_warning : warning_to_stderr, nullptr);

    try {
        if (*ripley_cmd) return run_gen_ripley(gen);
        if (*blobs_cmd) return run_gen_blobs(gen);
        if (*graph_cmd) return run_graph(graph);
        if (*train_cmd) return run_train(train);
        if (*filter_cmd) return run_filter(filter);
        if (*predict_cmd) return run_predict(predict);
        if (*eval_cmd) {
            if (eval.model.empty() && eval.train.empty()) {
                std::cerr << "error: eval needs --model or --train\n";
                return kExitUsage;
            }
            return run_eval(eval);
        }
        if (*cv_cmd) return run_cv(cv);
        if (*margins_cmd) return run_margins(margins);
        if (*repro_ripley) return run_repro_ripley(repro);
    } catch (const CliFailure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
