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

#include "unn/unn.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "classify.hpp"
#include "common.hpp"
#include "dataset.hpp"
#include "eval.hpp"
#include "model.hpp"
#include "neighbors.hpp"
#include "train.hpp"

struct unn_dataset {
    unn::Dataset data;
};
struct unn_graph {
    unn::NeighborGraph graph;
};
struct unn_model {
    unn::LeveragedModel model;
};
struct unn_diagnostics {
    unn::TrainDiagnostics diag;
};
struct unn_predictions {
    std::vector<unn::Prediction> predictions;
    std::vector<std::string> class_names;
};

namespace {

thread_local std::string g_last_error;

unn_status status_of(unn::ErrorKind kind) {
    switch (kind) {
        case unn::ErrorKind::Domain: return UNN_ERR_DOMAIN;
        case unn::ErrorKind::Parse: return UNN_ERR_PARSE;
        case unn::ErrorKind::Io: return UNN_ERR_IO;
        case unn::ErrorKind::Version: return UNN_ERR_VERSION;
        case unn::ErrorKind::Divergence: return UNN_ERR_DIVERGENCE;
        case unn::ErrorKind::Internal: return UNN_ERR_INTERNAL;
    }
    return UNN_ERR_INTERNAL;
}

template <class F>
unn_status guarded(F&& body) {
    g_last_error.clear();
    try {
        body();
        return UNN_OK;
    } catch (const unn::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return UNN_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return UNN_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return UNN_ERR_INTERNAL;
    }
}

unn_status null_arg(const char* what) {
    g_last_error = std::string("null argument: ") + what;
    return UNN_ERR_NULL;
}

#define UNN_REQUIRE_ARG(p) \
    if ((p) == nullptr) return null_arg(#p)

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put_string(char** dst, const std::string& s) {
    if (dst) *dst = dup_string(s);
}

unn::LossKind to_core(unn_loss l) {
    switch (l) {
        case UNN_LOSS_EXP: return unn::LossKind::Exponential;
        case UNN_LOSS_SQUARED: return unn::LossKind::Squared;
        case UNN_LOSS_LOGISTIC: return unn::LossKind::Logistic;
    }
    unn::fail(unn::ErrorKind::Domain, "unknown loss code " + std::to_string(static_cast<int>(l)));
}

unn::Oracle to_core(unn_oracle o) {
    switch (o) {
        case UNN_ORACLE_BOOSTING: return unn::Oracle::Boosting;
        case UNN_ORACLE_LAZY_RANDOM: return unn::Oracle::LazyRandom;
        case UNN_ORACLE_LAZY_ORDERED: return unn::Oracle::LazyOrdered;
        case UNN_ORACLE_BOOSTING_ONCE: return unn::Oracle::BoostingOnce;
    }
    unn::fail(unn::ErrorKind::Domain, "unknown oracle code " + std::to_string(static_cast<int>(o)));
}

unn::Smoothing to_core(unn_smoothing s) {
    switch (s) {
        case UNN_SMOOTHING_ON_ZERO: return unn::Smoothing::OnZero;
        case UNN_SMOOTHING_ALWAYS: return unn::Smoothing::Always;
    }
    unn::fail(unn::ErrorKind::Domain, "unknown smoothing code " + std::to_string(static_cast<int>(s)));
}

unn::DeltaMode to_core(unn_delta_mode d) {
    switch (d) {
        case UNN_DELTA_AUTO: return unn::DeltaMode::Auto;
        case UNN_DELTA_CLOSED: return unn::DeltaMode::Closed;
        case UNN_DELTA_EXACT: return unn::DeltaMode::Exact;
    }
    unn::fail(unn::ErrorKind::Domain, "unknown delta mode code " + std::to_string(static_cast<int>(d)));
}

unn::Backend to_core(unn_backend b) {
    switch (b) {
        case UNN_BACKEND_KDTREE: return unn::Backend::KdTree;
        case UNN_BACKEND_EXHAUSTIVE: return unn::Backend::Exhaustive;
    }
    unn::fail(unn::ErrorKind::Domain, "unknown backend code " + std::to_string(static_cast<int>(b)));
}

unn::Rule to_core(unn_rule r) {
    switch (r) {
        case UNN_RULE_LEVERAGED: return unn::Rule::Leveraged;
        case UNN_RULE_CLASSIC: return unn::Rule::Classic;
    }
    unn::fail(unn::ErrorKind::Domain, "unknown rule code " + std::to_string(static_cast<int>(r)));
}

unn::TrainConfig to_core(const unn_train_config& c) {
    unn::TrainConfig out;
    out.loss = to_core(c.loss);
    out.k = c.k;
    out.iterations = c.iterations;
    out.oracle = to_core(c.oracle);
    out.smoothing = to_core(c.smoothing);
    out.delta_mode = to_core(c.delta_mode);
    out.convergence_tol = c.convergence_tol;
    out.seed = c.seed;
    out.drift_check_every = c.drift_check_every;
    unn::require(out.k >= 1, "k must be at least 1");
    return out;
}

unn::FilterSpec to_core(const unn_filter_spec& s) {
    unn::FilterSpec out;
    switch (s.mode) {
        case UNN_FILTER_FRACTION: out = unn::FilterSpec::fraction(s.theta); break;
        case UNN_FILTER_THRESHOLD: out = unn::FilterSpec::threshold(s.alpha_tilde); break;
        default: unn::fail(unn::ErrorKind::Domain, "unknown filter mode code");
    }
    out.per_class = s.per_class != 0;
    out.exclude_nonpositive = s.exclude_nonpositive != 0;
    return out;
}

const unn::ClassTrace* trace_of(const unn_diagnostics* d, int c) {
    if (!d || c < 0 || static_cast<std::size_t>(c) >= d->diag.classes.size()) return nullptr;
    return &d->diag.classes[static_cast<std::size_t>(c)];
}

}  // namespace

extern "C" {

const char* unn_version(void) { return "1.0.0"; }
int unn_abi_version(void) { return UNN_ABI_VERSION; }

const char* unn_status_name(unn_status status) {
    switch (status) {
        case UNN_OK: return "ok";
        case UNN_ERR_DOMAIN: return "domain error";
        case UNN_ERR_PARSE: return "parse error";
        case UNN_ERR_IO: return "i/o error";
        case UNN_ERR_VERSION: return "version mismatch";
        case UNN_ERR_DIVERGENCE: return "divergence";
        case UNN_ERR_INTERNAL: return "internal error";
        case UNN_ERR_NULL: return "null argument";
    }
    return "unknown status";
}

const char* unn_last_error(void) { return g_last_error.c_str(); }
void unn_string_free(char* s) { std::free(s); }

void unn_set_threads(unsigned n) { unn::set_thread_count(n); }
unsigned unn_get_threads(void) { return unn::thread_count(); }

void unn_set_warning_handler(unn_warning_fn fn, void* user) {
    if (!fn) {
        unn::set_warning_sink(nullptr);
        return;
    }
    unn::set_warning_sink([fn, user](std::string_view msg) {
        std::string copy(msg);
        fn(copy.c_str(), user);
    });
}

// ---- datasets -------------------------------------------------------------

unn_status unn_dataset_load_csv(const char* path, const char* label_column, unn_dataset** out) {
    UNN_REQUIRE_ARG(path);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto d = std::make_unique<unn_dataset>();
        d->data = unn::load_csv(path, label_column ? label_column : "label");
        *out = d.release();
    });
}

unn_status unn_dataset_save_csv(const unn_dataset* data, const char* path) {
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(path);
    return guarded([&] { unn::save_csv(data->data, path); });
}

unn_status unn_dataset_create(size_t m, size_t dim, const double* features, const int* labels,
                              const char* const* class_names, int num_classes, unn_dataset** out) {
    UNN_REQUIRE_ARG(out);
    UNN_REQUIRE_ARG(class_names);
    if (m > 0 && dim > 0) UNN_REQUIRE_ARG(features);
    if (m > 0) UNN_REQUIRE_ARG(labels);
    return guarded([&] {
        unn::require(num_classes >= 0, "negative class count");
        std::vector<std::string> names;
        for (int c = 0; c < num_classes; ++c) {
            unn::require(class_names[c] != nullptr, "null class name");
            names.emplace_back(class_names[c]);
        }
        std::vector<double> feats(features, features + m * dim);
        std::vector<int> labs(labels, labels + m);
        auto d = std::make_unique<unn_dataset>();
        d->data = unn::Dataset(dim, std::move(names), std::move(feats), std::move(labs));
        *out = d.release();
    });
}

unn_status unn_gen_ripley(size_t m_train, size_t m_test, uint64_t seed, unn_dataset** train, unn_dataset** test) {
    UNN_REQUIRE_ARG(train);
    UNN_REQUIRE_ARG(test);
    return guarded([&] {
        auto [a, b] = unn::gen_ripley(m_train, m_test, seed);
        auto ta = std::make_unique<unn_dataset>();
        auto tb = std::make_unique<unn_dataset>();
        ta->data = std::move(a);
        tb->data = std::move(b);
        *train = ta.release();
        *test = tb.release();
    });
}

unn_status unn_gen_blobs(int num_classes, size_t per_class, size_t dim, double spread, uint64_t seed,
                         unn_dataset** out) {
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto d = std::make_unique<unn_dataset>();
        d->data = unn::gen_blobs(num_classes, per_class, dim, spread, seed);
        *out = d.release();
    });
}

unn_status unn_dataset_normalize(const unn_dataset* data, unn_dataset** out) {
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto d = std::make_unique<unn_dataset>();
        d->data = unn::normalize_minmax(data->data);
        *out = d.release();
    });
}

unn_status unn_dataset_subset(const unn_dataset* data, const size_t* ids, size_t count, unn_dataset** out) {
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(out);
    if (count > 0) UNN_REQUIRE_ARG(ids);
    return guarded([&] {
        for (size_t i = 0; i < count; ++i) unn::require(ids[i] < data->data.size(), "subset id out of range");
        auto d = std::make_unique<unn_dataset>();
        d->data = data->data.subset(std::span<const std::size_t>(ids, count));
        *out = d.release();
    });
}

size_t unn_dataset_size(const unn_dataset* data) { return data ? data->data.size() : 0; }
size_t unn_dataset_dim(const unn_dataset* data) { return data ? data->data.dim() : 0; }
int unn_dataset_num_classes(const unn_dataset* data) { return data ? data->data.num_classes() : 0; }

const char* unn_dataset_class_name(const unn_dataset* data, int c) {
    if (!data || c < 0 || c >= data->data.num_classes()) return nullptr;
    return data->data.class_names()[static_cast<std::size_t>(c)].c_str();
}

const double* unn_dataset_row(const unn_dataset* data, size_t i) {
    if (!data || i >= data->data.size()) return nullptr;
    return data->data.row(i).data();
}

int unn_dataset_label(const unn_dataset* data, size_t i) {
    if (!data || i >= data->data.size()) return -1;
    return data->data.label(i);
}

uint64_t unn_dataset_hash(const unn_dataset* data) { return data ? data->data.hash() : 0; }

unn_status unn_dataset_metadata(const unn_dataset* data, char** json) {
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(json);
    return guarded([&] { put_string(json, data->data.metadata().empty() ? "{}" : data->data.metadata()); });
}

void unn_dataset_free(unn_dataset* data) { delete data; }

// ---- graphs ---------------------------------------------------------------

unn_status unn_graph_build(const unn_dataset* data, size_t k, unn_backend backend, unn_graph** out) {
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto g = std::make_unique<unn_graph>();
        g->graph = unn::build_graph(data->data, k, unn::Metric::Euclidean, to_core(backend));
        *out = g.release();
    });
}

unn_status unn_graph_save(const unn_graph* graph, const char* path) {
    UNN_REQUIRE_ARG(graph);
    UNN_REQUIRE_ARG(path);
    return guarded([&] { unn::save_graph(graph->graph, path); });
}

unn_status unn_graph_load(const char* path, const unn_dataset* data, size_t k, unn_graph** out) {
    UNN_REQUIRE_ARG(path);
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto g = std::make_unique<unn_graph>();
        g->graph = unn::load_graph(path, data->data, k, unn::Metric::Euclidean);
        *out = g.release();
    });
}

size_t unn_graph_size(const unn_graph* graph) { return graph ? graph->graph.size() : 0; }
size_t unn_graph_k(const unn_graph* graph) { return graph ? graph->graph.k() : 0; }

unn_status unn_graph_direct(const unn_graph* graph, size_t i, const size_t** ids, size_t* count) {
    UNN_REQUIRE_ARG(graph);
    UNN_REQUIRE_ARG(ids);
    UNN_REQUIRE_ARG(count);
    return guarded([&] {
        unn::require(i < graph->graph.size(), "node index out of range");
        auto row = graph->graph.direct(i);
        *ids = row.data();
        *count = row.size();
    });
}

unn_status unn_graph_reciprocal(const unn_graph* graph, size_t j, const size_t** ids, size_t* count) {
    UNN_REQUIRE_ARG(graph);
    UNN_REQUIRE_ARG(ids);
    UNN_REQUIRE_ARG(count);
    return guarded([&] {
        unn::require(j < graph->graph.size(), "node index out of range");
        auto row = graph->graph.reciprocal(j);
        *ids = row.data();
        *count = row.size();
    });
}

void unn_graph_free(unn_graph* graph) { delete graph; }

// ---- training -------------------------------------------------------------

void unn_train_config_init(unn_train_config* config) {
    if (!config) return;
    unn::TrainConfig d;
    config->loss = UNN_LOSS_EXP;
    config->k = d.k;
    config->iterations = d.iterations;
    config->oracle = UNN_ORACLE_BOOSTING;
    config->smoothing = UNN_SMOOTHING_ON_ZERO;
    config->delta_mode = UNN_DELTA_AUTO;
    config->convergence_tol = d.convergence_tol;
    config->seed = d.seed;
    config->drift_check_every = d.drift_check_every;
}

unn_status unn_train(const unn_dataset* data, const unn_graph* graph, const unn_train_config* config,
                     unn_model** model, unn_diagnostics** diagnostics) {
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(config);
    UNN_REQUIRE_ARG(model);
    return guarded([&] {
        const unn::TrainConfig cfg = to_core(*config);
        std::optional<unn::NeighborGraph> built;
        if (!graph) built = unn::build_graph(data->data, cfg.k);
        const unn::NeighborGraph& g = graph ? graph->graph : *built;
        auto result = unn::train(data->data, g, cfg);
        auto m = std::make_unique<unn_model>();
        m->model = std::move(result.model);
        std::unique_ptr<unn_diagnostics> d;
        if (diagnostics) {
            d = std::make_unique<unn_diagnostics>();
            d->diag = std::move(result.diagnostics);
        }
        *model = m.release();
        if (diagnostics) *diagnostics = d.release();
    });
}

int unn_diagnostics_num_classes(const unn_diagnostics* d) { return d ? d->diag.num_classes : 0; }

size_t unn_diagnostics_iterations(const unn_diagnostics* d, int c) {
    auto* t = trace_of(d, c);
    return t ? t->iterations.size() : 0;
}

double unn_diagnostics_initial_surrogate(const unn_diagnostics* d, int c) {
    auto* t = trace_of(d, c);
    return t ? t->initial_surrogate : std::numeric_limits<double>::quiet_NaN();
}

int unn_diagnostics_stopped_early(const unn_diagnostics* d, int c) {
    auto* t = trace_of(d, c);
    return t && t->stopped_early ? 1 : 0;
}

unn_status unn_diagnostics_record(const unn_diagnostics* d, int c, size_t t, unn_iteration_record* out) {
    UNN_REQUIRE_ARG(d);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto* trace = trace_of(d, c);
        unn::require(trace != nullptr, "class index out of range");
        unn::require(t < trace->iterations.size(), "iteration index out of range");
        const auto& r = trace->iterations[t];
        out->t = r.t;
        out->j = r.j;
        out->delta = r.delta;
        out->surrogate = r.surrogate;
        out->gamma = r.gamma;
        out->eta = r.eta;
        out->bound = r.bound;
        out->bregman_residual = r.bregman_residual;
        out->risk01 = r.risk01;
        out->normalizer = r.normalizer;
        out->smoothed = r.smoothed ? 1 : 0;
        out->wia = r.wia ? 1 : 0;
    });
}

unn_status unn_diagnostics_csv(const unn_diagnostics* d, char** csv) {
    UNN_REQUIRE_ARG(d);
    UNN_REQUIRE_ARG(csv);
    return guarded([&] { put_string(csv, unn::diagnostics_csv(d->diag)); });
}

unn_status unn_diagnostics_save_csv(const unn_diagnostics* d, const char* path) {
    UNN_REQUIRE_ARG(d);
    UNN_REQUIRE_ARG(path);
    return guarded([&] { unn::save_diagnostics_csv(d->diag, path); });
}

unn_status unn_diagnostics_rate_bound(const unn_diagnostics* d, char** json, size_t* violations) {
    UNN_REQUIRE_ARG(d);
    return guarded([&] {
        auto report = unn::check_rate_bound(d->diag);
        if (violations) *violations = report.total_violations;
        put_string(json, unn::to_json(report));
    });
}

void unn_diagnostics_free(unn_diagnostics* d) { delete d; }

// ---- models ---------------------------------------------------------------

unn_status unn_model_save(const unn_model* model, const char* path) {
    UNN_REQUIRE_ARG(model);
    UNN_REQUIRE_ARG(path);
    return guarded([&] { unn::save_model(model->model, path); });
}

unn_status unn_model_load(const char* path, unn_model** out) {
    UNN_REQUIRE_ARG(path);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto m = std::make_unique<unn_model>();
        m->model = unn::load_model(path);
        *out = m.release();
    });
}

unn_status unn_model_serialize(const unn_model* model, char** text) {
    UNN_REQUIRE_ARG(model);
    UNN_REQUIRE_ARG(text);
    return guarded([&] { put_string(text, unn::serialize_model(model->model)); });
}

unn_status unn_model_from_dataset(const unn_dataset* data, size_t k, unn_model** out) {
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto m = std::make_unique<unn_model>();
        m->model = unn::make_model(data->data, k, unn::Metric::Euclidean, unn::LossKind::Exponential);
        *out = m.release();
    });
}

size_t unn_model_size(const unn_model* model) { return model ? model->model.size() : 0; }
size_t unn_model_k(const unn_model* model) { return model ? model->model.k : 0; }
int unn_model_num_classes(const unn_model* model) { return model ? model->model.num_classes() : 0; }

double unn_model_coeff(const unn_model* model, size_t j, int c) {
    if (!model || j >= model->model.size() || c < 0 || c >= model->model.num_classes())
        return std::numeric_limits<double>::quiet_NaN();
    return model->model.coeff(j, c);
}

size_t unn_model_original_id(const unn_model* model, size_t j) {
    if (!model || j >= model->model.size()) return SIZE_MAX;
    return model->model.original_ids[j];
}

int unn_model_per_class(const unn_model* model) { return model && model->model.per_class() ? 1 : 0; }

void unn_model_free(unn_model* model) { delete model; }

void unn_filter_spec_init(unn_filter_spec* spec) {
    if (!spec) return;
    spec->mode = UNN_FILTER_FRACTION;
    spec->alpha_tilde = 0.0;
    spec->theta = 1.0;
    spec->per_class = 0;
    spec->exclude_nonpositive = 0;
}

unn_status unn_model_filter(const unn_model* model, const unn_filter_spec* spec, unn_model** out) {
    UNN_REQUIRE_ARG(model);
    UNN_REQUIRE_ARG(spec);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto m = std::make_unique<unn_model>();
        m->model = unn::filter_model(model->model, to_core(*spec));
        *out = m.release();
    });
}

// ---- prediction -----------------------------------------------------------

unn_status unn_predict(const unn_model* model, const unn_dataset* queries, unn_rule rule, size_t k,
                       unn_backend backend, int with_contributions, unn_predictions** out) {
    UNN_REQUIRE_ARG(model);
    UNN_REQUIRE_ARG(queries);
    UNN_REQUIRE_ARG(out);
    return guarded([&] {
        auto p = std::make_unique<unn_predictions>();
        p->predictions = unn::predict_batch(model->model, queries->data, to_core(rule), k, to_core(backend),
                                            with_contributions != 0);
        p->class_names = model->model.prototypes.class_names();
        *out = p.release();
    });
}

size_t unn_predictions_count(const unn_predictions* p) { return p ? p->predictions.size() : 0; }

int unn_predictions_label(const unn_predictions* p, size_t q) {
    if (!p || q >= p->predictions.size()) return -1;
    return p->predictions[q].label;
}

int unn_predictions_tie(const unn_predictions* p, size_t q) {
    if (!p || q >= p->predictions.size()) return 0;
    return p->predictions[q].tie ? 1 : 0;
}

const double* unn_predictions_scores(const unn_predictions* p, size_t q) {
    if (!p || q >= p->predictions.size()) return nullptr;
    return p->predictions[q].scores.data();
}

unn_status unn_predictions_csv(const unn_predictions* p, char** csv) {
    UNN_REQUIRE_ARG(p);
    UNN_REQUIRE_ARG(csv);
    return guarded([&] { put_string(csv, unn::predictions_csv(p->predictions, p->class_names)); });
}

unn_status unn_predictions_contributions_csv(const unn_predictions* p, char** csv) {
    UNN_REQUIRE_ARG(p);
    UNN_REQUIRE_ARG(csv);
    return guarded([&] { put_string(csv, unn::contributions_csv(p->predictions, p->class_names)); });
}

void unn_predictions_free(unn_predictions* p) { delete p; }

// ---- evaluation -----------------------------------------------------------

unn_status unn_evaluate(const unn_model* model, const unn_dataset* test, unn_rule rule, size_t k,
                        unn_backend backend, unn_eval_summary* summary, char** json, char** text) {
    UNN_REQUIRE_ARG(model);
    UNN_REQUIRE_ARG(test);
    return guarded([&] {
        auto report = unn::evaluate(model->model, test->data, to_core(rule), k, to_core(backend));
        if (summary) {
            summary->map = report.mAP();
            summary->error_rate = report.error_rate;
            summary->empirical_risk = report.empirical_risk;
            summary->surrogate_risk = report.surrogate_risk;
            summary->queries = report.queries;
            summary->ties = report.ties;
        }
        if (json) put_string(json, unn::to_json(report));
        if (text) put_string(text, unn::to_text(report));
    });
}

void unn_cv_config_init(unn_cv_config* config) {
    if (!config) return;
    unn::CvConfig d;
    config->folds = d.folds;
    unn_train_config_init(&config->train);
    unn_filter_spec_init(&config->filter);
    config->filter.mode = UNN_FILTER_THRESHOLD;
    config->filter.alpha_tilde = 0.0;
    config->eval_k = d.eval_k;
    config->seed = d.seed;
    config->baseline_fraction = d.baseline_fraction;
    config->backend = UNN_BACKEND_KDTREE;
}

unn_status unn_cross_validate(const unn_dataset* data, const unn_cv_config* config, unn_cv_summary* summary,
                              char** json, char** text, char** folds_csv) {
    UNN_REQUIRE_ARG(data);
    UNN_REQUIRE_ARG(config);
    return guarded([&] {
        unn::CvConfig cfg;
        cfg.folds = config->folds;
        cfg.train = to_core(config->train);
        cfg.filter = to_core(config->filter);
        cfg.eval_k = config->eval_k;
        cfg.seed = config->seed;
        cfg.baseline_fraction = config->baseline_fraction;
        cfg.backend = to_core(config->backend);
        auto report = unn::cross_validate(data->data, cfg);
        if (summary) {
            summary->map_leveraged = report.mean_map_leveraged;
            summary->map_classic = report.mean_map_classic;
            summary->error_leveraged = report.mean_error_leveraged;
            summary->error_classic = report.mean_error_classic;
            summary->retained_fraction = report.mean_retained_fraction;
        }
        put_string(json, unn::to_json(report));
        put_string(text, unn::to_text(report));
        put_string(folds_csv, unn::cv_folds_csv(report));
    });
}

unn_status unn_margin_stats(const unn_model* model, const unn_dataset* train, double* min_positive, char** json,
                            char** text) {
    UNN_REQUIRE_ARG(model);
    UNN_REQUIRE_ARG(train);
    return guarded([&] {
        auto report = unn::margin_stats(model->model, train->data);
        if (min_positive) *min_positive = report.min_positive;
        put_string(json, unn::to_json(report));
        put_string(text, unn::to_text(report));
    });
}

void unn_repro_config_init(unn_repro_config* config) {
    if (!config) return;
    unn::ReproConfig d;
    config->m_train = d.m_train;
    config->m_test = d.m_test;
    config->seed = d.seed;
    config->k = d.k;
}

unn_status unn_repro_ripley(const unn_repro_config* config, char** surrogate_csv, char** error_csv,
                            char** summary_json) {
    UNN_REQUIRE_ARG(config);
    return guarded([&] {
        unn::ReproConfig cfg;
        cfg.m_train = config->m_train;
        cfg.m_test = config->m_test;
        cfg.seed = config->seed;
        cfg.k = config->k;
        auto result = unn::repro_ripley(cfg);
        put_string(surrogate_csv, result.surrogate_csv);
        put_string(error_csv, result.error_csv);
        put_string(summary_json, result.summary_json);
    });
}

}  // extern "C"
