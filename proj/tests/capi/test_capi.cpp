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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <unn/unn.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace {

// Per-process scratch directory, removed at exit.
struct Scratch {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / ("unn-capi-" + std::to_string(::getpid()));
    Scratch() { std::filesystem::create_directories(dir); }
    ~Scratch() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
};

std::string scratch(const std::string& name) {
    static Scratch s;
    return (s.dir / name).string();
}

std::string take(char* s) {
    std::string out = s ? s : "";
    unn_string_free(s);
    return out;
}

struct Ripley {
    unn_dataset* train = nullptr;
    unn_dataset* test = nullptr;
    explicit Ripley(std::uint64_t seed, size_t m = 120, size_t n = 60) {
        REQUIRE(unn_gen_ripley(m, n, seed, &train, &test) == UNN_OK);
    }
    ~Ripley() {
        unn_dataset_free(train);
        unn_dataset_free(test);
    }
};

}  // namespace

TEST_CASE("library metadata") {
    CHECK(unn_abi_version() == UNN_ABI_VERSION);
    CHECK(std::string(unn_version()).size() > 0);
    CHECK(std::string(unn_status_name(UNN_OK)) != std::string(unn_status_name(UNN_ERR_IO)));
    unn_set_threads(2);
    CHECK(unn_get_threads() == 2);
    unn_set_threads(1);
    unn_string_free(nullptr);
}

TEST_CASE("null arguments") {
    unn_dataset* d = nullptr;
    CHECK(unn_dataset_load_csv(nullptr, "label", &d) == UNN_ERR_NULL);
    CHECK(std::string(unn_last_error()).size() > 0);
    CHECK(unn_gen_ripley(10, 10, 1, nullptr, nullptr) == UNN_ERR_NULL);
    CHECK(unn_train(nullptr, nullptr, nullptr, nullptr, nullptr) == UNN_ERR_NULL);
    CHECK(unn_model_filter(nullptr, nullptr, nullptr) == UNN_ERR_NULL);
    CHECK(unn_dataset_size(nullptr) == 0);
    unn_dataset_free(nullptr);
    unn_model_free(nullptr);
    unn_graph_free(nullptr);
    unn_diagnostics_free(nullptr);
    unn_predictions_free(nullptr);

    Ripley r(1, 10, 10);
    CHECK(std::string(unn_last_error()).empty());
}

TEST_CASE("status codes") {
    unn_dataset* d = nullptr;
    CHECK(unn_dataset_load_csv("/nonexistent/x.csv", "label", &d) == UNN_ERR_IO);
    CHECK(d == nullptr);

    const std::string bad = scratch("bad.csv");
    std::ofstream(bad) << "x,label\n1,a\nfoo,b\n";
    CHECK(unn_dataset_load_csv(bad.c_str(), "label", &d) == UNN_ERR_PARSE);

    const std::string old = scratch("old.model");
    std::ofstream(old) << "unn-model 9\n";
    unn_model* m = nullptr;
    CHECK(unn_model_load(old.c_str(), &m) == UNN_ERR_VERSION);
    CHECK(std::string(unn_last_error()).find("version") != std::string::npos);

    const double f[2] = {0.0, 1.0};
    const int labels[2] = {0, 3};
    const char* names[2] = {"a", "b"};
    CHECK(unn_dataset_create(2, 1, f, labels, names, 2, &d) == UNN_ERR_DOMAIN);

    Ripley r(2, 30, 5);
    unn_train_config cfg;
    unn_train_config_init(&cfg);
    cfg.k = 0;
    unn_model* model = nullptr;
    CHECK(unn_train(r.train, nullptr, &cfg, &model, nullptr) == UNN_ERR_DOMAIN);
    CHECK(model == nullptr);
}

TEST_CASE("dataset round trip") {
    const double f[6] = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    const int labels[3] = {1, 0, 1};
    const char* names[2] = {"neg", "pos"};
    unn_dataset* d = nullptr;
    REQUIRE(unn_dataset_create(3, 2, f, labels, names, 2, &d) == UNN_OK);
    CHECK(unn_dataset_size(d) == 3);
    CHECK(unn_dataset_dim(d) == 2);
    CHECK(unn_dataset_num_classes(d) == 2);
    CHECK(std::string(unn_dataset_class_name(d, 1)) == "pos");
    CHECK(unn_dataset_row(d, 2)[1] == 5.0);
    CHECK(unn_dataset_label(d, 0) == 1);

    const std::string path = scratch("round.csv");
    REQUIRE(unn_dataset_save_csv(d, path.c_str()) == UNN_OK);
    unn_dataset* back = nullptr;
    REQUIRE(unn_dataset_load_csv(path.c_str(), "label", &back) == UNN_OK);
    CHECK(unn_dataset_hash(back) == unn_dataset_hash(d));

    const size_t ids[2] = {2, 0};
    unn_dataset* sub = nullptr;
    REQUIRE(unn_dataset_subset(d, ids, 2, &sub) == UNN_OK);
    CHECK(unn_dataset_row(sub, 0)[0] == 4.0);
    unn_dataset* norm = nullptr;
    REQUIRE(unn_dataset_normalize(d, &norm) == UNN_OK);
    CHECK(unn_dataset_row(norm, 2)[0] == 1.0);
    CHECK(take([&] { char* s = nullptr; unn_dataset_metadata(d, &s); return s; }()) == "{}");
    for (auto* x : {d, back, sub, norm}) unn_dataset_free(x);
}

TEST_CASE("graph round trip") {
    Ripley r(3);
    unn_graph* g = nullptr;
    REQUIRE(unn_graph_build(r.train, 5, UNN_BACKEND_KDTREE, &g) == UNN_OK);
    CHECK(unn_graph_size(g) == 120);
    CHECK(unn_graph_k(g) == 5);
    const size_t* ids = nullptr;
    size_t count = 0;
    REQUIRE(unn_graph_direct(g, 7, &ids, &count) == UNN_OK);
    CHECK(count == 5);
    std::size_t total = 0;
    for (size_t j = 0; j < 120; ++j) {
        REQUIRE(unn_graph_reciprocal(g, j, &ids, &count) == UNN_OK);
        total += count;
    }
    CHECK(total == 600);
    CHECK(unn_graph_direct(g, 120, &ids, &count) == UNN_ERR_DOMAIN);

    const std::string path = scratch("g.graph");
    REQUIRE(unn_graph_save(g, path.c_str()) == UNN_OK);
    unn_graph* back = nullptr;
    CHECK(unn_graph_load(path.c_str(), r.train, 5, &back) == UNN_OK);
    unn_graph_free(back);
    CHECK(unn_graph_load(path.c_str(), r.train, 6, &back) == UNN_ERR_VERSION);
    CHECK(unn_graph_load(path.c_str(), r.test, 5, &back) == UNN_ERR_VERSION);
    unn_graph_free(g);
}

TEST_CASE("train, filter, predict, evaluate") {
    Ripley r(4, 250, 200);
    unn_train_config cfg;
    unn_train_config_init(&cfg);
    CHECK(cfg.k == 9);
    CHECK(cfg.iterations == 0);
    unn_model* model = nullptr;
    unn_diagnostics* diag = nullptr;
    REQUIRE(unn_train(r.train, nullptr, &cfg, &model, &diag) == UNN_OK);
    CHECK(unn_model_size(model) == 250);
    CHECK(unn_model_k(model) == 9);
    CHECK(unn_model_num_classes(model) == 2);

    REQUIRE(unn_diagnostics_num_classes(diag) == 2);
    for (int c = 0; c < 2; ++c) {
        double prev = unn_diagnostics_initial_surrogate(diag, c);
        CHECK(prev == doctest::Approx(1.0));
        for (size_t t = 0; t < unn_diagnostics_iterations(diag, c); ++t) {
            unn_iteration_record rec;
            REQUIRE(unn_diagnostics_record(diag, c, t, &rec) == UNN_OK);
            CHECK(rec.surrogate <= prev * (1 + 1e-12));
            prev = rec.surrogate;
        }
    }
    size_t violations = 99;
    CHECK(take([&] { char* s = nullptr; unn_diagnostics_rate_bound(diag, &s, &violations); return s; }()).size() > 0);
    CHECK(violations == 0);
    CHECK(take([&] { char* s = nullptr; unn_diagnostics_csv(diag, &s); return s; }()).rfind("# unn-diagnostics 1", 0) == 0);

    const std::string path = scratch("m.model");
    REQUIRE(unn_model_save(model, path.c_str()) == UNN_OK);
    unn_model* back = nullptr;
    REQUIRE(unn_model_load(path.c_str(), &back) == UNN_OK);
    char* a = nullptr;
    char* b = nullptr;
    unn_model_serialize(model, &a);
    unn_model_serialize(back, &b);
    CHECK(take(a) == take(b));
    unn_model_free(back);

    unn_filter_spec spec;
    unn_filter_spec_init(&spec);
    spec.theta = 0.25;
    unn_model* filtered = nullptr;
    REQUIRE(unn_model_filter(model, &spec, &filtered) == UNN_OK);
    CHECK(unn_model_size(filtered) == 63);
    for (size_t j = 0; j < 63; ++j)
        CHECK(unn_model_coeff(filtered, j, 1) == unn_model_coeff(model, unn_model_original_id(filtered, j), 1));

    unn_predictions* p = nullptr;
    REQUIRE(unn_predict(filtered, r.test, UNN_RULE_LEVERAGED, 0, UNN_BACKEND_KDTREE, 1, &p) == UNN_OK);
    CHECK(unn_predictions_count(p) == 200);
    const double* s = unn_predictions_scores(p, 5);
    CHECK(unn_predictions_label(p, 5) == (s[1] > s[0] ? 1 : 0));
    CHECK(take([&] { char* x = nullptr; unn_predictions_csv(p, &x); return x; }()).rfind("# unn-predictions 1\n", 0) == 0);
    CHECK(take([&] { char* x = nullptr; unn_predictions_contributions_csv(p, &x); return x; }()).size() > 100);
    unn_predictions_free(p);

    unn_eval_summary sum;
    char* json = nullptr;
    REQUIRE(unn_evaluate(filtered, r.test, UNN_RULE_LEVERAGED, 0, UNN_BACKEND_KDTREE, &sum, &json, nullptr) == UNN_OK);
    CHECK(sum.queries == 200);
    CHECK(sum.error_rate >= 0.0);
    CHECK(sum.error_rate < 0.5);
    CHECK(take(json).find("unn-report") != std::string::npos);

    double min_positive = 0.0;
    REQUIRE(unn_margin_stats(model, r.train, &min_positive, nullptr, nullptr) == UNN_OK);
    CHECK(min_positive > 0.0);

    unn_model_free(filtered);
    unn_model_free(model);
    unn_diagnostics_free(diag);
}

TEST_CASE("cross-validation and repro") {
    unn_dataset* blobs = nullptr;
    REQUIRE(unn_gen_blobs(3, 40, 2, 0.01, 5, &blobs) == UNN_OK);
    unn_cv_config cfg;
    unn_cv_config_init(&cfg);
    CHECK(cfg.folds == 3);
    cfg.train.k = 3;
    unn_cv_summary sum;
    char* folds = nullptr;
    REQUIRE(unn_cross_validate(blobs, &cfg, &sum, nullptr, nullptr, &folds) == UNN_OK);
    CHECK(sum.map_leveraged == 1.0);
    CHECK(take(folds).rfind("# unn-cv-folds 1", 0) == 0);
    unn_dataset_free(blobs);

    unn_repro_config rc;
    unn_repro_config_init(&rc);
    rc.m_train = 60;
    rc.m_test = 60;
    char *sur = nullptr, *err = nullptr, *summary = nullptr;
    REQUIRE(unn_repro_ripley(&rc, &sur, &err, &summary) == UNN_OK);
    CHECK(take(sur).rfind("# unn-repro-surrogate 1", 0) == 0);
    CHECK(take(err).rfind("# unn-repro-error 1", 0) == 0);
    CHECK(take(summary).size() > 2);
}

TEST_CASE("warning handler") {
    std::vector<std::string> seen;
    unn_set_warning_handler([](const char* msg, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(msg); },
                            &seen);
    const double f[6] = {0, 1, 2, 3, 4, 5};
    const int labels[6] = {0, 1, 0, 1, 0, 1};
    const char* names[2] = {"a", "b"};
    unn_dataset* d = nullptr;
    REQUIRE(unn_dataset_create(6, 1, f, labels, names, 2, &d) == UNN_OK);
    unn_graph* g = nullptr;
    // k larger than m - 1 is clamped with a warning.
    REQUIRE(unn_graph_build(d, 50, UNN_BACKEND_EXHAUSTIVE, &g) == UNN_OK);
    CHECK(unn_graph_k(g) == 5);
    CHECK(seen.size() == 1);
    unn_graph_free(g);
    unn_dataset_free(d);
    unn_set_warning_handler(nullptr, nullptr);
}
