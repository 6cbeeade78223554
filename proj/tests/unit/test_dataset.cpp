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
#include <set>

#include "classify.hpp"
#include "dataset.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace unn;

TEST_CASE("class vectors are symmetric") {
    auto v = encode_class_vector(0, 2);
    CHECK(v.entries == std::vector<double>{1.0, -1.0});

    v = encode_class_vector(1, 4);
    CHECK(v.entries[1] == 1.0);
    for (int c : {0, 2, 3}) CHECK(v.entries[static_cast<std::size_t>(c)] == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));

    v = encode_class_vector(2, 8);
    for (int c = 0; c < 8; ++c)
        CHECK(v.entries[static_cast<std::size_t>(c)] ==
              doctest::Approx(oracle::class_entry(2, c, 8)).epsilon(1e-15));
}

TEST_CASE("class vectors sum to zero and are injective") {
    for (int C = 2; C <= 12; ++C) {
        std::set<std::vector<double>> seen;
        for (int label = 0; label < C; ++label) {
            auto v = encode_class_vector(label, C);
            CHECK(v.entries.size() == static_cast<std::size_t>(C));
            CHECK(std::abs(std::accumulate(v.entries.begin(), v.entries.end(), 0.0)) <= 1e-12);
            for (int c = 0; c < C; ++c) CHECK(class_entry(label, c, C) == v.entries[static_cast<std::size_t>(c)]);
            seen.insert(v.entries);
        }
        CHECK(seen.size() == static_cast<std::size_t>(C));
    }
}

TEST_CASE("dataset construction validates its input") {
    CHECK_THROWS_AS(Dataset(2, {"a", "b"}, {0.0, NAN}, {0}), Error);
    CHECK_THROWS_AS(Dataset(1, {"a", "b"}, {0.0}, {2}), Error);
    CHECK_THROWS_AS(Dataset(2, {"a", "b"}, {0.0}, {0}), Error);
    CHECK_THROWS_AS(Dataset(1, {"a"}, {0.0}, {0}), Error);
}

TEST_CASE("csv ingestion") {
    fixture::TempDir dir;

    SUBCASE("small file") {
        fixture::write_text(dir.file("a.csv"), "x,y,label\n0,1,a\n2,3,b\n4,5,a\n");
        Dataset d = load_csv(dir.file("a.csv"));
        CHECK(d.size() == 3);
        CHECK(d.num_classes() == 2);
        CHECK(d.dim() == 2);
        CHECK(d.class_names() == std::vector<std::string>{"a", "b"});
        CHECK(d.labels() == std::vector<int>{0, 1, 0});
        CHECK(d.row(2)[1] == 5.0);
    }
    SUBCASE("classes are ordered lexicographically") {
        fixture::write_text(dir.file("b.csv"), "label,x\nzeta,1\nalpha,2\nmid,3\n");
        Dataset d = load_csv(dir.file("b.csv"));
        CHECK(d.class_names() == std::vector<std::string>{"alpha", "mid", "zeta"});
        CHECK(d.labels() == std::vector<int>{2, 0, 1});
    }
    SUBCASE("a NaN cell is a parse error naming the cell") {
        fixture::write_text(dir.file("nan.csv"), "x,y,label\n0,1,a\n2,nan,b\n");
        try {
            load_csv(dir.file("nan.csv"));
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Parse);
            CHECK(std::string(e.what()).find("'y'") != std::string::npos);
            CHECK(std::string(e.what()).find("row 3") != std::string::npos);
        }
    }
    SUBCASE("ragged row") {
        fixture::write_text(dir.file("r.csv"), "x,label\n0,a\n1\n");
        CHECK_THROWS_AS(load_csv(dir.file("r.csv")), Error);
    }
    SUBCASE("missing label column") {
        fixture::write_text(dir.file("m.csv"), "x,y\n0,1\n");
        CHECK_THROWS_AS(load_csv(dir.file("m.csv")), Error);
    }
    SUBCASE("missing file is an i/o error") {
        try {
            load_csv(dir.file("absent.csv"));
            FAIL("expected an i/o error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Io);
        }
    }
    SUBCASE("wide descriptor file") {
        std::string text;
        for (int d = 0; d < 512; ++d) text += "g" + std::to_string(d) + ",";
        text += "label\n";
        for (int r = 0; r < 16; ++r) {
            for (int d = 0; d < 512; ++d) text += std::to_string((r * 31 + d) % 97 / 97.0) + ",";
            text += "cat" + std::to_string(r % 8) + "\n";
        }
        fixture::write_text(dir.file("gist.csv"), text);
        Dataset d = load_csv(dir.file("gist.csv"));
        CHECK(d.dim() == 512);
        CHECK(d.num_classes() == 8);
        CHECK(d.size() == 16);
    }
    SUBCASE("round trip is exact and versioned") {
        auto [train, test] = gen_ripley(50, 10, 3);
        save_csv(train, dir.file("rt.csv"));
        CHECK(fixture::read_text(dir.file("rt.csv")).rfind("# unn-dataset 1\n", 0) == 0);
        Dataset back = load_csv(dir.file("rt.csv"));
        CHECK(back == train);

        std::string text = fixture::read_text(dir.file("rt.csv"));
        text.replace(0, std::string("# unn-dataset 1").size(), "# unn-dataset 7");
        fixture::write_text(dir.file("v7.csv"), text);
        try {
            load_csv(dir.file("v7.csv"));
            FAIL("expected a version error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Version);
            CHECK(std::string(e.what()).find("7") != std::string::npos);
        }
    }
}

TEST_CASE("min-max normalisation") {
    Dataset d(2, {"a", "b"}, {1.0, 5.0, 3.0, 5.0, 2.0, 5.0}, {0, 1, 0});
    Dataset n = normalize_minmax(d);
    CHECK(n.features() == std::vector<double>{0.0, 0.0, 1.0, 0.0, 0.5, 0.0});
    CHECK(n.labels() == d.labels());
}

TEST_CASE("ripley generator") {
    auto [train, test] = gen_ripley(250, 1000, 1);
    CHECK(train.size() == 250);
    CHECK(test.size() == 1000);
    CHECK(train.dim() == 2);
    CHECK(train.class_names() == std::vector<std::string>{"N", "P"});
    CHECK(std::count(test.labels().begin(), test.labels().end(), 1) == 500);

    auto [train2, test2] = gen_ripley(250, 1000, 1);
    CHECK(train2 == train);
    CHECK(test2 == test);
    CHECK(train2.hash() == train.hash());
    auto [train3, test3] = gen_ripley(250, 1000, 2);
    CHECK_FALSE(train3 == train);
    CHECK(train.metadata().find("0.03") != std::string::npos);
}

namespace {

double ripley_density(double x, double y, const double (*centres)[2]) {
    const double v = 0.03;
    double s = 0.0;
    for (int t = 0; t < 2; ++t) {
        double dx = x - centres[t][0], dy = y - centres[t][1];
        s += 0.5 * std::exp(-(dx * dx + dy * dy) / (2 * v)) / (2 * M_PI * v);
    }
    return s;
}

}  // namespace

TEST_CASE("ripley bayes error") {
    const double P[2][2] = {{-0.7, 0.3}, {0.3, 0.3}};
    const double N[2][2] = {{-0.3, 0.7}, {0.4, 0.7}};
    // Midpoint quadrature of the overlap of the two class densities.
    const double h = 0.004;
    double overlap = 0.0;
    for (double x = -2.5 + h / 2; x < 2.0; x += h)
        for (double y = -1.5 + h / 2; y < 2.5; y += h)
            overlap += std::min(0.5 * ripley_density(x, y, P), 0.5 * ripley_density(x, y, N));
    overlap *= h * h;
    CHECK(overlap == doctest::Approx(0.08933).epsilon(0.002));
    CHECK(std::abs(overlap - 0.08) <= 0.01);

    // The library's Bayes rule agrees with the density comparison.
    for (double x = -1.2; x <= 1.0; x += 0.05)
        for (double y = -0.3; y <= 1.2; y += 0.05)
            if (std::abs(ripley_density(x, y, P) - ripley_density(x, y, N)) > 1e-9)
                CHECK(ripley_bayes_label(x, y) == (ripley_density(x, y, P) > ripley_density(x, y, N) ? 1 : 0));

    // Monte Carlo on 10^5 generated points.
    auto [unused, sample] = gen_ripley(2, 100000, 11);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < sample.size(); ++i)
        errors += ripley_bayes_label(sample.row(i)[0], sample.row(i)[1]) != sample.label(i);
    // The population rate sits near the top of the 8% +/- 1% band, so a
    // single sample is compared with the quadrature instead of the band.
    const double rate = static_cast<double>(errors) / static_cast<double>(sample.size());
    CHECK(std::abs(rate - overlap) <= 4 * std::sqrt(overlap * (1 - overlap) / 1e5));
}

TEST_CASE("blob generator") {
    SUBCASE("size contract") {
        Dataset d = gen_blobs(8, 100, 16, 0.4, 2);
        CHECK(d.size() == 800);
        CHECK(d.num_classes() == 8);
        CHECK(d.dim() == 16);
        CHECK(gen_blobs(8, 100, 16, 0.4, 2) == d);
    }
    SUBCASE("well separated blobs are fitted exactly by 1-NN") {
        Dataset d = gen_blobs(2, 10, 2, 0.01, 5);
        for (std::size_t i = 0; i < d.size(); ++i) {
            auto nn = oracle::knn(d, d.row(i).data(), 1, i);
            CHECK(d.label(nn[0]) == d.label(i));
        }
    }
    SUBCASE("centres are at least sqrt 2 apart") {
        for (std::size_t n : {2u, 5u, 16u})
            for (int a = 0; a < static_cast<int>(2 * n); ++a)
                for (int b = a + 1; b < static_cast<int>(2 * n); ++b) {
                    auto ca = blob_center(a, n), cb = blob_center(b, n);
                    double d2 = 0.0;
                    for (std::size_t t = 0; t < n; ++t) d2 += (ca[t] - cb[t]) * (ca[t] - cb[t]);
                    CHECK(d2 >= 2.0 - 1e-12);
                }
    }
    SUBCASE("huge spread drives k-NN to chance") {
        const int C = 4;
        double correct = 0.0, total = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            Dataset train = gen_blobs(C, 50, 2, 1e4, 100 + s);
            Dataset test = gen_blobs(C, 50, 2, 1e4, 500 + s);
            for (std::size_t q = 0; q < test.size(); ++q) {
                auto p = score_classic(test.row(q), train, 5);
                correct += p.label == test.label(q);
                total += 1;
            }
        }
        CHECK(std::abs(correct / total - 1.0 / C) <= 0.03);
    }
}

TEST_CASE("k-fold splits") {
    auto sizes = [](const std::vector<Fold>& folds) {
        std::vector<std::size_t> out;
        for (const auto& f : folds) out.push_back(f.test.size());
        return out;
    };
    CHECK(sizes(split_kfold(2688, 3, 0)) == std::vector<std::size_t>{896, 896, 896});
    CHECK(sizes(split_kfold(6, 3, 1)) == std::vector<std::size_t>{2, 2, 2});
    auto s7 = sizes(split_kfold(7, 3, 1));
    std::sort(s7.begin(), s7.end());
    CHECK(s7 == std::vector<std::size_t>{2, 2, 3});
    CHECK_THROWS_AS(split_kfold(2, 3, 0), Error);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t m = 5 + seed * 7, k = 2 + seed % 5;
        auto folds = split_kfold(m, k, seed);
        std::vector<int> hits(m, 0);
        for (const auto& f : folds) {
            for (auto i : f.test) ++hits[i];
            std::vector<std::size_t> all(f.train);
            all.insert(all.end(), f.test.begin(), f.test.end());
            std::sort(all.begin(), all.end());
            std::vector<std::size_t> expect(m);
            std::iota(expect.begin(), expect.end(), 0);
            CHECK(all == expect);
        }
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
        CHECK(split_kfold(m, k, seed)[0].test == folds[0].test);
    }
}
