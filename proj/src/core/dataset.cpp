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

#include "dataset.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rng.hpp"

namespace unn {

ClassVector encode_class_vector(int label, int num_classes) {
    require(num_classes >= 2, "class count must be at least 2, got " + std::to_string(num_classes));
    require(label >= 0 && label < num_classes,
            "label " + std::to_string(label) + " outside [0, " + std::to_string(num_classes) + ")");
    ClassVector v;
    v.true_class = label;
    v.entries.resize(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) v.entries[static_cast<std::size_t>(c)] = class_entry(label, c, num_classes);
    return v;
}

Dataset::Dataset(std::size_t dim, std::vector<std::string> class_names, std::vector<double> features,
                 std::vector<int> labels)
    : dim_(dim), class_names_(std::move(class_names)), features_(std::move(features)), labels_(std::move(labels)) {
    require(dim_ >= 1, "feature dimension must be at least 1");
    require(class_names_.size() >= 2, "a dataset needs at least 2 classes");
    require(!labels_.empty(), "a dataset needs at least one example");
    require(features_.size() == labels_.size() * dim_, "feature buffer does not match m x n");
    for (int l : labels_) require(l >= 0 && l < num_classes(), "label index out of range");
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (!std::isfinite(features_[i]))
            fail(ErrorKind::Domain, "non-finite feature at row " + std::to_string(i / dim_) + ", column " +
                                        std::to_string(i % dim_));
    }
}

Dataset Dataset::subset(std::span<const std::size_t> ids) const {
    std::vector<double> f;
    std::vector<int> l;
    f.reserve(ids.size() * dim_);
    l.reserve(ids.size());
    for (std::size_t id : ids) {
        require(id < size(), "subset id out of range");
        auto r = row(id);
        f.insert(f.end(), r.begin(), r.end());
        l.push_back(labels_[id]);
    }
    Dataset out(dim_, class_names_, std::move(f), std::move(l));
    out.metadata_ = metadata_;
    return out;
}

std::uint64_t Dataset::hash() const {
    Fnv1a h;
    h.value(static_cast<std::uint64_t>(dim_));
    h.value(static_cast<std::uint64_t>(labels_.size()));
    for (const auto& name : class_names_) {
        h.bytes(name.data(), name.size());
        h.value('\0');
    }
    h.bytes(features_.data(), features_.size() * sizeof(double));
    h.bytes(labels_.data(), labels_.size() * sizeof(int));
    return h.digest();
}

bool Dataset::operator==(const Dataset& other) const {
    return dim_ == other.dim_ && class_names_ == other.class_names_ && labels_ == other.labels_ &&
           features_.size() == other.features_.size() &&
           std::equal(features_.begin(), features_.end(), other.features_.begin(),
                      [](double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); });
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(std::string s) {
    auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (line.starts_with(kDatasetMagic)) {
            int version = -1;
            std::istringstream(line.substr(kDatasetMagic.size())) >> version;
            if (version != kDatasetFormatVersion)
                fail(ErrorKind::Version, path + ": dataset format version " + std::to_string(version) +
                                             ", expected " + std::to_string(kDatasetFormatVersion));
            continue;
        }
        if (line.starts_with("#") || trim(line).empty()) continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) fail(ErrorKind::Parse, path + ": missing header row");
    for (auto& h : header) h = trim(h);

    auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) fail(ErrorKind::Parse, path + ": no column named '" + label_column + "'");
    const std::size_t label_idx = static_cast<std::size_t>(label_it - header.begin());
    const std::size_t dim = header.size() - 1;
    if (dim == 0) fail(ErrorKind::Parse, path + ": no feature columns");

    std::vector<double> features;
    std::vector<std::string> raw_labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            fail(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": expected " +
                                       std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
        for (std::size_t col = 0; col < cells.size(); ++col) {
            if (col == label_idx) {
                raw_labels.push_back(trim(cells[col]));
                continue;
            }
            double v = 0.0;
            if (!parse_double(cells[col], v) || !std::isfinite(v))
                fail(ErrorKind::Parse, path + ": row " + std::to_string(line_no) + ", column '" + header[col] +
                                           "': cannot read '" + cells[col] + "' as a finite number");
            features.push_back(v);
        }
    }
    if (raw_labels.empty()) fail(ErrorKind::Parse, path + ": no data rows");

    std::vector<std::string> names(raw_labels);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    if (names.size() < 2) fail(ErrorKind::Domain, path + ": only one class ('" + names.front() + "') present");

    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (const auto& l : raw_labels)
        labels.push_back(static_cast<int>(std::lower_bound(names.begin(), names.end(), l) - names.begin()));

    Dataset out(dim, std::move(names), std::move(features), std::move(labels));
    nlohmann::json meta = {{"source", "csv"}, {"path", path}, {"label_column", label_column}};
    out.set_metadata(meta.dump());
    return out;
}

void save_csv(const Dataset& data, const std::string& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
    out << kDatasetMagic << kDatasetFormatVersion << '\n';
    for (std::size_t d = 0; d < data.dim(); ++d) out << 'x' << d << ',';
    out << csv_escape(label_column) << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.row(i)) out << format_double(v) << ',';
        out << csv_escape(data.class_names()[static_cast<std::size_t>(data.label(i))]) << '\n';
    }
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

Dataset normalize_minmax(const Dataset& data) {
    const std::size_t n = data.dim();
    std::vector<double> lo(n, INFINITY), hi(n, -INFINITY);
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto r = data.row(i);
        for (std::size_t d = 0; d < n; ++d) {
            lo[d] = std::min(lo[d], r[d]);
            hi[d] = std::max(hi[d], r[d]);
        }
    }
    std::vector<double> f(data.features());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t d = 0; d < n; ++d) {
            double span = hi[d] - lo[d];
            double& v = f[i * n + d];
            v = span > 0 ? (v - lo[d]) / span : 0.0;
        }
    }
    Dataset out(n, data.class_names(), std::move(f), data.labels());
    out.set_metadata(data.metadata());
    return out;
}

namespace {

constexpr double kRipleyVariance = 0.03;
constexpr double kRipleyCenters[2][2][2] = {
    {{-0.3, 0.7}, {0.4, 0.7}},  // N
    {{-0.7, 0.3}, {0.3, 0.3}},  // P
};

Dataset ripley_sample(std::size_t m, Rng& rng) {
    std::normal_distribution<double> noise(0.0, std::sqrt(kRipleyVariance));
    std::bernoulli_distribution component(0.5);
    std::vector<double> f;
    std::vector<int> labels;
    f.reserve(2 * m);
    labels.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        int label = static_cast<int>(i % 2);
        const auto& center = kRipleyCenters[label][component(rng) ? 1 : 0];
        double x = center[0] + noise(rng);
        double y = center[1] + noise(rng);
        f.push_back(x);
        f.push_back(y);
        labels.push_back(label);
    }
    return Dataset(2, {"N", "P"}, std::move(f), std::move(labels));
}

}  // namespace

std::pair<Dataset, Dataset> gen_ripley(std::size_t m_train, std::size_t m_test, std::uint64_t seed) {
    require(m_train >= 2 && m_test >= 2, "Ripley sets need at least 2 points each");
    Rng train_rng = make_rng(seed, 0);
    Rng test_rng = make_rng(seed, 1);
    Dataset train = ripley_sample(m_train, train_rng);
    Dataset test = ripley_sample(m_test, test_rng);
    nlohmann::json meta = {{"generator", "ripley"},
                           {"m_train", m_train},
                           {"m_test", m_test},
                           {"seed", seed},
                           {"variance", kRipleyVariance},
                           {"centers",
                            {{"N", {{-0.3, 0.7}, {0.4, 0.7}}}, {"P", {{-0.7, 0.3}, {0.3, 0.3}}}}}};
    meta["split"] = "train";
    train.set_metadata(meta.dump());
    meta["split"] = "test";
    test.set_metadata(meta.dump());
    return {std::move(train), std::move(test)};
}

int ripley_bayes_label(double x, double y) {
    double density[2] = {0.0, 0.0};
    for (int label = 0; label < 2; ++label) {
        for (const auto& c : kRipleyCenters[label]) {
            double dx = x - c[0];
            double dy = y - c[1];
            density[label] += std::exp(-(dx * dx + dy * dy) / (2.0 * kRipleyVariance));
        }
    }
    return density[1] > density[0] ? 1 : 0;
}

std::vector<double> blob_center(int c, std::size_t dim) {
    std::vector<double> center(dim, 0.0);
    const std::size_t uc = static_cast<std::size_t>(c);
    const double sign = (uc / dim) % 2 == 0 ? 1.0 : -1.0;
    center[uc % dim] = sign * (1.0 + static_cast<double>(uc / (2 * dim)));
    return center;
}

Dataset gen_blobs(int num_classes, std::size_t per_class, std::size_t dim, double spread, std::uint64_t seed) {
    require(num_classes >= 2, "blobs need at least 2 classes");
    require(per_class >= 1, "blobs need at least one point per class");
    require(dim >= 1, "blobs need dimension >= 1");
    require(spread > 0 && std::isfinite(spread), "spread must be positive and finite");

    Rng rng = make_rng(seed, 0);
    std::normal_distribution<double> noise(0.0, spread);
    std::vector<double> f;
    std::vector<int> labels;
    f.reserve(static_cast<std::size_t>(num_classes) * per_class * dim);
    for (int c = 0; c < num_classes; ++c) {
        auto center = blob_center(c, dim);
        for (std::size_t p = 0; p < per_class; ++p) {
            for (std::size_t d = 0; d < dim; ++d) f.push_back(center[d] + noise(rng));
            labels.push_back(c);
        }
    }
    const std::size_t width = std::to_string(num_classes - 1).size();
    std::vector<std::string> names;
    for (int c = 0; c < num_classes; ++c) {
        std::string digits = std::to_string(c);
        names.push_back("c" + std::string(width - digits.size(), '0') + digits);
    }
    Dataset out(dim, std::move(names), std::move(f), std::move(labels));
    nlohmann::json meta = {{"generator", "blobs"}, {"classes", num_classes}, {"per_class", per_class},
                           {"dim", dim},          {"spread", spread},       {"seed", seed}};
    out.set_metadata(meta.dump());
    return out;
}

std::vector<Fold> split_kfold(std::size_t m, std::size_t folds, std::uint64_t seed) {
    require(folds >= 2, "need at least 2 folds");
    require(folds <= m, "cannot split " + std::to_string(m) + " examples into " + std::to_string(folds) + " folds");
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = make_rng(seed, 0x6b666f6c64ull);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::vector<std::size_t>> parts(folds);
    for (std::size_t i = 0; i < m; ++i) parts[i % folds].push_back(perm[i]);
    std::vector<Fold> out(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::sort(parts[f].begin(), parts[f].end());
        out[f].test = parts[f];
        for (std::size_t g = 0; g < folds; ++g)
            if (g != f) out[f].train.insert(out[f].train.end(), parts[g].begin(), parts[g].end());
        std::sort(out[f].train.begin(), out[f].train.end());
    }
    return out;
}

}  // namespace unn
