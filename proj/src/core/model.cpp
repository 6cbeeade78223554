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

#include "model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace unn {

bool LeveragedModel::operator==(const LeveragedModel& o) const {
    if (alpha.size() != o.alpha.size()) return false;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (std::bit_cast<std::uint64_t>(alpha[i]) != std::bit_cast<std::uint64_t>(o.alpha[i])) return false;
    return prototypes == o.prototypes && k == o.k && metric == o.metric && loss == o.loss &&
           original_ids == o.original_ids && class_pools == o.class_pools;
}

LeveragedModel make_model(Dataset prototypes, std::size_t k, Metric metric, LossKind loss) {
    require(k >= 1, "k must be at least 1");
    LeveragedModel model;
    model.alpha.assign(prototypes.size() * static_cast<std::size_t>(prototypes.num_classes()), 0.0);
    model.original_ids.resize(prototypes.size());
    std::iota(model.original_ids.begin(), model.original_ids.end(), 0);
    model.prototypes = std::move(prototypes);
    model.k = k;
    model.metric = metric;
    model.loss = loss;
    return model;
}

namespace {
constexpr const char* kModelMagic = "unn-model";
}

std::string serialize_model(const LeveragedModel& model) {
    std::ostringstream out;
    const auto& p = model.prototypes;
    out << kModelMagic << ' ' << kModelFormatVersion << '\n';
    out << "k " << model.k << '\n';
    out << "classes " << p.num_classes() << '\n';
    out << "dim " << p.dim() << '\n';
    out << "prototypes " << p.size() << '\n';
    out << "metric " << to_string(model.metric) << '\n';
    out << "loss " << to_string(model.loss) << '\n';
    for (const auto& name : p.class_names()) out << "class " << name << '\n';
    out << "pools " << (model.per_class() ? "per-class" : "shared") << '\n';
    for (std::size_t j = 0; j < p.size(); ++j) {
        out << "proto " << model.original_ids[j] << ' ' << p.label(j);
        for (double v : p.row(j)) out << ' ' << format_double(v);
        out << " |";
        for (int c = 0; c < p.num_classes(); ++c) out << ' ' << format_double(model.coeff(j, c));
        out << '\n';
    }
    if (model.per_class()) {
        for (std::size_t c = 0; c < model.class_pools.size(); ++c) {
            out << "pool " << c << ' ' << model.class_pools[c].size();
            for (std::size_t id : model.class_pools[c]) out << ' ' << id;
            out << '\n';
        }
    }
    out << "end\n";
    return out.str();
}

namespace {

class LineReader {
public:
    LineReader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

    std::string next() {
        std::string line;
        if (!std::getline(in_, line)) error("unexpected end of file");
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    // Reads "<key> <value>" and returns value.
    std::string field(const std::string& key) {
        std::string line = next();
        if (!line.starts_with(key + " ")) error("expected '" + key + "'");
        return line.substr(key.size() + 1);
    }

    std::size_t size_field(const std::string& key) {
        std::string v = field(key);
        try {
            std::size_t pos = 0;
            unsigned long long n = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return static_cast<std::size_t>(n);
        } catch (const std::exception&) {
            error("bad integer for '" + key + "'");
        }
    }

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorKind::Parse, origin_ + ":" + std::to_string(line_no_) + ": " + what);
    }

private:
    std::istream& in_;
    std::string origin_;
    std::size_t line_no_ = 0;
};

}  // namespace

LeveragedModel deserialize_model(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    LineReader reader(in, origin);

    std::istringstream head(reader.next());
    std::string magic;
    int version = -1;
    head >> magic >> version;
    if (magic != kModelMagic) reader.error("not a model file");
    if (version != kModelFormatVersion)
        fail(ErrorKind::Version, origin + ": model format version " + std::to_string(version) + ", expected " +
                                     std::to_string(kModelFormatVersion));

    LeveragedModel model;
    model.k = reader.size_field("k");
    const std::size_t num_classes = reader.size_field("classes");
    const std::size_t dim = reader.size_field("dim");
    const std::size_t count = reader.size_field("prototypes");
    model.metric = parse_metric(reader.field("metric"));
    model.loss = parse_loss(reader.field("loss"));
    std::vector<std::string> names;
    for (std::size_t c = 0; c < num_classes; ++c) names.push_back(reader.field("class"));
    const std::string pools = reader.field("pools");
    if (pools != "shared" && pools != "per-class") reader.error("unknown pool mode '" + pools + "'");

    std::vector<double> features;
    std::vector<int> labels;
    features.reserve(count * dim);
    model.alpha.reserve(count * num_classes);
    for (std::size_t j = 0; j < count; ++j) {
        std::istringstream row(reader.field("proto"));
        std::size_t id = 0;
        int label = -1;
        if (!(row >> id >> label)) reader.error("bad prototype header");
        model.original_ids.push_back(id);
        labels.push_back(label);
        std::string tok;
        for (std::size_t d = 0; d < dim; ++d) {
            double v = 0;
            if (!(row >> tok) || !parse_double(tok, v)) reader.error("bad feature value");
            features.push_back(v);
        }
        if (!(row >> tok) || tok != "|") reader.error("expected '|' before coefficients");
        for (std::size_t c = 0; c < num_classes; ++c) {
            double v = 0;
            if (!(row >> tok) || !parse_double(tok, v) || !std::isfinite(v)) reader.error("bad coefficient");
            model.alpha.push_back(v);
        }
    }
    if (pools == "per-class") {
        model.class_pools.resize(num_classes);
        for (std::size_t c = 0; c < num_classes; ++c) {
            std::istringstream row(reader.field("pool"));
            std::size_t cc = 0, n = 0;
            if (!(row >> cc >> n) || cc != c) reader.error("bad pool header");
            model.class_pools[c].resize(n);
            for (auto& id : model.class_pools[c]) {
                if (!(row >> id) || id >= count) reader.error("bad pool entry");
            }
        }
    }
    if (reader.next() != "end") reader.error("expected 'end'");
    model.prototypes = Dataset(dim, std::move(names), std::move(features), std::move(labels));
    return model;
}

void save_model(const LeveragedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
    out << serialize_model(model);
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

LeveragedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str(), path);
}

}  // namespace unn
