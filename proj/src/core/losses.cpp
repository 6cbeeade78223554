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

#include "losses.hpp"

#include <algorithm>
#include <cmath>

#include "common.hpp"

namespace unn {

namespace {
constexpr double kMaxWeight = 1e300;
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Exponential: return "exp";
        case LossKind::Squared: return "squared";
        case LossKind::Logistic: return "logistic";
    }
    return "?";
}

LossKind parse_loss(const std::string& s) {
    if (s == "exp" || s == "exponential") return LossKind::Exponential;
    if (s == "squared" || s == "sqf") return LossKind::Squared;
    if (s == "logistic" || s == "log") return LossKind::Logistic;
    fail(ErrorKind::Domain, "unknown loss '" + s + "' (expected exp, squared or logistic)");
}

double loss_value(LossKind kind, double x) {
    switch (kind) {
        case LossKind::Exponential: return std::exp(-x);
        case LossKind::Squared: return (1.0 - x) * (1.0 - x);
        case LossKind::Logistic: return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
    }
    return 0.0;
}

double weight_from_edge(LossKind kind, double x) {
    switch (kind) {
        case LossKind::Exponential: return std::min(std::exp(-x), kMaxWeight);
        case LossKind::Squared: return 2.0 * (1.0 - x);
        case LossKind::Logistic: {
            if (x >= 0) {
                double e = std::exp(-x);
                return e / (1.0 + e);
            }
            return 1.0 / (1.0 + std::exp(x));
        }
    }
    return 0.0;
}

double update_weight(LossKind kind, double w, double delta, double r) {
    switch (kind) {
        case LossKind::Exponential: return std::min(w * std::exp(-delta * r), kMaxWeight);
        case LossKind::Squared: return w - 2.0 * delta * r;
        case LossKind::Logistic: {
            if (!(w > 0.0 && w < 1.0)) fail(ErrorKind::Domain, "logistic weight must lie in (0, 1)");
            double b = std::exp(-delta * r);
            if (b > 1.0) return w / ((1.0 - w) / b + w);
            return w * b / ((1.0 - w) + w * b);
        }
    }
    return w;
}

DeltaSolution solve_delta_closed(LossKind kind, double w_plus, double w_minus, double r_norm1) {
    require(w_plus >= 0.0 || kind == LossKind::Squared, "w+ must be non-negative");
    require(w_minus >= 0.0 || kind == LossKind::Squared, "w- must be non-negative");
    DeltaSolution out;
    out.method = DeltaMethod::ClosedForm;
    if (kind == LossKind::Squared) {
        if (!(r_norm1 > 0.0)) fail(ErrorKind::Domain, "squared-loss step needs a column with non-zero L1 norm");
        out.delta = (w_plus - w_minus) / (2.0 * r_norm1);
        return out;
    }
    if (w_plus == 0.0 && w_minus == 0.0) fail(ErrorKind::Domain, "no reciprocal coverage: w+ = w- = 0");
    if (w_plus == 0.0 || w_minus == 0.0)
        fail(ErrorKind::Divergence, "unsmoothed step with a zero partial sum is unbounded");
    // log a - log b rather than log(a / b) keeps the step exactly antisymmetric.
    double ratio = std::log(w_plus) - std::log(w_minus);
    out.delta = kind == LossKind::Exponential ? 0.5 * ratio : ratio;
    return out;
}

namespace {

double stationarity(LossKind kind, std::span<const EdgeTerm> edges, double delta) {
    double g = 0.0;
    for (const auto& e : edges) {
        if (e.r != 0.0) g += e.r * weight_from_edge(kind, e.rho + delta * e.r);
    }
    return g;
}

}  // namespace

DeltaSolution solve_delta_exact(LossKind kind, std::span<const EdgeTerm> edges) {
    bool any = std::any_of(edges.begin(), edges.end(), [](const EdgeTerm& e) { return e.r != 0.0; });
    require(any, "exact step needs at least one non-zero edge");

    // g is non-increasing in delta.
    auto g = [&](double d) { return stationarity(kind, edges, d); };
    double lo = -1.0, hi = 1.0;
    double g_lo = g(lo), g_hi = g(hi);
    while (g_hi > 0.0) {
        if (hi >= kDeltaBracketLimit) fail(ErrorKind::Divergence, "exact step diverges towards +infinity");
        lo = hi;
        g_lo = g_hi;
        hi = std::min(2.0 * hi, kDeltaBracketLimit);
        g_hi = g(hi);
    }
    while (g_lo < 0.0) {
        if (lo <= -kDeltaBracketLimit) fail(ErrorKind::Divergence, "exact step diverges towards -infinity");
        hi = lo;
        g_hi = g_lo;
        lo = std::max(2.0 * lo, -kDeltaBracketLimit);
        g_lo = g(lo);
    }

    for (int it = 0; it < 400; ++it) {
        if (g_lo == 0.0) {
            hi = lo;
            g_hi = g_lo;
            break;
        }
        if (g_hi == 0.0) {
            lo = hi;
            g_lo = g_hi;
            break;
        }
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double g_mid = g(mid);
        if (g_mid > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    DeltaSolution out;
    out.method = DeltaMethod::RootFind;
    if (std::abs(g_lo) <= std::abs(g_hi)) {
        out.delta = lo;
        out.residual = g_lo;
    } else {
        out.delta = hi;
        out.residual = g_hi;
    }
    return out;
}

double smoothing_edge(LossKind kind, std::size_t m) {
    require(m >= 2, "smoothing needs m >= 2");
    const double md = static_cast<double>(m);
    switch (kind) {
        case LossKind::Exponential: return std::log(md);
        case LossKind::Squared: return 1.0 - 1.0 / (2.0 * md);
        case LossKind::Logistic: return std::log(md - 1.0);
    }
    return 0.0;
}

std::pair<double, double> smooth(double w_plus, double w_minus, std::size_t m) {
    require(m >= 1, "smoothing needs m >= 1");
    const double eps = 1.0 / static_cast<double>(m);
    return {w_plus + eps, w_minus + eps};
}

}  // namespace unn
