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

#include <span>
#include <string>
#include <utility>

namespace unn {

// Surrogate losses psi(x) of the edge x. All three are convex with psi(0) > 0
// and psi'(0) < 0.
enum class LossKind { Exponential, Squared, Logistic };

std::string to_string(LossKind kind);   // "exp" | "squared" | "logistic"
LossKind parse_loss(const std::string& s);

double loss_value(LossKind kind, double edge);

// Example weights are kept unnormalised as w = -psi'(edge): exp(-x) for the
// exponential loss, 2(1 - x) for the squared loss and the logistic sigmoid
// exp(-x) / (1 + exp(-x)) for the logistic loss.
double weight_from_edge(LossKind kind, double edge);

// Shifts a weight from edge rho to rho + delta * r without knowing rho.
//
// The logistic row uses w e^{-dr} / (1 - w (1 - e^{-dr})). The commonly printed
// form with (1 + e^{-dr}) in the denominator does not satisfy the shift law.
double update_weight(LossKind kind, double weight, double delta, double r);

enum class DeltaMethod { ClosedForm, RootFind };

struct DeltaSolution {
    double delta = 0.0;
    DeltaMethod method = DeltaMethod::ClosedForm;
    double residual = 0.0;  // stationarity residual; 0 for closed forms
};

// Closed-form leveraging step from the partial weight sums of the reciprocal
// neighbours that agree (w_plus) and disagree (w_minus) with j, and the L1
// norm of column j (squared loss only).
DeltaSolution solve_delta_closed(LossKind kind, double w_plus, double w_minus, double r_norm1 = 0.0);

// One term of the stationarity condition sum_i r_i * w(rho_i + delta r_i) = 0.
struct EdgeTerm {
    double r;
    double rho;
};

inline constexpr double kDeltaBracketLimit = 50.0;
inline constexpr double kDeltaResidualTol = 1e-12;

// Exact minimiser of delta -> sum_i psi(rho_i + delta r_i) by bisection on the
// monotone stationarity function. Throws ErrorKind::Divergence if no root is
// bracketed within |delta| <= 50.
DeltaSolution solve_delta_exact(LossKind kind, std::span<const EdgeTerm> edges);

// Edge value at which a virtual example carries weight 1/m. Smoothing adds two
// such examples with r = +1 and r = -1; for the two-class exponential step this
// is the same as adding 1/m to both partial sums.
double smoothing_edge(LossKind kind, std::size_t m);

std::pair<double, double> smooth(double w_plus, double w_minus, std::size_t m);

}  // namespace unn
