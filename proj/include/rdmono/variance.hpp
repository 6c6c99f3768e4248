#pragma once

#include "rdmono/design.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdmono {

/// 1.06 min(sd, IQR / 1.349) n^(-1/5). The IQR uses linear interpolation
/// between order statistics; when it is zero the sd alone is used.
double silverman_bandwidth(std::span<const double> x);

struct VarianceEstimate {
    double stage1_treated = 0.0;
    double stage1_control = 0.0;
    std::vector<double> stage1_sigma2;  // per observation, the constant of its side
    std::vector<double> stage2_sigma2;
    std::size_t J_nn = 3;
    std::vector<double> bandwidth_treated, bandwidth_control;  // per coordinate
    std::vector<std::string> warnings;
};

/// Per-side constant variance: mean squared residual of a local-constant fit
/// with a triangular product kernel and Silverman bandwidths per coordinate.
/// Returns (treated, control) and fills the bandwidths and warnings of `out`.
void stage1_variance(const Dataset& data, VarianceEstimate& out);

/// (J / (J + 1)) (y_i - mean of its J nearest same-arm neighbours)^2, with
/// Euclidean distance and ties broken by ascending index.
std::vector<double> nn_variance(const Dataset& data, std::size_t J = 3);

VarianceEstimate estimate_variance(const Dataset& data, std::size_t J_nn = 3);

enum class VarianceMode { Known, Estimate };

struct VariancePlan {
    std::vector<double> sigma2;     // weights and bandwidths
    std::vector<double> sd_sigma2;  // reported sd
    std::optional<VarianceEstimate> estimate;
};

/// Known: both vectors come from the sigma column. Estimate: stage 1 feeds
/// the weights, nearest neighbours feed the sd.
VariancePlan plan_variance(const Dataset& data, VarianceMode mode, std::size_t J_nn = 3);

} // namespace rdmono
