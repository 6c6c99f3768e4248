#pragma once

#include "rdmono/design.hpp"
#include "rdmono/estimator.hpp"
#include "rdmono/modulus.hpp"

#include <span>
#include <utility>
#include <vector>

namespace rdmono {

/// Every quantity of the minimax affine estimator at one value of delta.
struct MinimaxPoint {
    double delta = 0.0;
    ModulusSolution modulus;
    double h_t = 0.0, h_c = 0.0;
    double nw_t = 0.0, nw_c = 0.0;
    double a_t = 0.0, a_c = 0.0;
    double estimate = 0.0;
    double sd = 0.0;          // from the sd variances (reported)
    double sd_formula = 0.0;  // (delta / omega_t) / sum_t K / sigma^2
    double worst_bias = 0.0;  // sup bias over F(C) from the weights
    double worst_bias_formula = 0.0;  // (C (h_t + h_c) - delta * sd_formula) / 2
    double chi = 0.0;         // cv(worst_bias / sd) * sd
    double chi_design = 0.0;  // same with sd_formula; the delta objective
    SideFit fit_t, fit_c;
};

MinimaxPoint minimax_at(const Sides& sides, double C, double delta, double alpha);

struct MinimaxCI {
    MinimaxPoint at;
    double alpha = 0.05;
    double C = 1.0;
    double lower = 0.0, upper = 0.0;
    double half_length = 0.0;
    bool local_min_verified = false;
    std::vector<std::pair<double, double>> profile;  // scanned (delta, chi_design)
};

MinimaxCI minimax_ci(const Sides& sides, double C, double alpha);

/// Worst-case bias bounds of an arbitrary pair of NW fits over F(C) with
/// centering (a_t, a_c): returns (sup, inf) of E[estimate] - L_RD f.
std::pair<double, double> bias_bounds(const Sides& sides, const SideFit& ft, const SideFit& fc, double C,
                                      double a_t, double a_c);

struct GainRow {
    double C = 0.0;
    double chi_mono = 0.0;
    double chi_none = 0.0;
    double ratio = 0.0;
    double delta = 0.0;
    double bw_ratio_t = 0.0;  // 2 omega_t(delta; V) / omega_t(delta; empty)
    double bw_ratio_c = 0.0;
};

/// Length ratio of the minimax CI without and with the monotone restriction.
std::vector<GainRow> gain_curve(const Dataset& data, const FunctionSpace& space, std::span<const double> sigma2,
                                const std::vector<double>& C_grid, double alpha);

} // namespace rdmono
