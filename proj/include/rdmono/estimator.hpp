#pragma once

#include "rdmono/design.hpp"

#include <span>
#include <string>
#include <vector>

namespace rdmono {

/// h_plus divides the V+ part, h_minus the V- part. Either may be 0 (the
/// part must vanish for positive weight) or +inf (the part is ignored).
struct Bandwidth {
    double plus = 1.0;
    double minus = 1.0;

    static Bandwidth scalar(double h) { return {h, h}; }
    /// (omega / c_plus, omega / c_minus), the map from a modulus value to
    /// bandwidths. Yields a kernel equal to [omega - cost]_+ / omega.
    static Bandwidth from_omega(double omega, double c_plus, double c_minus);
};

double kernel(const PartNorms& p, const Bandwidth& h);
double kernel(std::span<const double> z, const Bandwidth& h, const MonotoneSet& V, const NormSpec& norm);

/// Variance-weighted Nadaraya-Watson fit at the origin for one arm.
struct SideFit {
    std::vector<double> kernel;   // K(x_i, h)
    std::vector<double> weights;  // (K_i / sigma_i^2) / kernel_sum, sums to 1
    double kernel_sum = 0.0;      // sum K_i / sigma_i^2
    double value = 0.0;
};

SideFit nw_point(const Side& side, const Bandwidth& h, const std::string& label = "side");

/// Weighted sum of c_plus*||x+|| + c_minus*||x-|| over positive-weight points.
double weighted_cost(const Side& side, const SideFit& fit, double c_plus, double c_minus);

/// (1/2) sum w_i (c1*||x+|| - c2*||x-||).
double centering_a(const Side& side, const SideFit& fit, double c1, double c2);

/// (delta / omega_t) / sum_t K / sigma^2.
double sd_s(double delta, double omega_t, double kernel_sum_t);

/// sum w_i^2 sigma_i^2 with the arm's sd variances.
double weight_variance(const Side& side, const SideFit& fit);
/// sum w_i^a w_i^b sigma_i^2 with the arm's sd variances.
double weight_covariance(const Side& side, const SideFit& a, const SideFit& b);

/// sqrt of the variance of sum_t w y - sum_c w y.
double direct_sd(const Side& t, const SideFit& ft, const Side& c, const SideFit& fc);

/// Sum of squared kernels over sigma^2, for the kernel-sum identity.
double kernel_sq_sum(const Side& side, const SideFit& fit);

} // namespace rdmono
