#pragma once

#include "rdmono/design.hpp"
#include "rdmono/estimator.hpp"
#include "rdmono/modulus.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rdmono {

enum class CIDirection { Lower, Upper };

struct AllocationCheck {
    bool lower_feasible = false;
    bool upper_feasible = false;
    std::vector<std::string> reasons;  // failed conditions, prefixed by direction
};

/// The three conditions under which a lower CI can avoid growing with C:
/// a treated point in (-inf, 0]^d, a control point in [0, inf)^d, and V full.
/// The upper direction applies the same test to the reflected sample.
AllocationCheck check_allocation(const Dataset& data, const FunctionSpace& space);

/// Lower one-sided CI optimal over F(C_j) with coverage 1 - tau over F(C).
struct PerConstant {
    double C_j = 0.0;
    double tau = 0.0;
    double z = 0.0;  // z_{1 - tau}
    ModulusSolution modulus;
    Bandwidth h_t, h_c;
    SideFit fit_t, fit_c;
    double estimate = 0.0;     // NW_t - NW_c
    double sd = 0.0;           // direct, from the sd variances
    double sd_formula = 0.0;   // (z / omega_t) / sum_t K / sigma^2
    double worst_bias = 0.0;   // sup over F(C), from the weights
    double worst_bias_formula = 0.0;  // a_t - a_c + (omega_t + omega_c - z sd_formula) / 2
    double endpoint = 0.0;
    double slope = 0.0;  // sum_t w ||x-|| + sum_c w ||x+||, the C'-slope of E U_j
};

PerConstant endpoint_one(const Sides& sides, double C_j, double C, double tau);

/// Correlation of the per-constant estimators from their weights.
Eigen::MatrixXd estimator_correlation(const Sides& sides, const std::vector<PerConstant>& pcs);
/// Same matrix from the kernel-product display (weights' variances).
Eigen::MatrixXd kernel_correlation(const Sides& sides, const std::vector<PerConstant>& pcs);

/// Standard-normal draws shared across all tau candidates and C' values.
class DrawMatrix {
public:
    DrawMatrix(std::size_t draws, std::size_t J, std::uint64_t seed);
    std::size_t draws() const { return static_cast<std::size_t>(z_.cols()); }
    std::size_t dim() const { return static_cast<std::size_t>(z_.rows()); }
    const Eigen::MatrixXd& z() const { return z_; }

private:
    Eigen::MatrixXd z_;  // J x draws
};

/// Factor with eigenvalues clipped at 1e-12, so that near-duplicate constants
/// do not break sampling.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov);

/// Sorted, deduplicated constants.
std::vector<double> normalize_constants(std::vector<double> C_list);

struct TauCalibration {
    double tau = 0.0;
    bool bracketed = true;
    std::vector<std::string> warnings;
};

TauCalibration calibrate_tau(const Sides& sides, const std::vector<double>& C_list, double C, double alpha,
                             const DrawMatrix& draws);

struct AdaptiveCI {
    double endpoint = 0.0;
    CIDirection direction = CIDirection::Lower;
    double alpha = 0.05;
    double C = 0.0;
    double tau_star = 0.0;
    std::vector<double> C_list;
    std::vector<PerConstant> per_constant;  // in the lower-CI frame
    std::size_t argmax = 0;
    std::uint64_t seed = 0;
    std::size_t mc_draws = 0;
    std::vector<std::string> warnings;
};

/// Lower CI on already split sides.
AdaptiveCI adaptive_lower(const Sides& sides, double C, const std::vector<double>& C_list, double alpha,
                          std::size_t mc_draws, std::uint64_t seed);

/// Checks allocation for `direction`, reflects for the upper CI, and
/// negates the endpoint back. `sd_sigma2` may be empty.
AdaptiveCI adaptive_ci(const Dataset& data, const FunctionSpace& space, std::span<const double> sigma2,
                       std::span<const double> sd_sigma2, const std::vector<double>& C_list, double alpha,
                       CIDirection direction, std::size_t mc_draws, std::uint64_t seed);

/// The sides in the frame where `direction` becomes a lower CI.
Sides oriented_sides(const Dataset& data, const FunctionSpace& space, std::span<const double> sigma2,
                     std::span<const double> sd_sigma2, CIDirection direction);

/// Worst-case excess length over F(C') of the best lower CI for F(C).
double ell_minimax(const Sides& sides, double C_prime, double C, double alpha);

/// Worst-case excess length of the adaptive CI, E min_j U_j. Evaluated with
/// the weight variances throughout, as ell_minimax is.
class EllAdaptive {
public:
    EllAdaptive(const Sides& sides, const std::vector<double>& C_list, double C, double alpha, std::size_t mc_draws,
                std::uint64_t seed);
    double value(double C_prime) const;
    /// Monte Carlo standard error of value().
    double se(double C_prime) const;
    double tau_star() const { return tau_; }
    Eigen::VectorXd mean(double C_prime) const;
    const Eigen::MatrixXd& covariance() const { return cov_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    Eigen::VectorXd mins(double C_prime) const;

    double tau_ = 0.0;
    Eigen::VectorXd slope_, offset_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd samples_;  // J x draws, centered draws L z
    std::vector<std::string> warnings_;
};

struct DeltaResult {
    double delta = 0.0;
    double argmax_C = 0.0;
    double se = 0.0;  // MC standard error of the ratio at the argmax
    double tau_star = 0.0;
    std::vector<std::pair<double, double>> profile;  // (C', ratio)
};

/// sup over C' in [C_lo, C_hi] of ell_adaptive / ell_minimax: a 33-point grid
/// (log-spaced, linear when C_lo = 0) followed by golden refinement.
DeltaResult delta_ratio(const Sides& sides, const std::vector<double>& C_list, double C, double C_lo, double C_hi,
                        double alpha, std::size_t mc_draws, std::uint64_t seed);

struct GridSelection {
    std::vector<double> C_list;
    std::size_t J_star = 0;
    std::vector<double> delta_history;  // Delta(C(J)) for J = 2, 3, ...
    std::vector<double> se_history;
    double epsilon = 0.0;
    bool capped = false;
    std::vector<std::string> warnings;
};

std::vector<double> equidistant_grid(double lo, double hi, std::size_t J);

GridSelection choose_grid(const Sides& sides, double C_lo, double C_hi, double C, double alpha, double epsilon,
                          std::size_t cap, std::size_t mc_draws, std::uint64_t seed);

} // namespace rdmono
