#pragma once

#include "rdmono/design.hpp"

#include <cstddef>
#include <vector>

namespace rdmono {

/// One arm of the inverse-modulus problem: per-observation costs and 1/sigma^2.
struct SideProblem {
    std::vector<double> costs;
    std::vector<double> inv_var;
};

/// Costs c_plus*||x+|| + c_minus*||x-|| over one arm. Observations whose cost
/// is infinite (an infinite constant meeting a nonzero part) are dropped.
SideProblem make_side_problem(const Side& side, double c_plus, double c_minus);

/// Sorted costs with weighted prefix moments, so that
/// sum_{c_i <= b} w_i (b - c_i)^2 is a closed-form quadratic on each segment.
class SideSolver {
public:
    explicit SideSolver(const SideProblem& p);

    /// The unique b >= min cost with sum w_i [b - c_i]_+^2 = delta^2.
    double omega(double delta) const;
    /// omega(delta) - min_cost(), without the rounding of the absolute value.
    double omega_rel(double delta) const;
    /// sum w_i [b - c_i]_+.
    double mass(double b) const;
    /// mass(min_cost() + u).
    double mass_rel(double u) const;
    /// sum w_i [b - c_i]_+^2.
    double sq_mass(double b) const;
    double min_cost() const { return c_.front(); }
    /// Total inverse variance at the minimum cost.
    double min_weight() const;
    std::size_t size() const { return c_.size(); }

private:
    std::size_t segment_below(double b) const;  // #costs strictly below b

    std::vector<double> c_;     // sorted costs
    std::vector<double> w_;     // matching inverse variances
    double shift_ = 0.0;        // smallest cost; moments are relative to it
    std::vector<double> W_;     // prefix sums of w, W_[k] over first k
    std::vector<double> mean_;  // prefix weighted means
    std::vector<double> m2_;    // prefix weighted sums of squared deviations
};

double omega_side(const SideProblem& side, double delta);

struct ModulusSolution {
    double delta = 0.0;
    double delta_t = 0.0;
    double delta_c = 0.0;
    double omega_t = 0.0;
    double omega_c = 0.0;
    double omega_prime = 0.0;
    double mass_t = 0.0;  // sum_t w [omega_t - c]_+
    double mass_c = 0.0;

    double omega() const { return omega_t + omega_c; }
};

/// Maximize omega_t(delta sin th) + omega_c(delta cos th) over th in [0, pi/2].
/// The derivative in th has the sign of mass_t - mass_c, which is increasing
/// in th, so the maximizer is the root of that difference.
ModulusSolution optimal_split(const SideSolver& t, const SideSolver& c, double delta);
ModulusSolution optimal_split(const SideProblem& t, const SideProblem& c, double delta);

/// delta / mass_t, checked against delta / mass_c to relative 1e-6.
double omega_prime(const ModulusSolution& sol);

/// Treated costs use (c1 on V+, c2 on V-); control costs swap to (c2, c1).
struct ModulusProblem {
    SideProblem treated;
    SideProblem control;
};
ModulusProblem make_modulus_problem(const Sides& sides, double c1, double c2);

ModulusSolution solve_modulus(const Sides& sides, double c1, double c2, double delta);

} // namespace rdmono
