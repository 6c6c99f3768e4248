#include "rdmono/modulus.hpp"

#include "rdmono/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

namespace rdmono {

SideProblem make_side_problem(const Side& side, double c_plus, double c_minus) {
    if (c_plus < 0.0 || c_minus < 0.0) throw InputError("Lipschitz constants must be nonnegative");
    SideProblem p;
    p.costs.reserve(side.size());
    p.inv_var.reserve(side.size());
    for (std::size_t i = 0; i < side.size(); ++i) {
        const double c = scaled_cost(side.parts[i], c_plus, c_minus);
        if (!std::isfinite(c)) continue;
        p.costs.push_back(c);
        p.inv_var.push_back(1.0 / side.sigma2[i]);
    }
    return p;
}

SideSolver::SideSolver(const SideProblem& p) {
    if (p.costs.size() != p.inv_var.size()) throw InputError("cost and weight vectors differ in length");
    if (p.costs.empty()) throw InputError("side has no observations with finite cost");
    const std::size_t n = p.costs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p.costs[a] < p.costs[b]; });
    c_.resize(n);
    w_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        c_[k] = p.costs[order[k]];
        w_[k] = p.inv_var[order[k]];
        if (!(c_[k] >= 0.0)) throw InputError("costs must be nonnegative");
        if (!(w_[k] > 0.0) || !std::isfinite(w_[k])) throw InputError("inverse variances must be positive");
    }
    // Moments are taken relative to the smallest cost so that the sums stay
    // exact near the minimum, where delta is tiny and cancellation would
    // otherwise swamp delta^2.
    shift_ = c_[0];
    W_.assign(n + 1, 0.0);
    mean_.assign(n + 1, 0.0);
    m2_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double ck = c_[k] - shift_;
        const double W = W_[k] + w_[k];
        const double dlt = ck - mean_[k];
        const double mean = mean_[k] + dlt * (w_[k] / W);
        W_[k + 1] = W;
        mean_[k + 1] = mean;
        m2_[k + 1] = m2_[k] + w_[k] * dlt * (ck - mean);
    }
}

double SideSolver::min_weight() const {
    double w = 0.0;
    for (std::size_t k = 0; k < c_.size() && c_[k] == c_.front(); ++k) w += w_[k];
    return w;
}

std::size_t SideSolver::segment_below(double b) const {
    return static_cast<std::size_t>(std::lower_bound(c_.begin(), c_.end(), b) - c_.begin());
}

double SideSolver::mass(double b) const { return mass_rel(b - shift_); }

double SideSolver::mass_rel(double u) const {
    const auto it = std::lower_bound(c_.begin(), c_.end(), u, [&](double c, double v) { return c - shift_ < v; });
    const auto k = static_cast<std::size_t>(it - c_.begin());
    if (k == 0) return 0.0;
    return W_[k] * (u - mean_[k]);
}

double SideSolver::sq_mass(double b) const {
    const std::size_t k = segment_below(b);
    if (k == 0) return 0.0;
    const double u = (b - shift_) - mean_[k];
    return W_[k] * u * u + m2_[k];
}

double SideSolver::omega(double delta) const { return shift_ + omega_rel(delta); }

double SideSolver::omega_rel(double delta) const {
    if (!(delta >= 0.0)) throw InputError("delta must be nonnegative");
    if (delta == 0.0) return 0.0;
    const double target = delta * delta;
    const std::size_t n = c_.size();
    // Smallest k >= 1 whose quadratic reaches the target before c_[k].
    auto reach = [&](std::size_t k) {
        if (k == n) return true;
        const double u = (c_[k] - shift_) - mean_[k];
        return W_[k] * u * u + m2_[k] >= target;
    };
    std::size_t lo = 1, hi = n;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (reach(mid)) hi = mid; else lo = mid + 1;
    }
    const std::size_t k = lo;
    const double rad = (target - m2_[k]) / W_[k];
    const double u = mean_[k] + std::sqrt(std::max(rad, 0.0));
    const double left = c_[k - 1] - shift_;
    const double right = k < n ? c_[k] - shift_ : std::numeric_limits<double>::infinity();
    if (std::isfinite(u)) return std::clamp(u, left, right);

    // Fallback: bisection on the monotone sum.
    double a = left, z = left + delta / std::sqrt(W_[n]) + (c_[n - 1] - shift_ - left);
    for (int it = 0; it < 200 && z - a > 1e-15 * std::max(1.0, z); ++it) {
        const double m = 0.5 * (a + z);
        if (sq_mass(shift_ + m) < target) a = m; else z = m;
    }
    return 0.5 * (a + z);
}

double omega_side(const SideProblem& side, double delta) { return SideSolver(side).omega(delta); }

ModulusSolution optimal_split(const SideSolver& t, const SideSolver& c, double delta) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw InputError("delta must be finite and nonnegative");
    ModulusSolution sol;
    sol.delta = delta;
    if (delta == 0.0) {
        const double wt = t.min_weight(), wc = c.min_weight();
        sol.omega_t = t.min_cost();
        sol.omega_c = c.min_cost();
        sol.delta_t = sol.delta_c = 0.0;
        sol.omega_prime = std::sqrt(1.0 / wt + 1.0 / wc);
        return sol;
    }
    auto eval = [&](double th, ModulusSolution& s) {
        s.delta_t = delta * std::sin(th);
        s.delta_c = delta * std::cos(th);
        const double ut = t.omega_rel(s.delta_t), uc = c.omega_rel(s.delta_c);
        s.omega_t = t.min_cost() + ut;
        s.omega_c = c.min_cost() + uc;
        s.mass_t = t.mass_rel(ut);
        s.mass_c = c.mass_rel(uc);
        return s.mass_t - s.mass_c;
    };
    double lo = 0.0, hi = std::numbers::pi / 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (eval(mid, sol) < 0.0) lo = mid; else hi = mid;
    }
    eval(0.5 * (lo + hi), sol);
    sol.omega_prime = omega_prime(sol);
    return sol;
}

ModulusSolution optimal_split(const SideProblem& t, const SideProblem& c, double delta) {
    return optimal_split(SideSolver(t), SideSolver(c), delta);
}

double omega_prime(const ModulusSolution& sol) {
    if (sol.delta == 0.0) return sol.omega_prime;
    if (!(sol.mass_t > 0.0) || !(sol.mass_c > 0.0))
        throw NumericError("modulus split produced an empty side at delta = " + std::to_string(sol.delta));
    const double pt = sol.delta / sol.mass_t;
    const double pc = sol.delta / sol.mass_c;
    if (std::abs(pt - pc) > 1e-6 * std::max(pt, pc))
        throw NumericError("omega' treated/control mismatch: " + std::to_string(pt) + " vs " + std::to_string(pc));
    return pt;
}

ModulusProblem make_modulus_problem(const Sides& sides, double c1, double c2) {
    return {make_side_problem(sides.treated, c1, c2), make_side_problem(sides.control, c2, c1)};
}

ModulusSolution solve_modulus(const Sides& sides, double c1, double c2, double delta) {
    const auto p = make_modulus_problem(sides, c1, c2);
    return optimal_split(p.treated, p.control, delta);
}

} // namespace rdmono
