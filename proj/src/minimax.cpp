#include "rdmono/minimax.hpp"

#include "rdmono/error.hpp"
#include "rdmono/normal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdmono {

std::pair<double, double> bias_bounds(const Sides& sides, const SideFit& ft, const SideFit& fc, double C,
                                      double a_t, double a_c) {
    // f_q(x) - f_q(0) ranges over [-C||x-||, C||x+||] for each arm.
    const double up = weighted_cost(sides.treated, ft, C, 0.0) + weighted_cost(sides.control, fc, 0.0, C);
    const double down = weighted_cost(sides.treated, ft, 0.0, C) + weighted_cost(sides.control, fc, C, 0.0);
    return {up - a_t + a_c, -down - a_t + a_c};
}

MinimaxPoint minimax_at(const Sides& sides, double C, double delta, double alpha) {
    if (!std::isfinite(C)) throw InputError("the minimax CI needs a finite C (with C = inf it is the whole line)");
    if (!(C > 0.0)) throw InputError("C must be positive");
    if (!(delta > 0.0)) throw InputError("delta must be positive");
    MinimaxPoint p;
    p.delta = delta;
    p.modulus = solve_modulus(sides, C, C, delta);
    p.h_t = p.modulus.omega_t / C;
    p.h_c = p.modulus.omega_c / C;
    p.fit_t = nw_point(sides.treated, Bandwidth::scalar(p.h_t), "treated");
    p.fit_c = nw_point(sides.control, Bandwidth::scalar(p.h_c), "control");
    p.nw_t = p.fit_t.value;
    p.nw_c = p.fit_c.value;
    p.a_t = centering_a(sides.treated, p.fit_t, C, C);
    p.a_c = centering_a(sides.control, p.fit_c, C, C);
    p.estimate = (p.nw_t - p.a_t) - (p.nw_c - p.a_c);
    p.sd_formula = sd_s(delta, p.modulus.omega_t, p.fit_t.kernel_sum);
    p.sd = direct_sd(sides.treated, p.fit_t, sides.control, p.fit_c);
    p.worst_bias = std::max(bias_bounds(sides, p.fit_t, p.fit_c, C, p.a_t, p.a_c).first, 0.0);
    p.worst_bias_formula = 0.5 * (C * (p.h_t + p.h_c) - delta * p.sd_formula);
    p.chi_design = cv_alpha(p.worst_bias / p.sd_formula, alpha) * p.sd_formula;
    p.chi = p.sd > 0.0 ? cv_alpha(p.worst_bias / p.sd, alpha) * p.sd : p.worst_bias;
    return p;
}

namespace {

double all_in_delta(const Sides& sides, double C) {
    const auto prob = make_modulus_problem(sides, C, C);
    const double ct = *std::max_element(prob.treated.costs.begin(), prob.treated.costs.end());
    const double cc = *std::max_element(prob.control.costs.begin(), prob.control.costs.end());
    const SideSolver st(prob.treated), sc(prob.control);
    // delta at which both arms reach their largest cost.
    const double dt = std::sqrt(st.sq_mass(ct)), dc = std::sqrt(sc.sq_mass(cc));
    return std::sqrt(dt * dt + dc * dc);
}

} // namespace

MinimaxCI minimax_ci(const Sides& sides, double C, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    MinimaxCI ci;
    ci.alpha = alpha;
    ci.C = C;
    const double lo = 1e-3;
    const double hi = std::max(10.0, 2.0 * all_in_delta(sides, C));
    const int grid = 64;
    auto chi_of = [&](double delta) { return minimax_at(sides, C, delta, alpha).chi_design; };

    int best = 0;
    for (int i = 0; i < grid; ++i) {
        const double delta = lo * std::pow(hi / lo, static_cast<double>(i) / (grid - 1));
        ci.profile.emplace_back(delta, chi_of(delta));
        if (ci.profile[i].second < ci.profile[best].second) best = i;
    }
    // Golden section on log delta between the neighbours of the scan minimum.
    double a = std::log(ci.profile[std::max(best - 1, 0)].first);
    double b = std::log(ci.profile[std::min(best + 1, grid - 1)].first);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = chi_of(std::exp(x1)), f2 = chi_of(std::exp(x2));
    while (b - a > 1e-8) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - g * (b - a); f1 = chi_of(std::exp(x1));
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + g * (b - a); f2 = chi_of(std::exp(x2));
        }
    }
    double delta_star = std::exp(0.5 * (a + b));
    if (ci.profile[best].second < chi_of(delta_star)) delta_star = ci.profile[best].first;

    ci.at = minimax_at(sides, C, delta_star, alpha);
    const double left = chi_of(delta_star * (1.0 - 1e-4));
    const double right = chi_of(delta_star * (1.0 + 1e-4));
    const double tol = 1e-10 * ci.at.chi_design;
    ci.local_min_verified = left >= ci.at.chi_design - tol && right >= ci.at.chi_design - tol;
    ci.half_length = ci.at.chi;
    ci.lower = ci.at.estimate - ci.half_length;
    ci.upper = ci.at.estimate + ci.half_length;
    return ci;
}

std::vector<GainRow> gain_curve(const Dataset& data, const FunctionSpace& space, std::span<const double> sigma2,
                                const std::vector<double>& C_grid, double alpha) {
    FunctionSpace none = space;
    none.V = MonotoneSet::none(space.dim());
    none.decreasing.clear();
    const Sides mono = split_sides(data, space, sigma2);
    const Sides flat = split_sides(data, none, sigma2);
    std::vector<GainRow> rows;
    for (double C : C_grid) {
        if (!(C > 0.0) || !std::isfinite(C)) throw InputError("gain grid values must be positive and finite");
        GainRow r;
        r.C = C;
        const auto m = minimax_ci(mono, C, alpha);
        const auto f = minimax_ci(flat, C, alpha);
        r.chi_mono = m.half_length;
        r.chi_none = f.half_length;
        r.ratio = r.chi_none / r.chi_mono;
        r.delta = m.at.delta;
        const auto sm = solve_modulus(mono, C, C, r.delta);
        const auto sf = solve_modulus(flat, C, C, r.delta);
        r.bw_ratio_t = 2.0 * sm.omega_t / sf.omega_t;
        r.bw_ratio_c = 2.0 * sm.omega_c / sf.omega_c;
        rows.push_back(r);
    }
    return rows;
}

} // namespace rdmono
