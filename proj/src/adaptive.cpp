#include "rdmono/adaptive.hpp"

#include "rdmono/error.hpp"
#include "rdmono/normal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rdmono {

namespace {

std::vector<std::string> lower_conditions(const Dataset& data, const FunctionSpace& space) {
    std::vector<std::string> failed;
    bool t_ok = false, c_ok = false;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto r = data.row(i);
        if (data.treated[i] && std::all_of(r.begin(), r.end(), [](double v) { return v <= 0.0; })) t_ok = true;
        if (!data.treated[i] && std::all_of(r.begin(), r.end(), [](double v) { return v >= 0.0; })) c_ok = true;
    }
    if (!t_ok) failed.push_back("no treated observation in (-inf, 0]^d");
    if (!c_ok) failed.push_back("no control observation in [0, inf)^d");
    if (!space.V.is_full()) failed.push_back("V != {1,...,d}");
    return failed;
}

double sum_weighted(const Side& side, const SideFit& fit, bool plus) {
    double acc = 0.0;
    for (std::size_t i = 0; i < side.size(); ++i) {
        const double p = plus ? side.parts[i].plus : side.parts[i].minus;
        if (fit.weights[i] > 0.0 && p != 0.0) acc += fit.weights[i] * p;
    }
    return acc;
}

} // namespace

AllocationCheck check_allocation(const Dataset& data, const FunctionSpace& space) {
    AllocationCheck out;
    const auto lo = lower_conditions(data, space);
    const auto up = lower_conditions(reflect(data), space);
    out.lower_feasible = lo.empty();
    out.upper_feasible = up.empty();
    for (const auto& r : lo) out.reasons.push_back("lower: " + r);
    for (const auto& r : up) out.reasons.push_back("upper: " + r);
    return out;
}

PerConstant endpoint_one(const Sides& sides, double C_j, double C, double tau) {
    if (!(C_j >= 0.0) || !(C_j <= C)) throw InputError("adaptive constants must satisfy 0 <= C_j <= C");
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("tau must lie in (0, 1)");
    PerConstant pc;
    pc.C_j = C_j;
    pc.tau = tau;
    pc.z = norm_quantile(1.0 - tau);
    if (!(pc.z > 0.0)) throw InputError("tau must be below 1/2");
    pc.modulus = solve_modulus(sides, C, C_j, pc.z);
    pc.h_t = Bandwidth::from_omega(pc.modulus.omega_t, C, C_j);
    pc.h_c = Bandwidth::from_omega(pc.modulus.omega_c, C_j, C);
    pc.fit_t = nw_point(sides.treated, pc.h_t, "treated");
    pc.fit_c = nw_point(sides.control, pc.h_c, "control");
    pc.estimate = pc.fit_t.value - pc.fit_c.value;
    pc.sd = direct_sd(sides.treated, pc.fit_t, sides.control, pc.fit_c);
    pc.sd_formula = sd_s(pc.z, pc.modulus.omega_t, pc.fit_t.kernel_sum);
    // f_t(x) - f_t(0) <= C||x+||, f_c(0) - f_c(x) <= C||x-||.
    pc.worst_bias = weighted_cost(sides.treated, pc.fit_t, C, 0.0) + weighted_cost(sides.control, pc.fit_c, 0.0, C);
    pc.worst_bias_formula = centering_a(sides.treated, pc.fit_t, C, C_j) - centering_a(sides.control, pc.fit_c, C_j, C) +
                            0.5 * (pc.modulus.omega_t + pc.modulus.omega_c - pc.z * pc.sd_formula);
    pc.endpoint = pc.estimate - pc.worst_bias - pc.z * pc.sd;
    pc.slope = sum_weighted(sides.treated, pc.fit_t, false) + sum_weighted(sides.control, pc.fit_c, true);
    return pc;
}

Eigen::MatrixXd estimator_correlation(const Sides& sides, const std::vector<PerConstant>& pcs) {
    const auto J = static_cast<Eigen::Index>(pcs.size());
    Eigen::MatrixXd m(J, J);
    for (Eigen::Index j = 0; j < J; ++j) {
        for (Eigen::Index k = 0; k <= j; ++k) {
            const auto& a = pcs[j];
            const auto& b = pcs[k];
            const double cov = weight_covariance(sides.treated, a.fit_t, b.fit_t) +
                               weight_covariance(sides.control, a.fit_c, b.fit_c);
            m(j, k) = m(k, j) = (j == k) ? 1.0 : cov / (a.sd * b.sd);
        }
    }
    return m;
}

Eigen::MatrixXd kernel_correlation(const Sides& sides, const std::vector<PerConstant>& pcs) {
    const auto J = static_cast<Eigen::Index>(pcs.size());
    Eigen::MatrixXd m(J, J);
    auto kk = [](const Side& s, const SideFit& a, const SideFit& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) acc += a.kernel[i] * b.kernel[i] / s.sigma2[i];
        return acc;
    };
    for (Eigen::Index j = 0; j < J; ++j) {
        for (Eigen::Index k = 0; k < J; ++k) {
            const auto& a = pcs[j];
            const auto& b = pcs[k];
            const double z2 = a.z * b.z;
            m(j, k) = kk(sides.treated, a.fit_t, b.fit_t) * a.modulus.omega_t * b.modulus.omega_t / z2 +
                      kk(sides.control, a.fit_c, b.fit_c) * a.modulus.omega_c * b.modulus.omega_c / z2;
        }
    }
    return m;
}

DrawMatrix::DrawMatrix(std::size_t draws, std::size_t J, std::uint64_t seed) : z_(J, draws) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t i = 0; i < draws; ++i)
        for (std::size_t j = 0; j < J; ++j) z_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = nd(rng);
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of the covariance failed");
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-8 * std::max(1.0, ev.maxCoeff()))
        throw NumericError("covariance matrix is not positive semidefinite");
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 1e-12));
    return es.eigenvectors() * ev.asDiagonal();
}

std::vector<double> normalize_constants(std::vector<double> C_list) {
    if (C_list.empty()) throw InputError("at least one adaptive constant is required");
    std::sort(C_list.begin(), C_list.end());
    C_list.erase(std::unique(C_list.begin(), C_list.end()), C_list.end());
    return C_list;
}

namespace {

std::vector<PerConstant> all_constants(const Sides& sides, const std::vector<double>& C_list, double C, double tau) {
    std::vector<PerConstant> pcs;
    pcs.reserve(C_list.size());
    for (double cj : C_list) pcs.push_back(endpoint_one(sides, cj, C, tau));
    return pcs;
}

double exceed_prob(const Sides& sides, const std::vector<double>& C_list, double C, double tau,
                   const DrawMatrix& draws) {
    const auto pcs = all_constants(sides, C_list, C, tau);
    const Eigen::MatrixXd L = psd_factor(estimator_correlation(sides, pcs));
    const Eigen::MatrixXd v = L * draws.z();
    const double z = norm_quantile(1.0 - tau);
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < v.cols(); ++i)
        if (v.col(i).maxCoeff() > z) ++hits;
    return static_cast<double>(hits) / static_cast<double>(v.cols());
}

} // namespace

TauCalibration calibrate_tau(const Sides& sides, const std::vector<double>& C_list, double C, double alpha,
                             const DrawMatrix& draws) {
    TauCalibration out;
    const std::size_t J = C_list.size();
    if (J == 1) {
        out.tau = alpha;
        return out;
    }
    if (draws.dim() != J) throw InputError("draw matrix dimension does not match the number of constants");
    const double lo0 = alpha / static_cast<double>(J);
    const double g_hi = exceed_prob(sides, C_list, C, alpha, draws) - alpha;
    if (g_hi <= 0.0) {
        out.tau = alpha;
        out.bracketed = false;
        out.warnings.push_back("exceedance at tau = alpha is not above alpha (within Monte Carlo error); using tau = alpha");
        return out;
    }
    const double g_lo = exceed_prob(sides, C_list, C, lo0, draws) - alpha;
    if (g_lo > 0.0) {
        out.tau = lo0;
        out.bracketed = false;
        out.warnings.push_back("tau root not bracketed in [alpha/J, alpha]; falling back to Bonferroni alpha/J");
        return out;
    }
    double lo = lo0, hi = alpha;
    for (int it = 0; it < 40 && hi - lo > 1e-7 * alpha; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (exceed_prob(sides, C_list, C, mid, draws) - alpha > 0.0) hi = mid; else lo = mid;
    }
    // lo keeps the exceedance at or below alpha.
    out.tau = lo;
    return out;
}

AdaptiveCI adaptive_lower(const Sides& sides, double C, const std::vector<double>& C_list, double alpha,
                          std::size_t mc_draws, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw InputError("alpha must lie in (0, 1/2) for a one-sided CI");
    if (!(C > 0.0)) throw InputError("C must be positive");
    AdaptiveCI ci;
    ci.alpha = alpha;
    ci.C = C;
    ci.C_list = normalize_constants(C_list);
    ci.seed = seed;
    ci.mc_draws = mc_draws;
    for (double cj : ci.C_list)
        if (!(cj >= 0.0) || cj > C) throw InputError("adaptive constants must satisfy 0 <= C_j <= C");
    if (ci.C_list.size() > 1) {
        if (mc_draws < 1000) throw InputError("mc_draws must be at least 1000");
        const DrawMatrix draws(mc_draws, ci.C_list.size(), seed);
        auto cal = calibrate_tau(sides, ci.C_list, C, alpha, draws);
        ci.tau_star = cal.tau;
        ci.warnings = std::move(cal.warnings);
    } else {
        ci.tau_star = alpha;
    }
    ci.per_constant = all_constants(sides, ci.C_list, C, ci.tau_star);
    ci.argmax = 0;
    for (std::size_t j = 1; j < ci.per_constant.size(); ++j)
        if (ci.per_constant[j].endpoint > ci.per_constant[ci.argmax].endpoint) ci.argmax = j;
    ci.endpoint = ci.per_constant[ci.argmax].endpoint;
    return ci;
}

Sides oriented_sides(const Dataset& data, const FunctionSpace& space, std::span<const double> sigma2,
                     std::span<const double> sd_sigma2, CIDirection direction) {
    if (direction == CIDirection::Lower) return split_sides(data, space, sigma2, sd_sigma2);
    return split_sides(reflect(data), space, sigma2, sd_sigma2);
}

AdaptiveCI adaptive_ci(const Dataset& data, const FunctionSpace& space, std::span<const double> sigma2,
                       std::span<const double> sd_sigma2, const std::vector<double>& C_list, double alpha,
                       CIDirection direction, std::size_t mc_draws, std::uint64_t seed) {
    const auto check = check_allocation(data, space);
    const bool ok = direction == CIDirection::Lower ? check.lower_feasible : check.upper_feasible;
    if (!ok) {
        const std::string tag = direction == CIDirection::Lower ? "lower: " : "upper: ";
        std::string why;
        for (const auto& r : check.reasons)
            if (r.rfind(tag, 0) == 0) why += (why.empty() ? "" : "; ") + r.substr(tag.size());
        throw InputError("adaptive " + tag.substr(0, tag.size() - 2) + " CI is not available: " + why);
    }
    const Sides sides = oriented_sides(data, space, sigma2, sd_sigma2, direction);
    AdaptiveCI ci = adaptive_lower(sides, space.C, C_list, alpha, mc_draws, seed);
    ci.direction = direction;
    if (direction == CIDirection::Upper) ci.endpoint = -ci.endpoint;
    return ci;
}

double ell_minimax(const Sides& sides, double C_prime, double C, double alpha) {
    if (!(C_prime >= 0.0) || C_prime > C) throw InputError("ell needs 0 <= C' <= C");
    return solve_modulus(sides, C, C_prime, norm_quantile(1.0 - alpha)).omega();
}

EllAdaptive::EllAdaptive(const Sides& input, const std::vector<double>& C_list, double C, double alpha,
                         std::size_t mc_draws, std::uint64_t seed) {
    // Worst-case lengths are design quantities: the sd must use the same
    // variances as the modulus, or the comparison with ell_minimax is off.
    Sides sides = input;
    sides.treated.sd_sigma2 = sides.treated.sigma2;
    sides.control.sd_sigma2 = sides.control.sigma2;
    const auto cl = normalize_constants(C_list);
    const std::size_t J = cl.size();
    DrawMatrix draws(J > 1 ? mc_draws : 0, J, seed);
    if (J > 1) {
        auto cal = calibrate_tau(sides, cl, C, alpha, draws);
        tau_ = cal.tau;
        warnings_ = std::move(cal.warnings);
    } else {
        tau_ = alpha;
    }
    const auto pcs = all_constants(sides, cl, C, tau_);
    slope_.resize(static_cast<Eigen::Index>(J));
    offset_.resize(static_cast<Eigen::Index>(J));
    cov_.resize(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(J));
    for (std::size_t j = 0; j < J; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        slope_(jj) = pcs[j].slope;
        offset_(jj) = pcs[j].z * pcs[j].sd + pcs[j].worst_bias;
        for (std::size_t k = 0; k < J; ++k)
            cov_(jj, static_cast<Eigen::Index>(k)) = weight_covariance(sides.treated, pcs[j].fit_t, pcs[k].fit_t) +
                                                     weight_covariance(sides.control, pcs[j].fit_c, pcs[k].fit_c);
    }
    if (J > 1) samples_ = psd_factor(cov_) * draws.z();
}

Eigen::VectorXd EllAdaptive::mean(double C_prime) const { return C_prime * slope_ + offset_; }

Eigen::VectorXd EllAdaptive::mins(double C_prime) const {
    const Eigen::VectorXd mu = mean(C_prime);
    Eigen::VectorXd out(samples_.cols());
    for (Eigen::Index i = 0; i < samples_.cols(); ++i) out(i) = (samples_.col(i) + mu).minCoeff();
    return out;
}

double EllAdaptive::value(double C_prime) const {
    if (slope_.size() == 1) return mean(C_prime)(0);
    return mins(C_prime).mean();
}

double EllAdaptive::se(double C_prime) const {
    if (slope_.size() == 1) return 0.0;
    const Eigen::VectorXd m = mins(C_prime);
    const double mu = m.mean();
    const double var = (m.array() - mu).square().sum() / static_cast<double>(m.size() - 1);
    return std::sqrt(var / static_cast<double>(m.size()));
}

DeltaResult delta_ratio(const Sides& sides, const std::vector<double>& C_list, double C, double C_lo, double C_hi,
                        double alpha, std::size_t mc_draws, std::uint64_t seed) {
    if (!(C_lo >= 0.0) || C_lo > C_hi || C_hi > C) throw InputError("Delta needs 0 <= C_lo <= C_hi <= C");
    const EllAdaptive ea(sides, C_list, C, alpha, mc_draws, seed);
    auto ratio = [&](double cp) { return ea.value(cp) / ell_minimax(sides, cp, C, alpha); };
    DeltaResult out;
    out.tau_star = ea.tau_star();
    if (C_lo == C_hi) {
        out.profile.emplace_back(C_lo, ratio(C_lo));
    } else {
        const int grid = 33;
        const bool linear = C_lo == 0.0;
        for (int i = 0; i < grid; ++i) {
            const double t = static_cast<double>(i) / (grid - 1);
            const double cp = linear ? C_lo + t * (C_hi - C_lo) : C_lo * std::pow(C_hi / C_lo, t);
            out.profile.emplace_back(cp, ratio(cp));
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.profile.size(); ++i)
        if (out.profile[i].second > out.profile[best].second) best = i;
    out.argmax_C = out.profile[best].first;
    out.delta = out.profile[best].second;
    if (out.profile.size() > 1) {
        double a = out.profile[best == 0 ? 0 : best - 1].first;
        double b = out.profile[std::min(best + 1, out.profile.size() - 1)].first;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        double f1 = ratio(x1), f2 = ratio(x2);
        for (int it = 0; it < 40 && b - a > 1e-6 * std::max(1.0, b); ++it) {
            if (f1 >= f2) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - g * (b - a); f1 = ratio(x1);
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + g * (b - a); f2 = ratio(x2);
            }
        }
        const double xm = 0.5 * (a + b);
        const double fm = ratio(xm);
        if (fm > out.delta) {
            out.delta = fm;
            out.argmax_C = xm;
        }
    }
    out.se = ea.se(out.argmax_C) / ell_minimax(sides, out.argmax_C, C, alpha);
    return out;
}

std::vector<double> equidistant_grid(double lo, double hi, std::size_t J) {
    if (J == 0) throw InputError("grid size must be positive");
    if (J == 1) return {lo};
    std::vector<double> g(J);
    for (std::size_t j = 0; j < J; ++j) g[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(J - 1);
    g.back() = hi;
    return g;
}

GridSelection choose_grid(const Sides& sides, double C_lo, double C_hi, double C, double alpha, double epsilon,
                          std::size_t cap, std::size_t mc_draws, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (cap < 3) throw InputError("grid cap must be at least 3");
    if (!(C_lo >= 0.0) || C_lo > C_hi || C_hi > C) throw InputError("grid needs 0 <= C_lo <= C_hi <= C");
    GridSelection out;
    out.epsilon = epsilon;
    if (C_lo == C_hi) {
        const auto d = delta_ratio(sides, {C_lo}, C, C_lo, C_hi, alpha, mc_draws, seed);
        out.J_star = 2;
        out.C_list = {C_lo};
        out.delta_history = {d.delta};
        out.se_history = {d.se};
        out.warnings.push_back("degenerate interval: grid collapses to a single constant");
        return out;
    }
    std::size_t best_J = 2;
    for (std::size_t J = 2; J <= cap; ++J) {
        const auto d = delta_ratio(sides, equidistant_grid(C_lo, C_hi, J), C, C_lo, C_hi, alpha, mc_draws, seed);
        out.delta_history.push_back(d.delta);
        out.se_history.push_back(d.se);
        if (d.delta < out.delta_history[best_J - 2]) best_J = J;
        if (J >= 3 && std::abs(d.delta - out.delta_history[J - 3]) <= epsilon) {
            out.J_star = J;
            out.C_list = equidistant_grid(C_lo, C_hi, J);
            return out;
        }
    }
    out.capped = true;
    out.J_star = best_J;
    out.C_list = equidistant_grid(C_lo, C_hi, best_J);
    out.warnings.push_back("grid cap reached before the stopping rule held; using the smallest Delta seen");
    return out;
}

} // namespace rdmono
