#include "rdmono/simlab.hpp"

#include "rdmono/adaptive.hpp"
#include "rdmono/error.hpp"
#include "rdmono/minimax.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

namespace rdmono {

namespace {

double pos(double v) { return v > 0.0 ? v : 0.0; }

double f_control(const DGPSpec& s, double x) {
    switch (s.family) {
        case Family::F1: return s.C * x;
        case Family::F2: {
            const auto [b1, b2] = s.knots;
            return 1.5 * s.C * (x * x - 2.0 * pos(x - b1) * pos(x - b1) + 2.0 * pos(x - b2) * pos(x - b2));
        }
        case Family::F3: return s.C / 4.0 * (x * x * x + x);
        case Family::F4: return s.C * (std::cbrt(3.0 * x + 1.0) - 1.0);
        default: return 0.0;
    }
}

std::uint64_t rep_seed(std::uint64_t seed, std::size_t rep, std::uint32_t stream) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32), stream};
    std::uint32_t words[2];
    sq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
    for (const auto& [name, v] : table)
        if (s == name) return v;
    throw InputError(std::string("unknown ") + what + " '" + s + "'");
}

} // namespace

std::string to_string(Family f) {
    switch (f) {
        case Family::F1: return "f1";
        case Family::F2: return "f2";
        case Family::F3: return "f3";
        case Family::F4: return "f4";
        case Family::Linear2D: return "linear2d";
        case Family::Constant: return "constant";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    return parse_enum<Family>(s,
                              {{"f1", Family::F1}, {"f2", Family::F2}, {"f3", Family::F3}, {"f4", Family::F4},
                               {"linear2d", Family::Linear2D}, {"constant", Family::Constant}},
                              "DGP family");
}

std::string to_string(XDist x) { return x == XDist::Uniform ? "uniform" : "beta22"; }
XDist xdist_from_string(const std::string& s) {
    return parse_enum<XDist>(s, {{"uniform", XDist::Uniform}, {"beta22", XDist::Beta22}}, "x distribution");
}
std::string to_string(VarFn v) { return v == VarFn::Sigma1 ? "sigma1" : "sigma2"; }
VarFn varfn_from_string(const std::string& s) {
    return parse_enum<VarFn>(s, {{"sigma1", VarFn::Sigma1}, {"sigma2", VarFn::Sigma2}}, "variance function");
}

void DGPSpec::validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw InputError("DGP constant C must be positive and finite");
    if (!std::isfinite(theta)) throw InputError("DGP theta must be finite");
    if (!(noise_scale > 0.0)) throw InputError("noise_scale must be positive");
    if (n < 4) throw InputError("DGP sample size must be at least 4");
    if (d == 0) throw InputError("DGP dimension must be positive");
    const bool one_d = family != Family::Linear2D && family != Family::Constant;
    if (one_d && d != 1) throw InputError("families f1-f4 are one-dimensional");
    if (family == Family::Linear2D && d != 2) throw InputError("linear2d needs d = 2");
    if (family == Family::F2) {
        const auto [b1, b2] = knots;
        if (!(0.0 < b1 && b1 < b2)) throw InputError("f2 knots need 0 < b1 < b2");
        if (b1 < b2 / 2.0) throw InputError("f2 knots need b1 >= b2 / 2 for monotonicity");
    }
}

double eval_dgp(const DGPSpec& spec, std::span<const double> x, bool treated) {
    if (x.size() != spec.d) throw InputError("x has the wrong dimension for this DGP");
    for (double v : x)
        if (!(v >= -1.0 && v <= 1.0)) throw InputError("x outside [-1, 1]^d");
    const double jump = treated ? spec.theta : 0.0;
    switch (spec.family) {
        case Family::F1:
        case Family::F3: return f_control(spec, x[0]) + jump;
        case Family::F2:
        case Family::F4: return treated ? -f_control(spec, -x[0]) + spec.theta : f_control(spec, x[0]);
        case Family::Linear2D: return spec.C * (x[0] + x[1]) + jump;
        case Family::Constant: return jump;
    }
    return 0.0;
}

double noise_sd(const DGPSpec& spec, std::span<const double> x) {
    if (spec.var_fn == VarFn::Sigma1) return spec.noise_scale;
    double s = 0.0;
    for (double v : x) s += v * v;
    return spec.noise_scale * std::exp(-s / 2.0);
}

DGPSpec sim_design(int design, Family family, double theta) {
    if (design < 1 || design > 8) throw InputError("design must be 1..8");
    DGPSpec s;
    s.family = family;
    s.theta = theta;
    s.x_dist = design % 2 == 1 ? XDist::Uniform : XDist::Beta22;
    s.var_fn = (design == 1 || design == 2 || design == 5 || design == 6) ? VarFn::Sigma1 : VarFn::Sigma2;
    s.C = design <= 4 ? 1.0 : 3.0;
    s.noise_scale = 0.5;
    s.n = 500;
    s.d = family == Family::Linear2D ? 2 : 1;
    return s;
}

Dataset draw_sample(const DGPSpec& spec, std::uint64_t seed, std::size_t rep) {
    spec.validate();
    std::mt19937_64 rng(rep_seed(seed, rep, 0));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::gamma_distribution<double> g(2.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    Dataset d;
    d.d = spec.d;
    d.sigma = std::vector<double>{};
    std::vector<double> row(spec.d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        bool treated = true;
        for (auto& v : row) {
            if (spec.x_dist == XDist::Uniform) {
                v = u(rng);
            } else {
                const double a = g(rng), b = g(rng);
                v = 2.0 * a / (a + b) - 1.0;
            }
            treated = treated && v < 0.0;
        }
        const double s = noise_sd(spec, row);
        d.x.insert(d.x.end(), row.begin(), row.end());
        d.y.push_back(eval_dgp(spec, row, treated) + s * z(rng));
        d.treated.push_back(treated ? 1 : 0);
        d.sigma->push_back(s);
    }
    return d;
}

RepOutcome run_method(const MethodConfig& m, const DGPSpec& spec, const Dataset& sample, std::uint64_t method_seed) {
    const auto space = FunctionSpace::defaults(sample.d, m.C);
    const auto plan = plan_variance(sample, m.variance, m.nn_j);
    RepOutcome out;
    if (m.kind == MethodKind::Minimax) {
        const auto sides = split_sides(sample, space, plan.sigma2, plan.sd_sigma2);
        const auto ci = minimax_ci(sides, m.C, m.alpha);
        out.lower = ci.lower;
        out.upper = ci.upper;
        out.length = ci.upper - ci.lower;
        out.covered = ci.lower <= spec.theta && spec.theta <= ci.upper;
        return out;
    }
    const std::vector<double> cl = m.kind == MethodKind::Oracle ? std::vector<double>{spec.C} : m.C_list;
    const auto ci = adaptive_ci(sample, space, plan.sigma2, plan.sd_sigma2, cl, m.alpha, CIDirection::Lower,
                                m.mc_draws, method_seed);
    out.lower = ci.endpoint;
    out.upper = kInf;
    out.length = spec.theta - ci.endpoint;
    out.covered = ci.endpoint <= spec.theta;
    return out;
}

std::vector<SimResult> run_mc(const DGPSpec& spec, const std::vector<MethodConfig>& methods, std::size_t reps,
                              std::uint64_t seed, unsigned threads, std::vector<std::vector<RepOutcome>>* per_rep) {
    if (reps == 0) throw InputError("reps must be at least 1");
    spec.validate();
    std::vector<std::vector<RepOutcome>> outcomes(methods.size(), std::vector<RepOutcome>(reps));
    std::vector<std::exception_ptr> errors(reps);
    std::vector<std::vector<double>> times(methods.size(), std::vector<double>(reps, 0.0));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < reps; r = next++) {
            try {
                const auto sample = draw_sample(spec, seed, r);
                for (std::size_t k = 0; k < methods.size(); ++k) {
                    const auto t0 = std::chrono::steady_clock::now();
                    outcomes[k][r] = run_method(methods[k], spec, sample, rep_seed(seed, r, 1 + k));
                    times[k][r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                }
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, reps));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t r = 0; r < reps; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const InputError& e) {
            throw InputError("replication " + std::to_string(r) + ": " + e.what());
        } catch (const std::exception& e) {
            throw NumericError("replication " + std::to_string(r) + ": " + e.what());
        }
    }
    std::vector<SimResult> res(methods.size());
    for (std::size_t k = 0; k < methods.size(); ++k) {
        double cov = 0, s = 0, s2 = 0, tsum = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            cov += outcomes[k][r].covered ? 1.0 : 0.0;
            s += outcomes[k][r].length;
            s2 += outcomes[k][r].length * outcomes[k][r].length;
            tsum += times[k][r];
        }
        const double R = static_cast<double>(reps);
        auto& o = res[k];
        o.label = methods[k].label;
        o.reps = reps;
        o.seed = seed;
        o.coverage = cov / R;
        o.se = std::sqrt(o.coverage * (1.0 - o.coverage) / R);
        o.mean_length = s / R;
        o.length_se = reps > 1 ? std::sqrt(std::max(s2 / R - o.mean_length * o.mean_length, 0.0) / (R - 1.0)) : 0.0;
        o.runtime_s = tsum;
    }
    if (per_rep) *per_rep = std::move(outcomes);
    return res;
}

} // namespace rdmono
