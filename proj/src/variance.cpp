#include "rdmono/variance.hpp"

#include "rdmono/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rdmono {

namespace {

double quantile7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double sample_var(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double s = 0.0;
    for (double a : v) s += (a - m) * (a - m);
    return s / (n - 1.0);
}

struct Arm {
    std::vector<std::size_t> idx;
};

Arm arm_of(const Dataset& data, bool treated) {
    Arm a;
    for (std::size_t i = 0; i < data.n(); ++i)
        if (static_cast<bool>(data.treated[i]) == treated) a.idx.push_back(i);
    return a;
}

const char* arm_name(bool treated) { return treated ? "treated" : "control"; }

double fit_arm(const Dataset& data, const Arm& arm, bool treated, std::vector<double>& h) {
    const std::size_t d = data.d, m = arm.idx.size();
    if (m < 2) throw InputError(std::string("variance estimation needs at least 2 observations on the ") +
                                arm_name(treated) + " side");
    h.assign(d, 0.0);
    std::vector<double> col(m);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t r = 0; r < m; ++r) col[r] = data.x[arm.idx[r] * d + k];
        h[k] = silverman_bandwidth(col);
    }
    // E e_i^2 = sigma^2 [(1 - L_ii)^2 + sum_{j != i} L_ij^2] for constant
    // sigma^2 and flat f, so dividing by the summed factors removes the
    // shrinkage from each point fitting itself.
    double ssr = 0.0, dof = 0.0;
    std::vector<double> k(m);
    for (std::size_t r = 0; r < m; ++r) {
        const auto xi = data.row(arm.idx[r]);
        double num = 0.0, den = 0.0;
        for (std::size_t s = 0; s < m; ++s) {
            const auto xj = data.row(arm.idx[s]);
            double kv = 1.0;
            for (std::size_t c = 0; c < d && kv > 0.0; ++c) kv *= std::max(1.0 - std::abs(xi[c] - xj[c]) / h[c], 0.0);
            k[s] = kv;
            num += kv * data.y[arm.idx[s]];
            den += kv;
        }
        const double e = data.y[arm.idx[r]] - num / den;
        double f = 0.0;
        for (std::size_t s = 0; s < m; ++s) {
            const double l = k[s] / den;
            f += s == r ? (1.0 - l) * (1.0 - l) : l * l;
        }
        ssr += e * e;
        dof += f;
    }
    if (!(dof > 0.0))
        throw InputError(std::string("variance estimation: no ") + arm_name(treated) +
                         " observation has another point within its bandwidth");
    return ssr / dof;
}

} // namespace

double silverman_bandwidth(std::span<const double> x) {
    if (x.size() < 2) throw InputError("Silverman bandwidth needs at least 2 points");
    const double sd = std::sqrt(sample_var(x));
    if (!(sd > 0.0)) throw InputError("Silverman bandwidth: x is constant");
    std::vector<double> v(x.begin(), x.end());
    const double iqr = quantile7(v, 0.75) - quantile7(v, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;
    return 1.06 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

void stage1_variance(const Dataset& data, VarianceEstimate& out) {
    const double vy = data.n() >= 2 ? sample_var(data.y) : 0.0;
    const double floor = std::max(1e-12 * vy, 1e-300);
    for (bool treated : {true, false}) {
        const Arm arm = arm_of(data, treated);
        auto& h = treated ? out.bandwidth_treated : out.bandwidth_control;
        double s2 = fit_arm(data, arm, treated, h);
        if (s2 < floor) {
            out.warnings.push_back(std::string("stage-1 variance on the ") + arm_name(treated) +
                                   " side is below the floor and was raised to it");
            s2 = floor;
        }
        (treated ? out.stage1_treated : out.stage1_control) = s2;
    }
    out.stage1_sigma2.resize(data.n());
    for (std::size_t i = 0; i < data.n(); ++i)
        out.stage1_sigma2[i] = data.treated[i] ? out.stage1_treated : out.stage1_control;
}

std::vector<double> nn_variance(const Dataset& data, std::size_t J) {
    if (J == 0) throw InputError("--nn-j must be at least 1");
    std::vector<double> out(data.n(), 0.0);
    const std::size_t d = data.d;
    for (bool treated : {true, false}) {
        const Arm arm = arm_of(data, treated);
        if (arm.idx.size() < J + 1)
            throw InputError(std::string("nearest-neighbour variance needs at least ") + std::to_string(J + 1) +
                             " observations on the " + arm_name(treated) + " side");
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t i : arm.idx) {
            dist.clear();
            for (std::size_t j : arm.idx) {
                if (j == i) continue;
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    const double t = data.x[i * d + k] - data.x[j * d + k];
                    s += t * t;
                }
                dist.emplace_back(s, j);
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(J), dist.end());
            double m = 0.0;
            for (std::size_t r = 0; r < J; ++r) m += data.y[dist[r].second];
            m /= static_cast<double>(J);
            const double e = data.y[i] - m;
            out[i] = static_cast<double>(J) / static_cast<double>(J + 1) * e * e;
        }
    }
    return out;
}

VarianceEstimate estimate_variance(const Dataset& data, std::size_t J_nn) {
    VarianceEstimate v;
    v.J_nn = J_nn;
    stage1_variance(data, v);
    v.stage2_sigma2 = nn_variance(data, J_nn);
    return v;
}

VariancePlan plan_variance(const Dataset& data, VarianceMode mode, std::size_t J_nn) {
    VariancePlan p;
    if (mode == VarianceMode::Known) {
        p.sigma2 = known_sigma2(data);
        p.sd_sigma2 = p.sigma2;
        return p;
    }
    p.estimate = estimate_variance(data, J_nn);
    p.sigma2 = p.estimate->stage1_sigma2;
    p.sd_sigma2 = p.estimate->stage2_sigma2;
    return p;
}

} // namespace rdmono
