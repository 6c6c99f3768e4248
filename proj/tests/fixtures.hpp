#pragma once

#include "rdmono/design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace fixture {

inline rdmono::Dataset f4() {
    rdmono::Dataset d;
    d.d = 1;
    d.x = {-0.6, -0.1, 0.2, 0.7};
    d.y = {0.3, 1.1, -0.2, 0.4};
    d.treated = {1, 1, 0, 0};
    d.sigma = std::vector<double>{1.0, 0.5, 0.8, 1.5};
    return d;
}

inline rdmono::Sides sides_of(const rdmono::Dataset& d, const rdmono::FunctionSpace& fs) {
    return rdmono::split_sides(d, fs, rdmono::known_sigma2(d));
}

inline rdmono::Sides sides_of(const rdmono::Dataset& d) {
    return sides_of(d, rdmono::FunctionSpace::defaults(d.d, 1.0));
}

/// One cost-0 observation per arm with unit variance.
inline rdmono::Dataset single_pair() {
    rdmono::Dataset d;
    d.d = 1;
    d.x = {0.0, 0.0};
    d.y = {1.0, 0.0};
    d.treated = {1, 0};
    d.sigma = std::vector<double>{1.0, 1.0};
    return d;
}

/// d = 1 uniform design on [-1, 1], treated iff x < 0, with y = noise * sigma.
inline rdmono::Dataset uniform_design(std::size_t n, unsigned seed, double sigma = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    rdmono::Dataset d;
    d.d = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = u(rng);
        d.x.push_back(x);
        d.y.push_back(sigma * z(rng));
        d.treated.push_back(x < 0.0 ? 1 : 0);
    }
    d.sigma = std::vector<double>(n, sigma);
    return d;
}

/// Direct sum_i w_i [b - c_i]_+^2 and a bisection for its inverse.
inline double sq_sum(const std::vector<double>& c, const std::vector<double>& w, double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double t = std::max(b - c[i], 0.0);
        acc += w[i] * t * t;
    }
    return acc;
}

inline double omega_bisect(const std::vector<double>& c, const std::vector<double>& w, double delta) {
    double lo = *std::min_element(c.begin(), c.end());
    double hi = *std::max_element(c.begin(), c.end()) + delta / std::sqrt(*std::min_element(w.begin(), w.end())) + 1.0;
    while (hi - lo > 1e-13) {
        const double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        if (sq_sum(c, w, m) < delta * delta) lo = m; else hi = m;
    }
    return 0.5 * (lo + hi);
}

} // namespace fixture
