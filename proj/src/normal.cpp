#include "rdmono/normal.hpp"

#include "rdmono/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>

namespace rdmono {

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile needs p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double cv_alpha(double t, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("cv_alpha needs a finite t >= 0");
    // P(|N(t,1)| > c) = sf(c - t) + sf(c + t), decreasing in c.
    auto excess = [&](double c) { return norm_sf(c - t) + norm_sf(c + t) - alpha; };
    double lo = t + norm_quantile(1.0 - alpha);
    double hi = t + norm_quantile(1.0 - alpha / 2.0);
    if (excess(hi) > 0.0) hi += 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (excess(mid) > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace rdmono
