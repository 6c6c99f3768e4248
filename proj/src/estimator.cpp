#include "rdmono/estimator.hpp"

#include "rdmono/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdmono {

namespace {

double part_ratio(double part, double h) {
    if (part == 0.0) return 0.0;
    if (h == 0.0) return kInf;
    return part / h;
}

double signed_cost(const PartNorms& p, double c_plus, double c_minus) {
    double out = 0.0;
    if (p.plus != 0.0) out += c_plus * p.plus;
    if (p.minus != 0.0) out -= c_minus * p.minus;
    return out;
}

} // namespace

Bandwidth Bandwidth::from_omega(double omega, double c_plus, double c_minus) {
    auto div = [&](double c) { return c == 0.0 ? kInf : omega / c; };
    return {div(c_plus), div(c_minus)};
}

double kernel(const PartNorms& p, const Bandwidth& h) {
    if (h.plus < 0.0 || h.minus < 0.0) throw InputError("bandwidths must be nonnegative");
    const double u = part_ratio(p.plus, h.plus) + part_ratio(p.minus, h.minus);
    return u < 1.0 ? 1.0 - u : 0.0;
}

double kernel(std::span<const double> z, const Bandwidth& h, const MonotoneSet& V, const NormSpec& norm) {
    return kernel(part_norms(z, V, norm), h);
}

SideFit nw_point(const Side& side, const Bandwidth& h, const std::string& label) {
    SideFit fit;
    const std::size_t n = side.size();
    fit.kernel.resize(n);
    fit.weights.resize(n);
    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = kernel(side.parts[i], h);
        fit.kernel[i] = k;
        const double kw = k / side.sigma2[i];
        fit.kernel_sum += kw;
        num += kw * side.y[i];
    }
    if (!(fit.kernel_sum > 0.0)) {
        std::ostringstream os;
        os << "empty effective sample on " << label << " side at bandwidth (" << h.plus << ", " << h.minus << ")";
        throw NumericError(os.str());
    }
    for (std::size_t i = 0; i < n; ++i) fit.weights[i] = fit.kernel[i] / side.sigma2[i] / fit.kernel_sum;
    fit.value = num / fit.kernel_sum;
    return fit;
}

double weighted_cost(const Side& side, const SideFit& fit, double c_plus, double c_minus) {
    double acc = 0.0;
    for (std::size_t i = 0; i < side.size(); ++i)
        if (fit.weights[i] > 0.0) acc += fit.weights[i] * scaled_cost(side.parts[i], c_plus, c_minus);
    return acc;
}

double centering_a(const Side& side, const SideFit& fit, double c1, double c2) {
    double acc = 0.0;
    for (std::size_t i = 0; i < side.size(); ++i)
        if (fit.weights[i] > 0.0) acc += fit.weights[i] * signed_cost(side.parts[i], c1, c2);
    return 0.5 * acc;
}

double sd_s(double delta, double omega_t, double kernel_sum_t) {
    if (!(omega_t > 0.0) || !(kernel_sum_t > 0.0)) throw NumericError("sd_s needs positive omega and kernel mass");
    return (delta / omega_t) / kernel_sum_t;
}

double weight_variance(const Side& side, const SideFit& fit) { return weight_covariance(side, fit, fit); }

double weight_covariance(const Side& side, const SideFit& a, const SideFit& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < side.size(); ++i) acc += a.weights[i] * b.weights[i] * side.sd_sigma2[i];
    return acc;
}

double direct_sd(const Side& t, const SideFit& ft, const Side& c, const SideFit& fc) {
    return std::sqrt(weight_variance(t, ft) + weight_variance(c, fc));
}

double kernel_sq_sum(const Side& side, const SideFit& fit) {
    double acc = 0.0;
    for (std::size_t i = 0; i < side.size(); ++i) acc += fit.kernel[i] * fit.kernel[i] / side.sigma2[i];
    return acc;
}

} // namespace rdmono
