#include "rdmono/geometry.hpp"

#include "rdmono/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdmono {

NormSpec::NormSpec(NormKind k, std::vector<double> w) : kind(k), weights(std::move(w)) {
    if (weights.empty()) throw InputError("norm weights must be nonempty");
    for (double x : weights) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw InputError("norm weights must be finite and strictly positive");
    }
}

NormSpec NormSpec::unit(std::size_t d, NormKind k) {
    return NormSpec(k, std::vector<double>(d, 1.0));
}

double NormSpec::operator()(std::span<const double> z) const {
    if (z.size() != weights.size())
        throw InputError("norm dimension mismatch: got " + std::to_string(z.size()) +
                         ", expected " + std::to_string(weights.size()));
    double acc = 0.0;
    switch (kind) {
    case NormKind::L1:
        for (std::size_t s = 0; s < z.size(); ++s) acc += weights[s] * std::abs(z[s]);
        return acc;
    case NormKind::L2:
        for (std::size_t s = 0; s < z.size(); ++s) {
            const double t = weights[s] * z[s];
            acc += t * t;
        }
        return std::sqrt(acc);
    case NormKind::Linf:
        for (std::size_t s = 0; s < z.size(); ++s) acc = std::max(acc, weights[s] * std::abs(z[s]));
        return acc;
    }
    return acc;
}

std::string to_string(NormKind kind) {
    switch (kind) {
    case NormKind::L1: return "wl1";
    case NormKind::L2: return "wl2";
    case NormKind::Linf: return "wlinf";
    }
    return "wl1";
}

NormKind norm_kind_from_string(const std::string& s) {
    if (s == "wl1" || s == "l1") return NormKind::L1;
    if (s == "wl2" || s == "l2") return NormKind::L2;
    if (s == "wlinf" || s == "linf") return NormKind::Linf;
    throw InputError("unknown norm kind '" + s + "' (expected wl1, wl2 or wlinf)");
}

MonotoneSet::MonotoneSet(std::size_t d, std::vector<std::size_t> indices)
    : mask_(d, false), indices_(std::move(indices)) {
    for (std::size_t s : indices_) {
        if (s >= d)
            throw InputError("monotone index " + std::to_string(s + 1) + " outside 1.." +
                             std::to_string(d));
        if (mask_[s]) throw InputError("duplicate monotone index " + std::to_string(s + 1));
        mask_[s] = true;
    }
    std::sort(indices_.begin(), indices_.end());
}

MonotoneSet MonotoneSet::full(std::size_t d) {
    std::vector<std::size_t> idx(d);
    for (std::size_t s = 0; s < d; ++s) idx[s] = s;
    return MonotoneSet(d, std::move(idx));
}

MonotoneSet MonotoneSet::none(std::size_t d) { return MonotoneSet(d, {}); }

bool MonotoneSet::is_full() const { return indices_.size() == mask_.size(); }

std::vector<double> pos_part(std::span<const double> z, const MonotoneSet& v) {
    if (z.size() != v.dim()) throw InputError("pos_part: dimension mismatch");
    std::vector<double> out(z.begin(), z.end());
    for (std::size_t s : v.indices()) out[s] = std::max(out[s], 0.0);
    return out;
}

std::vector<double> neg_part(std::span<const double> z, const MonotoneSet& v) {
    if (z.size() != v.dim()) throw InputError("neg_part: dimension mismatch");
    std::vector<double> out(z.begin(), z.end());
    for (std::size_t s : v.indices()) out[s] = std::min(out[s], 0.0);
    return out;
}

PartNorms part_norms(std::span<const double> z, const MonotoneSet& v, const NormSpec& norm) {
    const auto p = pos_part(z, v);
    const auto m = neg_part(z, v);
    return {norm(p), norm(m)};
}

double scaled_cost(const PartNorms& p, double c_plus, double c_minus) {
    double out = 0.0;
    if (p.plus != 0.0) out += c_plus * p.plus;
    if (p.minus != 0.0) out += c_minus * p.minus;
    return out;
}

double cost(std::span<const double> x, double c1, double c2, const MonotoneSet& v,
            const NormSpec& norm) {
    if (c1 < 0.0 || c2 < 0.0) throw InputError("cost: Lipschitz constants must be nonnegative");
    return scaled_cost(part_norms(x, v, norm), c1, c2);
}

} // namespace rdmono
