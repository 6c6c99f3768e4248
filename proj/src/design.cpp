#include "rdmono/design.hpp"

#include "rdmono/error.hpp"

#include <algorithm>
#include <cmath>

namespace rdmono {

std::size_t Dataset::count_treated() const {
    return static_cast<std::size_t>(std::count(treated.begin(), treated.end(), std::uint8_t{1}));
}

void Dataset::validate(bool require_both_sides) const {
    if (d == 0) throw InputError("dataset dimension must be at least 1");
    if (y.empty()) throw InputError("dataset is empty");
    if (x.size() != y.size() * d)
        throw InputError("x has " + std::to_string(x.size()) + " values, expected n*d = " +
                         std::to_string(y.size() * d));
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i])) throw InputError("non-finite running variable at row " + std::to_string(i / d + 1));
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!std::isfinite(y[i])) throw InputError("non-finite outcome at row " + std::to_string(i + 1));
    if (!treated.empty() && treated.size() != y.size())
        throw InputError("treated column length does not match outcomes");
    if (sigma) {
        if (sigma->size() != y.size()) throw InputError("sigma column length does not match outcomes");
        for (std::size_t i = 0; i < sigma->size(); ++i)
            if (!((*sigma)[i] > 0.0) || !std::isfinite((*sigma)[i]))
                throw InputError("sigma must be finite and strictly positive (row " +
                                 std::to_string(i + 1) + ")");
    }
    if (require_both_sides) {
        if (treated.empty()) throw InputError("treatment status has not been materialized");
        const auto nt = count_treated();
        if (nt == 0) throw InputError("no treated observations");
        if (nt == y.size()) throw InputError("no control observations");
    }
}

void TreatmentRule::validate(std::size_t d) const {
    if (kind == RuleKind::Column) return;
    if (cutoffs.size() != d)
        throw InputError("treatment rule needs " + std::to_string(d) + " cutoffs, got " +
                         std::to_string(cutoffs.size()));
    if (kind == RuleKind::WAV) {
        if (wav_weights.size() != d) throw InputError("WAV rule needs one positive weight per coordinate");
        for (double w : wav_weights)
            if (!(w > 0.0)) throw InputError("WAV weights must be strictly positive");
    }
}

bool TreatmentRule::treats(std::span<const double> x) const {
    const bool below = direction == Direction::BelowTreated;
    auto hit = [&](double z) { return below ? z < 0.0 : z >= 0.0; };
    switch (kind) {
    case RuleKind::Column:
        throw InputError("column rule cannot derive treatment status");
    case RuleKind::MRO:
        for (std::size_t s = 0; s < x.size(); ++s)
            if (hit(x[s] - cutoffs[s])) return true;
        return false;
    case RuleKind::MRA:
        for (std::size_t s = 0; s < x.size(); ++s)
            if (!hit(x[s] - cutoffs[s])) return false;
        return true;
    case RuleKind::WAV: {
        double idx = 0.0;
        for (std::size_t s = 0; s < x.size(); ++s) idx += wav_weights[s] * (x[s] - cutoffs[s]);
        return hit(idx);
    }
    }
    return false;
}

bool TreatmentRule::on_boundary(std::span<const double> x) const {
    if (kind == RuleKind::Column) return false;
    if (kind == RuleKind::WAV) {
        double idx = 0.0;
        for (std::size_t s = 0; s < x.size(); ++s) idx += wav_weights[s] * (x[s] - cutoffs[s]);
        return idx == 0.0;
    }
    for (std::size_t s = 0; s < x.size(); ++s)
        if (x[s] == cutoffs[s]) return true;
    return false;
}

FunctionSpace FunctionSpace::defaults(std::size_t d, double C) {
    FunctionSpace fs;
    fs.C = C;
    fs.V = MonotoneSet::full(d);
    fs.norm = NormSpec::unit(d);
    return fs;
}

void FunctionSpace::validate() const {
    if (!(C > 0.0)) throw InputError("Lipschitz constant C must be positive");
    if (V.dim() != norm.dim()) throw InputError("monotone set and norm disagree on dimension");
    for (std::size_t s : decreasing) {
        if (s >= V.dim() || !V.contains(s))
            throw InputError("decreasing coordinate " + std::to_string(s + 1) +
                             " is not in the monotone set");
    }
}

Dataset preprocess(const Dataset& raw, const TreatmentRule& rule, const FunctionSpace& space,
                   std::span<const double> cutoff_point, std::vector<std::string>* log) {
    raw.validate(false);
    space.validate();
    const std::size_t d = raw.d;
    if (space.dim() != d)
        throw InputError("function space dimension " + std::to_string(space.dim()) +
                         " does not match data dimension " + std::to_string(d));
    if (cutoff_point.size() != d)
        throw InputError("cutoff point must have " + std::to_string(d) + " coordinates");
    rule.validate(d);

    Dataset out = raw;
    if (rule.kind == RuleKind::Column) {
        if (!raw.has_treated()) throw InputError("no treated column and no treatment rule given");
    } else {
        std::vector<std::uint8_t> flags(raw.n());
        std::size_t ties = 0;
        for (std::size_t i = 0; i < raw.n(); ++i) {
            flags[i] = rule.treats(raw.row(i)) ? 1 : 0;
            if (rule.on_boundary(raw.row(i))) ++ties;
        }
        if (raw.has_treated()) {
            for (std::size_t i = 0; i < raw.n(); ++i)
                if (flags[i] != raw.treated[i])
                    throw InputError("treated column conflicts with treatment rule at row " +
                                     std::to_string(i + 1));
        }
        if (ties > 0 && log)
            log->push_back(std::to_string(ties) +
                           " observation(s) on a cutoff assigned to the non-strict side");
        out.treated = std::move(flags);
    }

    for (std::size_t i = 0; i < out.n(); ++i)
        for (std::size_t s = 0; s < d; ++s) out.x[i * d + s] -= cutoff_point[s];
    for (std::size_t s : space.decreasing)
        for (std::size_t i = 0; i < out.n(); ++i) out.x[i * d + s] = -out.x[i * d + s];

    out.validate(true);
    return out;
}

Dataset reflect(const Dataset& data) {
    Dataset out = data;
    for (double& v : out.x) v = -v;
    for (double& v : out.y) v = -v;
    return out;
}

Sides split_sides(const Dataset& data, const FunctionSpace& space, std::span<const double> sigma2,
                  std::span<const double> sd_sigma2) {
    data.validate(true);
    if (sigma2.size() != data.n()) throw InputError("variance vector length does not match data");
    if (sd_sigma2.empty()) sd_sigma2 = sigma2;
    if (sd_sigma2.size() != data.n()) throw InputError("sd variance vector length does not match data");
    Sides out;
    out.treated.d = out.control.d = data.d;
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (!(sigma2[i] > 0.0) || !std::isfinite(sigma2[i]))
            throw InputError("conditional variance must be positive at row " + std::to_string(i + 1));
        Side& s = data.treated[i] ? out.treated : out.control;
        const auto r = data.row(i);
        s.x.insert(s.x.end(), r.begin(), r.end());
        s.y.push_back(data.y[i]);
        s.sigma2.push_back(sigma2[i]);
        if (!(sd_sigma2[i] >= 0.0) || !std::isfinite(sd_sigma2[i]))
            throw InputError("sd variance must be finite and nonnegative at row " + std::to_string(i + 1));
        s.sd_sigma2.push_back(sd_sigma2[i]);
        s.parts.push_back(part_norms(r, space.V, space.norm));
        s.index.push_back(i);
    }
    return out;
}

std::vector<double> known_sigma2(const Dataset& data) {
    if (!data.sigma) throw InputError("known-variance mode requires a sigma column");
    std::vector<double> out(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) out[i] = (*data.sigma)[i] * (*data.sigma)[i];
    return out;
}

} // namespace rdmono
