#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rdmono {

enum class NormKind { L1, L2, Linf };

/// Weighted l1 / l2 / linf norm on R^d. Every supported norm is
/// nondecreasing in each |z_s| and positively homogeneous.
struct NormSpec {
    NormKind kind = NormKind::L1;
    std::vector<double> weights;

    NormSpec() = default;
    NormSpec(NormKind k, std::vector<double> w);

    static NormSpec unit(std::size_t d, NormKind k = NormKind::L1);

    std::size_t dim() const { return weights.size(); }
    double operator()(std::span<const double> z) const;
};

std::string to_string(NormKind kind);
NormKind norm_kind_from_string(const std::string& s);

/// Coordinates along which the regression function is nondecreasing.
/// Indices are zero-based internally.
class MonotoneSet {
public:
    MonotoneSet() = default;
    MonotoneSet(std::size_t d, std::vector<std::size_t> indices);

    static MonotoneSet full(std::size_t d);
    static MonotoneSet none(std::size_t d);

    std::size_t dim() const { return mask_.size(); }
    bool contains(std::size_t s) const { return mask_.at(s); }
    bool is_full() const;
    bool empty() const { return indices_.empty(); }
    const std::vector<std::size_t>& indices() const { return indices_; }

private:
    std::vector<bool> mask_;
    std::vector<std::size_t> indices_;
};

/// Component s is max(z_s, 0) for s in V, z_s otherwise.
std::vector<double> pos_part(std::span<const double> z, const MonotoneSet& v);
/// -pos_part(-z, V).
std::vector<double> neg_part(std::span<const double> z, const MonotoneSet& v);

/// Norms of the two signed parts, the quantities every cost and kernel
/// formula consumes.
struct PartNorms {
    double plus = 0.0;
    double minus = 0.0;
};

PartNorms part_norms(std::span<const double> z, const MonotoneSet& v, const NormSpec& norm);

/// c_plus * ||z_{V+}|| + c_minus * ||z_{V-}||. A constant of +inf only
/// contributes when its part is nonzero.
double scaled_cost(const PartNorms& p, double c_plus, double c_minus);

double cost(std::span<const double> x, double c1, double c2, const MonotoneSet& v,
            const NormSpec& norm);

} // namespace rdmono
