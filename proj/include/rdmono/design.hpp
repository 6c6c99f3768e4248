#pragma once

#include "rdmono/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdmono {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Observations (x_i, y_i) with x stored row-major (n x d).
struct Dataset {
    std::size_t d = 1;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<std::uint8_t> treated;  // empty until materialized
    std::optional<std::vector<double>> sigma;

    std::size_t n() const { return y.size(); }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * d, d}; }
    bool has_treated() const { return !treated.empty(); }
    std::size_t count_treated() const;

    /// Shape checks; `require_both_sides` additionally demands a nonempty
    /// treated and control group.
    void validate(bool require_both_sides = true) const;
};

enum class RuleKind { Column, MRO, MRA, WAV };
enum class Direction { BelowTreated, AboveTreated };

/// How treatment status follows from the running variables. "Below" is the
/// strict side: BelowTreated treats x < c, AboveTreated treats x >= c, so an
/// observation exactly on a cutoff always lands on the non-strict side.
struct TreatmentRule {
    RuleKind kind = RuleKind::Column;
    std::vector<double> cutoffs;
    Direction direction = Direction::BelowTreated;
    std::vector<double> wav_weights;

    void validate(std::size_t d) const;
    bool treats(std::span<const double> x) const;
    /// True when some coordinate (or the WAV index) sits exactly on its cutoff.
    bool on_boundary(std::span<const double> x) const;
};

struct FunctionSpace {
    double C = 1.0;  // may be +inf
    MonotoneSet V;
    std::vector<std::size_t> decreasing;  // zero-based, subset of V
    NormSpec norm;

    static FunctionSpace defaults(std::size_t d, double C);
    std::size_t dim() const { return norm.dim(); }
    void validate() const;
};

/// Shift the evaluation point to the origin, materialize treatment flags,
/// and flip decreasing coordinates so every monotone direction is
/// increasing. Boundary ties are reported through `log` when given.
Dataset preprocess(const Dataset& raw, const TreatmentRule& rule, const FunctionSpace& space,
                   std::span<const double> cutoff_point, std::vector<std::string>* log = nullptr);

/// (x, y) -> (-x, -y). Maps an increasing class onto itself and negates the
/// RD parameter; used to build upper CIs from the lower-CI machinery.
Dataset reflect(const Dataset& data);

/// One treatment arm with the per-observation quantities the solvers need.
struct Side {
    std::size_t d = 1;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma2;     // drives kernel weights and bandwidths
    std::vector<double> sd_sigma2;  // drives the reported sd (equals sigma2 unless estimated)
    std::vector<PartNorms> parts;
    std::vector<std::size_t> index;  // position in the source dataset

    std::size_t size() const { return y.size(); }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * d, d}; }
};

struct Sides {
    Side treated;
    Side control;
};

/// Split into arms. `sigma2` (length n) sets the weights; `sd_sigma2`, when
/// nonempty, replaces it in standard-error computations.
Sides split_sides(const Dataset& data, const FunctionSpace& space, std::span<const double> sigma2,
                  std::span<const double> sd_sigma2 = {});

/// Variances from the dataset's sigma column; throws if absent.
std::vector<double> known_sigma2(const Dataset& data);

} // namespace rdmono
