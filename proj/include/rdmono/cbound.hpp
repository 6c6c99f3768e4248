#pragma once

#include "rdmono/design.hpp"

#include <string>
#include <vector>

namespace rdmono {

struct SideBound {
    double mu = 0.0;
    std::size_t n = 0;
    double split = 0.0;      // 1-D: the count-median threshold
    bool dropped_median = false;
    std::size_t pairs = 0;   // n-D: dominance pairs used
    std::size_t skipped = 0; // n-D: candidate pairs without dominance
};

struct CBoundReport {
    SideBound treated, control;
    std::string method;  // "median-split" or "sum-sort pairing"
    double suggested_c_lo() const { return std::max(treated.mu, control.mu); }
    std::vector<std::string> notes;
};

/// Per arm: the upper half (by x) minus the lower half, in mean y over mean x.
/// An odd arm drops its median point.
SideBound median_split_bound(std::span<const double> x, std::span<const double> y);

/// Per arm: sort by coordinate sum and pair the i-th lowest with the i-th
/// highest, keeping pairs where the higher point dominates componentwise.
/// Returns sum of y differences over sum of norm distances.
SideBound pairing_bound(std::size_t d, std::span<const double> x, std::span<const double> y, const NormSpec& norm);

/// `data` must be preprocessed (increasing in every coordinate of V).
CBoundReport c_lower_bound(const Dataset& data, const FunctionSpace& space);

} // namespace rdmono
