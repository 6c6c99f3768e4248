#include "rdmono/cbound.hpp"

#include "rdmono/error.hpp"

#include <algorithm>
#include <numeric>

namespace rdmono {

namespace {

const char* arm_name(bool treated) { return treated ? "treated" : "control"; }

void collect(const Dataset& data, bool treated, std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (static_cast<bool>(data.treated[i]) != treated) continue;
        const auto r = data.row(i);
        x.insert(x.end(), r.begin(), r.end());
        y.push_back(data.y[i]);
    }
}

} // namespace

SideBound median_split_bound(std::span<const double> x, std::span<const double> y) {
    SideBound b;
    b.n = y.size();
    if (b.n < 2) throw InputError("C lower bound needs at least 2 observations per side");
    std::vector<std::size_t> ord(b.n);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t c) { return x[a] < x[c]; });
    const std::size_t half = b.n / 2;
    b.dropped_median = b.n % 2 == 1;
    const std::size_t hi_start = half + (b.dropped_median ? 1 : 0);
    double xl = 0, yl = 0, xh = 0, yh = 0;
    for (std::size_t k = 0; k < half; ++k) {
        xl += x[ord[k]];
        yl += y[ord[k]];
        xh += x[ord[hi_start + k]];
        yh += y[ord[hi_start + k]];
    }
    b.split = x[ord[half - 1]];
    const double dx = (xh - xl) / static_cast<double>(half);
    if (!(dx > 0.0)) throw InputError("C lower bound: all x are equal on a side");
    b.mu = (yh - yl) / static_cast<double>(half) / dx;
    b.pairs = half;
    return b;
}

SideBound pairing_bound(std::size_t d, std::span<const double> x, std::span<const double> y, const NormSpec& norm) {
    SideBound b;
    b.n = y.size();
    std::vector<double> sum(b.n, 0.0);
    for (std::size_t i = 0; i < b.n; ++i)
        for (std::size_t k = 0; k < d; ++k) sum[i] += x[i * d + k];
    std::vector<std::size_t> ord(b.n);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t c) { return sum[a] < sum[c]; });
    double dy = 0.0, dist = 0.0;
    std::vector<double> diff(d);
    for (std::size_t k = 0; k < b.n / 2; ++k) {
        const std::size_t lo = ord[k], hi = ord[b.n - 1 - k];
        bool dominates = true;
        for (std::size_t c = 0; c < d; ++c) {
            diff[c] = x[hi * d + c] - x[lo * d + c];
            dominates = dominates && diff[c] >= 0.0;
        }
        const double r = norm(diff);
        if (!dominates || !(r > 0.0)) {
            ++b.skipped;
            continue;
        }
        dy += y[hi] - y[lo];
        dist += r;
        ++b.pairs;
    }
    if (b.pairs < 2) throw InputError("C lower bound: fewer than 2 dominance pairs on a side");
    b.mu = dy / dist;
    return b;
}

CBoundReport c_lower_bound(const Dataset& data, const FunctionSpace& space) {
    if (data.d > 1 && !space.V.is_full()) throw InputError("C lower bound requires monotonicity in every coordinate");
    CBoundReport rep;
    rep.method = data.d == 1 ? "median-split" : "sum-sort pairing";
    for (bool treated : {true, false}) {
        std::vector<double> x, y;
        collect(data, treated, x, y);
        try {
            (treated ? rep.treated : rep.control) =
                data.d == 1 ? median_split_bound(x, y) : pairing_bound(data.d, x, y, space.norm);
        } catch (const InputError& e) {
            throw InputError(std::string(e.what()) + " (" + arm_name(treated) + ")");
        }
        const auto& s = treated ? rep.treated : rep.control;
        if (s.dropped_median)
            rep.notes.push_back(std::string("odd ") + arm_name(treated) + " side: median point dropped");
        if (s.skipped > 0)
            rep.notes.push_back(std::string(arm_name(treated)) + " side: " + std::to_string(s.skipped) +
                                " candidate pairs skipped for lack of dominance");
    }
    if (data.d > 1) rep.notes.push_back("pairing is one admissible choice of dominating subsets");
    return rep;
}

} // namespace rdmono
