#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rdmono/cbound.hpp"
#include "rdmono/error.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace rdmono;

namespace {

Dataset line_design(std::size_t n, unsigned seed, double slope, double noise) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = u(rng);
        d.x.push_back(x);
        d.y.push_back(slope * x + (x >= 0 ? 0.4 : 0.0) + noise * z(rng));
        d.treated.push_back(x < 0 ? 1 : 0);
    }
    return d;
}

struct Best {
    double mu = -1e300;
    std::size_t pairs = 0;
};

// Every set of disjoint dominance pairs with at least 2 pairs.
Best exhaustive(std::size_t d, const std::vector<double>& x, const std::vector<double>& y, const NormSpec& norm) {
    const std::size_t n = y.size();
    Best best;
    std::vector<bool> used(n, false);
    std::vector<double> diff(d);
    std::function<void(std::size_t, double, double, std::size_t)> rec = [&](std::size_t i, double dy, double dist,
                                                                            std::size_t k) {
        while (i < n && used[i]) ++i;
        if (i == n) {
            if (k >= 2 && dy / dist > best.mu) best = {dy / dist, k};
            return;
        }
        used[i] = true;
        rec(i + 1, dy, dist, k);  // leave i unpaired
        for (std::size_t j = i + 1; j < n; ++j) {
            if (used[j]) continue;
            for (int orient = 0; orient < 2; ++orient) {
                const std::size_t lo = orient ? j : i, hi = orient ? i : j;
                bool dom = true;
                for (std::size_t c = 0; c < d; ++c) {
                    diff[c] = x[hi * d + c] - x[lo * d + c];
                    dom = dom && diff[c] >= 0;
                }
                const double r = norm(diff);
                if (!dom || !(r > 0)) continue;
                used[j] = true;
                rec(i + 1, dy + y[hi] - y[lo], dist + r, k + 1);
                used[j] = false;
            }
        }
        used[i] = false;
    };
    rec(0, 0.0, 0.0, 0);
    return best;
}

} // namespace

TEST_CASE("1-D exact recovery and location invariance") {
    auto d = line_design(101, 1, 0.7, 0.0);
    const auto fs = FunctionSpace::defaults(1, 1.0);
    const auto r = c_lower_bound(d, fs);
    CHECK(r.treated.mu == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.control.mu == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.treated.n + r.control.n == 101);
    CHECK((r.treated.dropped_median || r.control.dropped_median));
    CHECK(r.suggested_c_lo() == doctest::Approx(0.7));

    auto n = line_design(200, 2, 0.5, 0.3);
    const auto a = c_lower_bound(n, fs);
    for (double& y : n.y) y += 9.0;
    const auto b = c_lower_bound(n, fs);
    CHECK(a.treated.mu == doctest::Approx(b.treated.mu).epsilon(1e-10));
    CHECK(a.control.mu == doctest::Approx(b.control.mu).epsilon(1e-10));

    for (double& y : n.y) y = 3.0;
    const auto c = c_lower_bound(n, fs);
    CHECK(c.treated.mu == 0.0);
    CHECK(c.control.mu == 0.0);
}

TEST_CASE("1-D median split by hand") {
    const std::vector<double> x{0.4, 0.1, 0.3, 0.2, 0.9};
    const std::vector<double> y{1.0, 0.0, 2.0, 0.5, 7.0};
    const auto b = median_split_bound(x, y);
    // Drop x = 0.3; low {0.1, 0.2}, high {0.4, 0.9}.
    CHECK(b.dropped_median);
    CHECK(b.split == doctest::Approx(0.2));
    CHECK(b.mu == doctest::Approx(((1.0 + 7.0) / 2 - 0.25) / ((0.4 + 0.9) / 2 - 0.15)));
    const std::vector<double> same{1.0, 1.0};
    CHECK_THROWS_AS(median_split_bound(same, same), InputError);
}

TEST_CASE("unbiased for a bound on C") {
    // f(x) = C x^3 has Lipschitz constant 3C on [-1, 1]; here slope C x + jump.
    const double C = 0.8;
    const int reps = 400;
    double s = 0, s2 = 0;
    for (int r = 0; r < reps; ++r) {
        const auto d = line_design(200, 50 + r, C, 1.0);
        const double m = c_lower_bound(d, FunctionSpace::defaults(1, 1.0)).control.mu;
        s += m;
        s2 += m * m;
    }
    const double mean = s / reps, se = std::sqrt((s2 / reps - mean * mean) / reps);
    CHECK(mean <= C + 3 * se);
}

TEST_CASE("n-D pairing against the exhaustive oracle") {
    const NormSpec l1 = NormSpec::unit(2, NormKind::L1);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Linear with l1 slope C: every dominance pair gives exactly C.
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        const double a = u(rng), b = u(rng);
        x.push_back(a);
        x.push_back(b);
        y.push_back(1.5 * (a + b));
    }
    const auto g = pairing_bound(2, x, y, l1);
    const auto o = exhaustive(2, x, y, l1);
    CHECK(g.mu == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(o.mu == doctest::Approx(1.5).epsilon(1e-12));

    // Anisotropic noiseless f with l1 Lipschitz constant 1: the exhaustive
    // best pairing is the tightest bound reachable from these points.
    for (int rep = 0; rep < 5; ++rep) {
        for (double& v : x) v = u(rng);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[2 * i] + 0.5 * x[2 * i + 1];
        const auto ex = exhaustive(2, x, y, l1);
        CHECK(ex.mu <= 1.0 + 1e-12);
        try {
            const auto gr = pairing_bound(2, x, y, l1);
            CHECK(gr.mu <= ex.mu + 1e-12);
            CHECK(gr.mu >= 0.5 - 1e-12);
            MESSAGE("greedy ", gr.mu, " with ", gr.pairs, " pairs; exhaustive best ", ex.mu, "; gap ", ex.mu - gr.mu);
        } catch (const InputError&) {
            MESSAGE("greedy found fewer than 2 dominance pairs; exhaustive best ", ex.mu);
        }
    }

    std::vector<double> c(y.size(), 2.0);
    CHECK(pairing_bound(2, x, c, l1).mu == 0.0);

    // Anti-dominating cloud: no valid pairs.
    const std::vector<double> anti{0, 1, 1, 0, 0.5, 0.5, 0.2, 0.8};
    const std::vector<double> ya{0, 0, 0, 0};
    CHECK_THROWS_AS(pairing_bound(2, anti, ya, l1), InputError);
}

TEST_CASE("n-D requires full monotonicity") {
    Dataset d;
    d.d = 2;
    d.x = {0, 0, 1, 1, 0, 1, 1, 0};
    d.y = {0, 1, 0, 1};
    d.treated = {1, 1, 0, 0};
    auto fs = FunctionSpace::defaults(2, 1.0);
    fs.V = MonotoneSet(2, {0});
    CHECK_THROWS_AS(c_lower_bound(d, fs), InputError);
}
