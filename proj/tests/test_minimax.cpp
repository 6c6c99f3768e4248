#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"
#include "rdmono/error.hpp"
#include "rdmono/minimax.hpp"
#include "rdmono/normal.hpp"

#include <cmath>

using namespace rdmono;

namespace {

// Independent CDF-root oracle for cv_alpha using the plain CDF.
double cv_oracle(double t, double alpha) {
    auto f = [&](double c) { return norm_cdf(c - t) - norm_cdf(-c - t) - (1.0 - alpha); };
    double lo = 0.0, hi = t + 20.0;
    for (int i = 0; i < 300; ++i) {
        const double m = 0.5 * (lo + hi);
        (f(m) < 0.0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("cv_alpha") {
    CHECK(cv_alpha(0.0, 0.05) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(std::abs(cv_alpha(10.0, 0.05) - 11.644854) <= 1e-6);
    for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 7.5}) {
        for (double a : {0.01, 0.05, 0.1, 0.3}) CHECK(std::abs(cv_alpha(t, a) - cv_oracle(t, a)) <= 1e-8);
    }
    double prev = 0.0;
    for (double t = 0.0; t < 6.0; t += 0.25) {
        const double c = cv_alpha(t, 0.05);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK_THROWS_AS(cv_alpha(-1.0, 0.05), InputError);
}

TEST_CASE("zero-bias design") {
    const auto sides = fixture::sides_of(fixture::single_pair());
    const double z = norm_quantile(0.975);
    const auto p = minimax_at(sides, 1.0, z, 0.05);
    CHECK(std::abs(p.worst_bias) <= 1e-12);
    CHECK(p.chi == doctest::Approx(z * p.sd));
    CHECK(p.estimate == doctest::Approx(1.0));
}

TEST_CASE("bias balance and formula identities on random designs") {
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto sides = fixture::sides_of(fixture::uniform_design(80, seed, 0.7));
        for (double C : {0.5, 2.0}) {
            for (double delta : {0.5, 1.5, 3.0}) {
                const auto p = minimax_at(sides, C, delta, 0.05);
                const auto b = bias_bounds(sides, p.fit_t, p.fit_c, C, p.a_t, p.a_c);
                CHECK(std::abs(b.first + b.second) <= 1e-8);
                CHECK(std::abs(p.worst_bias - p.worst_bias_formula) <= 1e-8);
                CHECK(std::abs(p.sd - p.modulus.omega_prime) <= 1e-8);
            }
        }
    }
}

TEST_CASE("F4 minimax CI against a brute-force delta oracle") {
    const auto sides = fixture::sides_of(fixture::f4());
    const auto ci = minimax_ci(sides, 1.0, 0.05);
    double best = 1e300;
    for (double d = 1e-3; d <= 20.0; d += 1e-3) best = std::min(best, minimax_at(sides, 1.0, d, 0.05).chi);
    CHECK(ci.half_length <= best + 1e-9);
    CHECK(best - ci.half_length <= 1e-6);
    CHECK(ci.local_min_verified);
    CHECK(ci.lower == doctest::Approx(ci.at.estimate - ci.half_length));
}

TEST_CASE("constant outcomes: estimate free of the level, CI covers zero") {
    auto d = fixture::uniform_design(60, 5);
    for (double& y : d.y) y = 4.2;
    const auto ci = minimax_ci(fixture::sides_of(d), 1.0, 0.05);
    // The estimate is the centering shift a_c - a_t, inside the bias band.
    CHECK(ci.at.estimate == doctest::Approx(ci.at.a_c - ci.at.a_t));
    CHECK(std::abs(ci.at.estimate) <= ci.at.worst_bias + 1e-12);
    CHECK(ci.lower < 0.0);
    CHECK(ci.upper > 0.0);
    for (double& y : d.y) y = -3.0;
    const auto other = minimax_ci(fixture::sides_of(d), 1.0, 0.05);
    CHECK(other.half_length == doctest::Approx(ci.half_length));
    CHECK(other.at.estimate == doctest::Approx(ci.at.estimate));
}

TEST_CASE("sigma scaling at fixed delta") {
    auto d = fixture::f4();
    const auto a = minimax_at(fixture::sides_of(d), 1.0, 1.0, 0.05);
    for (double& s : *d.sigma) s *= 2.0;
    const auto b = minimax_at(fixture::sides_of(d), 1.0, 0.5, 0.05);
    CHECK(b.h_t == doctest::Approx(a.h_t));
    CHECK(b.h_c == doctest::Approx(a.h_c));
    CHECK(b.sd == doctest::Approx(2.0 * a.sd));
}

TEST_CASE("infinite C is rejected") {
    const auto sides = fixture::sides_of(fixture::f4());
    CHECK_THROWS_AS(minimax_ci(sides, kInf, 0.05), InputError);
}

TEST_CASE("gain curve ratios exceed one") {
    const auto d = fixture::uniform_design(200, 17);
    const auto fs = FunctionSpace::defaults(1, 1.0);
    const auto rows = gain_curve(d, fs, known_sigma2(d), {0.5, 1.0, 2.0}, 0.05);
    for (const auto& r : rows) {
        CHECK(r.ratio > 1.0);
        CHECK(r.bw_ratio_t > 1.0);
    }
}
