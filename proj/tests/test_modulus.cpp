#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"
#include "rdmono/error.hpp"
#include "rdmono/modulus.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace rdmono;

namespace {

SideProblem random_side(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> uc(0.0, 2.0), uw(0.2, 5.0);
    SideProblem p;
    for (std::size_t i = 0; i < n; ++i) {
        p.costs.push_back(uc(rng));
        p.inv_var.push_back(uw(rng));
    }
    // Repeat a cost now and then to exercise ties.
    if (n > 3) p.costs[1] = p.costs[0];
    return p;
}

// Brute-force split: best theta on a 1e-4 grid of the quarter circle.
double grid_theta(const SideProblem& t, const SideProblem& c, double delta, double* best_value) {
    double best = -1.0, arg = 0.0;
    for (double th = 0.0; th <= std::numbers::pi / 2 + 1e-12; th += 1e-4) {
        const double v = fixture::omega_bisect(t.costs, t.inv_var, delta * std::sin(th)) +
                         fixture::omega_bisect(c.costs, c.inv_var, delta * std::cos(th));
        if (v > best) { best = v; arg = th; }
    }
    *best_value = best;
    return arg;
}

} // namespace

TEST_CASE("omega_side worked values") {
    CHECK(omega_side({{0.0}, {1.0}}, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(omega_side({{0.3, 0.7}, {1.0, 2.0}}, 0.0) == 0.3);
    // Frozen from bisection on the monotone sum: (1 + sqrt 7) / 4.
    CHECK(omega_side({{0.0, 0.5}, {1.0, 1.0}}, 1.0) == doctest::Approx(0.911437827766148).epsilon(1e-12));
    CHECK_THROWS_AS(omega_side({{}, {}}, 1.0), InputError);
}

TEST_CASE("closed form matches bisection on 200 random instances") {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> un(1, 40);
    std::uniform_real_distribution<double> ud(0.0, 6.0);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto p = random_side(rng, static_cast<std::size_t>(un(rng)));
        const double delta = ud(rng);
        const double a = omega_side(p, delta);
        const double b = fixture::omega_bisect(p.costs, p.inv_var, delta);
        worst = std::max(worst, std::abs(a - b));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("omega_side is increasing and concave in delta") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        const SideSolver s(random_side(rng, 25));
        double prev = s.omega(0.0);
        for (double d = 0.1; d < 5.0; d += 0.1) {
            const double cur = s.omega(d);
            CHECK(cur > prev);
            const double second = s.omega(d + 0.1) - 2.0 * cur + s.omega(d - 0.1);
            CHECK(second <= 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("larger costs need larger b") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        auto p = random_side(rng, 15);
        auto q = p;
        for (double& c : q.costs) c *= 1.3;
        CHECK(omega_side(q, 1.2) >= omega_side(p, 1.2));
    }
}

TEST_CASE("symmetric split and single-point split") {
    SideProblem p{{0.1, 0.4, 0.9}, {1.0, 2.0, 0.5}};
    const auto sol = optimal_split(p, p, 2.0);
    CHECK(sol.delta_t == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sol.delta_c == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(1e-12));

    SideProblem one{{0.0}, {1.0}};
    const auto s1 = optimal_split(one, one, 1.0);
    CHECK(s1.omega_t == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(s1.omega() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // omega(delta) = sqrt(2) delta here, so omega' = sqrt(2).
    CHECK(s1.omega_prime == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("F4 split matches the grid oracle and both omega' forms agree") {
    const auto sides = fixture::sides_of(fixture::f4());
    for (double C : {0.5, 1.0, 3.0}) {
        const auto prob = make_modulus_problem(sides, C, C);
        for (double delta : {0.3, 1.0, 2.5}) {
            const auto sol = optimal_split(prob.treated, prob.control, delta);
            double best = 0.0;
            const double th = grid_theta(prob.treated, prob.control, delta, &best);
            CHECK(std::abs(std::atan2(sol.delta_t, sol.delta_c) - th) <= 2e-4);
            CHECK(sol.omega() >= best - 1e-12);
            CHECK(sol.omega() - best <= 1e-6);
            CHECK(std::abs(delta / sol.mass_t - delta / sol.mass_c) <= 1e-6);
            CHECK(sol.delta_t * sol.delta_t + sol.delta_c * sol.delta_c == doctest::Approx(delta * delta));
        }
    }
}

TEST_CASE("omega' matches the centered finite difference") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 40; ++rep) {
        const SideSolver t(random_side(rng, 30)), c(random_side(rng, 30));
        const double delta = 0.5 + rep * 0.1, h = 1e-5;
        const auto sol = optimal_split(t, c, delta);
        const double fd = (optimal_split(t, c, delta + h).omega() - optimal_split(t, c, delta - h).omega()) / (2 * h);
        CHECK(sol.omega_prime == doctest::Approx(fd).epsilon(1e-4));
        // Concavity of the full modulus.
        const double s2 = optimal_split(t, c, delta + 0.05).omega() - 2 * sol.omega() +
                          optimal_split(t, c, delta - 0.05).omega();
        CHECK(s2 <= 1e-10);
    }
}

TEST_CASE("scaling sigma by 2 doubles omega' at the same omega") {
    auto d = fixture::f4();
    const auto base = fixture::sides_of(d);
    for (double& s : *d.sigma) s *= 2.0;
    const auto scaled = fixture::sides_of(d);
    const auto a = solve_modulus(base, 1.0, 1.0, 1.0);
    // Same bandwidths need half the standardized distance.
    const auto b = solve_modulus(scaled, 1.0, 1.0, 0.5);
    CHECK(b.omega() == doctest::Approx(a.omega()).epsilon(1e-10));
    CHECK(b.omega_prime == doctest::Approx(2.0 * a.omega_prime).epsilon(1e-8));
}

TEST_CASE("degenerate delta = 0 and infinite constants") {
    const auto sides = fixture::sides_of(fixture::f4());
    const auto z = solve_modulus(sides, 1.0, 1.0, 0.0);
    CHECK(z.omega_t == doctest::Approx(0.1));
    CHECK(z.omega_c == doctest::Approx(0.2));
    // Only the nearest point on each side carries weight as delta -> 0.
    CHECK(z.omega_prime == doctest::Approx(std::sqrt(0.25 + 0.64)));
    const auto near = solve_modulus(sides, 1.0, 1.0, 1e-7);
    CHECK(near.omega_prime == doctest::Approx(z.omega_prime).epsilon(1e-6));

    // With an infinite V+ constant the treated arm (all x < 0) is unaffected,
    // and the control arm keeps only its finite-cost points.
    const double inf = std::numeric_limits<double>::infinity();
    const auto p = make_modulus_problem(sides, inf, 2.0);
    CHECK(p.treated.costs.size() == 2);
    CHECK(p.control.costs.size() == 2);
    const auto q = make_modulus_problem(sides, 2.0, inf);
    CHECK(q.treated.costs.empty());
    CHECK_THROWS_AS(optimal_split(q.treated, q.control, 1.0), InputError);
}
