#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"
#include "rdmono/error.hpp"
#include "rdmono/estimator.hpp"
#include "rdmono/modulus.hpp"

#include <cmath>

using namespace rdmono;

namespace {

Side side1(std::vector<double> x, std::vector<double> y, std::vector<double> sigma, const MonotoneSet& V) {
    Side s;
    s.d = 1;
    const auto N = NormSpec::unit(1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        s.x.push_back(x[i]);
        s.y.push_back(y[i]);
        s.sigma2.push_back(sigma[i] * sigma[i]);
        s.sd_sigma2.push_back(sigma[i] * sigma[i]);
        std::vector<double> z{x[i]};
        s.parts.push_back(part_norms(z, V, N));
        s.index.push_back(i);
    }
    return s;
}

} // namespace

TEST_CASE("kernel values") {
    const auto V1 = MonotoneSet::full(1), V0 = MonotoneSet::none(1);
    const auto N = NormSpec::unit(1);
    std::vector<double> z0{0.0}, z5{0.5}, zm{-1.2}, z4{0.4};
    CHECK(kernel(z0, Bandwidth::scalar(1.0), V1, N) == 1.0);
    CHECK(kernel(z5, Bandwidth::scalar(1.0), V1, N) == doctest::Approx(0.5));
    CHECK(kernel(zm, Bandwidth::scalar(1.0), V1, N) == 0.0);
    CHECK(kernel(z4, Bandwidth::scalar(1.0), V0, N) == doctest::Approx(0.2));
    // Half-width relation between the two d = 1 kernels.
    for (double z = -1.0; z <= 1.0; z += 0.05) {
        std::vector<double> a{z}, b{2.0 * z};
        CHECK(kernel(a, Bandwidth::scalar(1.0), V0, N) == doctest::Approx(kernel(b, Bandwidth::scalar(1.0), V1, N)));
    }
    // Infinite and zero bandwidths.
    CHECK(kernel(z5, {0.0, 1.0}, V1, N) == 0.0);
    CHECK(kernel(zm, {0.0, 2.0}, V1, N) == doctest::Approx(0.4));
    CHECK(kernel(z5, {kInf, 1.0}, V1, N) == 1.0);
}

TEST_CASE("Nadaraya-Watson fits") {
    const auto V1 = MonotoneSet::full(1), V0 = MonotoneSet::none(1);
    auto one = side1({0.0}, {3.0}, {1.0}, V1);
    auto f = nw_point(one, Bandwidth::scalar(1.0));
    CHECK(f.value == 3.0);
    CHECK(f.weights[0] == 1.0);

    auto sym = side1({-0.5, 0.5}, {0.0, 2.0}, {1.0, 1.0}, V0);
    CHECK(nw_point(sym, Bandwidth::scalar(2.0)).value == doctest::Approx(1.0));

    auto het = side1({0.1, -0.1}, {0.0, 5.0}, {1.0, 2.0}, V0);
    CHECK(nw_point(het, Bandwidth::scalar(1.0)).value == doctest::Approx(1.0));

    auto far = side1({0.9}, {1.0}, {1.0}, V1);
    CHECK_THROWS_AS(nw_point(far, Bandwidth::scalar(0.5), "control"), NumericError);
}

TEST_CASE("location equivariance and support") {
    const auto V1 = MonotoneSet::full(1);
    auto s = side1({-0.2, -0.5, -0.9}, {1.0, 2.0, 4.0}, {1.0, 0.5, 2.0}, V1);
    const auto a = nw_point(s, Bandwidth::scalar(0.6));
    for (double& y : s.y) y += 7.0;
    const auto b = nw_point(s, Bandwidth::scalar(0.6));
    CHECK(b.value == doctest::Approx(a.value + 7.0));
    CHECK(a.weights == b.weights);
    CHECK(a.weights[2] == 0.0);
}

TEST_CASE("centering term") {
    const auto V1 = MonotoneSet::full(1);
    auto s0 = side1({0.0}, {0.0}, {1.0}, V1);
    CHECK(centering_a(s0, nw_point(s0, Bandwidth::scalar(1.0)), 1.0, 1.0) == 0.0);
    auto s1 = side1({-0.5}, {0.0}, {1.0}, V1);
    CHECK(centering_a(s1, nw_point(s1, Bandwidth::scalar(1.0)), 1.0, 1.0) == doctest::Approx(-0.25));
    auto m = side1({-0.3, 0.3, -0.6, 0.6}, {0, 0, 0, 0}, {1, 1, 1, 1}, V1);
    CHECK(centering_a(m, nw_point(m, Bandwidth::scalar(1.0)), 2.0, 2.0) == doctest::Approx(0.0));
}

TEST_CASE("kernel-sum identity and sd forms on F4") {
    const auto sides = fixture::sides_of(fixture::f4());
    for (double C : {0.5, 1.0, 4.0}) {
        for (double delta : {0.4, 1.0, 3.0}) {
            const auto sol = solve_modulus(sides, C, C, delta);
            const auto ft = nw_point(sides.treated, Bandwidth::from_omega(sol.omega_t, C, C));
            const auto fc = nw_point(sides.control, Bandwidth::from_omega(sol.omega_c, C, C));
            const double rt = sol.delta_t / sol.omega_t, rc = sol.delta_c / sol.omega_c;
            CHECK(std::abs(kernel_sq_sum(sides.treated, ft) - rt * rt) <= 1e-10);
            CHECK(std::abs(kernel_sq_sum(sides.control, fc) - rc * rc) <= 1e-10);
            const double s = sd_s(delta, sol.omega_t, ft.kernel_sum);
            CHECK(std::abs(s - direct_sd(sides.treated, ft, sides.control, fc)) <= 1e-8);
            CHECK(std::abs(s - sol.omega_prime) <= 1e-8);
        }
    }
}

TEST_CASE("single pair sd and sigma homogeneity") {
    const auto sides = fixture::sides_of(fixture::single_pair());
    const auto sol = solve_modulus(sides, 1.0, 1.0, 1.0);
    const auto ft = nw_point(sides.treated, Bandwidth::from_omega(sol.omega_t, 1.0, 1.0));
    CHECK(sd_s(1.0, sol.omega_t, ft.kernel_sum) == doctest::Approx(std::sqrt(2.0)));

    auto d = fixture::f4();
    const auto base = fixture::sides_of(d);
    for (double& s : *d.sigma) s *= 3.0;
    const auto scaled = fixture::sides_of(d);
    const auto a = solve_modulus(base, 1.0, 1.0, 1.2);
    const auto b = solve_modulus(scaled, 1.0, 1.0, 0.4);
    const auto fa = nw_point(base.treated, Bandwidth::from_omega(a.omega_t, 1.0, 1.0));
    const auto fb = nw_point(scaled.treated, Bandwidth::from_omega(b.omega_t, 1.0, 1.0));
    CHECK(sd_s(0.4, b.omega_t, fb.kernel_sum) == doctest::Approx(3.0 * sd_s(1.2, a.omega_t, fa.kernel_sum)));
}
