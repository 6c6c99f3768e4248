#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rdmono/error.hpp"
#include "rdmono/simlab.hpp"

#include <cmath>

using namespace rdmono;

namespace {

DGPSpec spec_of(Family f, double C, double theta = 1.0) {
    DGPSpec s;
    s.family = f;
    s.C = C;
    s.theta = theta;
    return s;
}

double at(const DGPSpec& s, double x, bool treated) {
    const double v[1] = {x};
    return eval_dgp(s, v, treated);
}

} // namespace

TEST_CASE("DGP evaluation") {
    const auto f1 = spec_of(Family::F1, 1.0, 1.0);
    CHECK(at(f1, -0.5, true) == doctest::Approx(0.5));
    CHECK(at(f1, 0.5, false) == doctest::Approx(0.5));
    CHECK(at(spec_of(Family::F3, 2.0), 1.0, false) == doctest::Approx(1.0));
    CHECK(at(spec_of(Family::F2, 1.0), 1.0, false) == doctest::Approx(0.5).epsilon(1e-14));
    const double out[1] = {1.5};
    CHECK_THROWS_AS(eval_dgp(f1, out, false), InputError);

    for (Family f : {Family::F1, Family::F2, Family::F3, Family::F4}) {
        const auto s = spec_of(f, 1.7, 0.3);
        CHECK(at(s, 0.0, true) - at(s, 0.0, false) == doctest::Approx(0.3).epsilon(1e-14));
    }
    DGPSpec bad = spec_of(Family::F2, 1.0);
    bad.knots = {0.2, 0.6};
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("derivative bounds on a fine grid") {
    for (Family f : {Family::F1, Family::F2, Family::F3, Family::F4}) {
        const auto s = spec_of(f, 2.0);
        double maxd = 0.0;
        const int N = 10000;
        for (bool treated : {true, false}) {
            for (int i = 0; i < N; ++i) {
                // Each branch lives on its own half-line.
                const double a = treated ? -1.0 + i * (1.0 / N) : i * (1.0 / N);
                const double b = a + 1.0 / N;
                const double dv = (at(s, b, treated) - at(s, a, treated)) * N;
                CHECK(dv >= -1e-9);
                maxd = std::max(maxd, std::abs(dv));
            }
        }
        CHECK(maxd <= 2.0 * (1 + 1e-9));
    }
}

TEST_CASE("beta design concentrates near the cutoff") {
    auto s = spec_of(Family::Constant, 1.0);
    s.n = 100000;
    std::size_t near_u = 0, near_b = 0;
    for (double x : draw_sample(s, 1, 0).x) near_u += std::abs(x) < 0.1;
    s.x_dist = XDist::Beta22;
    for (double x : draw_sample(s, 1, 0).x) near_b += std::abs(x) < 0.1;
    CHECK(near_b > near_u);
}

TEST_CASE("simulation designs 1-8") {
    const auto d1 = sim_design(1, Family::F2);
    CHECK(d1.x_dist == XDist::Uniform);
    CHECK(d1.var_fn == VarFn::Sigma1);
    CHECK(d1.C == 1.0);
    const auto d8 = sim_design(8, Family::F1);
    CHECK(d8.x_dist == XDist::Beta22);
    CHECK(d8.var_fn == VarFn::Sigma2);
    CHECK(d8.C == 3.0);
    CHECK(sim_design(6, Family::F1).var_fn == VarFn::Sigma1);
    CHECK(sim_design(7, Family::F1).var_fn == VarFn::Sigma2);
    CHECK_THROWS_AS(sim_design(9, Family::F1), InputError);
}

TEST_CASE("determinism across runs and thread counts") {
    auto s = sim_design(3, Family::F4);
    s.n = 200;
    MethodConfig mm{"minimax", MethodKind::Minimax, 3.0, {}, 0.05, VarianceMode::Estimate, 3, 10000};
    MethodConfig ad{"adaptive", MethodKind::OneSided, kInf, {0.2, 1.0}, 0.05, VarianceMode::Estimate, 3, 2000};
    MethodConfig orc{"oracle", MethodKind::Oracle, kInf, {}, 0.05, VarianceMode::Known, 3, 2000};
    std::vector<std::vector<RepOutcome>> a, b;
    const auto r1 = run_mc(s, {mm, ad, orc}, 12, 77, 1, &a);
    const auto r2 = run_mc(s, {mm, ad, orc}, 12, 77, 4, &b);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(r1[k].coverage == r2[k].coverage);
        CHECK(r1[k].mean_length == r2[k].mean_length);
        for (std::size_t r = 0; r < 12; ++r) {
            CHECK(a[k][r].lower == b[k][r].lower);
            CHECK(a[k][r].upper == b[k][r].upper);
        }
    }
    CHECK(r1[0].se == doctest::Approx(std::sqrt(r1[0].coverage * (1 - r1[0].coverage) / 12)));
}

TEST_CASE("zero-noise honesty") {
    auto s = sim_design(1, Family::F2);
    s.n = 150;
    s.noise_scale = 1e-9;
    MethodConfig mm{"minimax", MethodKind::Minimax, 1.0, {}, 0.05, VarianceMode::Known, 3, 1000};
    MethodConfig orc{"oracle", MethodKind::Oracle, kInf, {}, 0.05, VarianceMode::Known, 3, 1000};
    const auto r = run_mc(s, {mm, orc}, 20, 5, 1);
    CHECK(r[0].coverage == 1.0);
    CHECK(r[1].coverage == 1.0);
}

TEST_CASE("errors carry the replication index") {
    auto s = spec_of(Family::F1, 1.0);
    s.n = 6;
    MethodConfig mm{"minimax", MethodKind::Minimax, 1.0, {}, 0.05, VarianceMode::Estimate, 3, 1000};
    bool named = false;
    try {
        run_mc(s, {mm}, 3, 1, 1);
    } catch (const std::exception& e) {
        named = std::string(e.what()).find("replication") != std::string::npos;
    }
    CHECK(named);
}
