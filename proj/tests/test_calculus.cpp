#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fic/calculus.hpp"
#include "fic/functionals.hpp"
#include "fic/path.hpp"

using namespace fic;

namespace {

GridPath hand_path() {
    TimeGrid grid{1.0, 4};
    return GridPath(grid, 1, {1.0, 1.2, 0.7, 0.7, 1.1}, {0, 0, 1, 0, 0});
}

}  // namespace

TEST_CASE("horizontal derivative of a running integral is the integrand") {
    const GridPath p = hand_path();
    const auto F = make_functional(
        IntegralOfFunction{ScalarFn::square(), WeightFn::exp_decay(0.7)});
    for (std::size_t k = 0; k <= 3; ++k) {
        const StoppedPath sp = stop(p, k);
        const double expect =
            sp.frozen1() * sp.frozen1() * std::exp(-0.7 * sp.stop_time());
        CHECK_THAT(horizontal_derivative(path_fn(F), sp),
                   Catch::Matchers::WithinAbs(expect, 1e-12));
    }
    // two-step extension averages the integrand over the frozen segment,
    // which is constant, so the value is unchanged
    DerivativeConfig two;
    two.horizontal_steps = 2;
    const StoppedPath sp = stop(p, 1);
    const double expect = sp.frozen1() * sp.frozen1() *
                          0.5 * (std::exp(-0.7 * 0.25) + std::exp(-0.7 * 0.5));
    CHECK_THAT(horizontal_derivative(path_fn(F), sp, two),
               Catch::Matchers::WithinAbs(expect, 1e-12));

    CHECK_THROWS_AS(horizontal_derivative(path_fn(F), stop(p, 4)), std::out_of_range);
}

TEST_CASE("payoff functionals are horizontally flat") {
    const GridPath p = hand_path();
    const std::vector<FunctionalSpec> flats = {
        make_functional(AsianPayoff{ScalarFn::smooth_call(0.8, 0.2)}),
        make_functional(TerminalPayoff{ScalarFn::square()}),
        make_functional(IntegralPayoff{ScalarFn::expm1()}),
        make_functional(DiscreteMonitor{{0.5}, ScalarFn::square()}),
    };
    for (const auto& F : flats) {
        for (std::size_t k = 0; k <= 3; ++k) {
            CHECK_THAT(horizontal_derivative(path_fn(F), stop(p, k)),
                       Catch::Matchers::WithinAbs(0.0, 1e-12));
            CHECK_THAT(horizontal_derivative(path_fn(F), stop_pre(p, k)),
                       Catch::Matchers::WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("asian square derivatives match the closed form") {
    const GridPath p = hand_path();
    const auto F = make_functional(AsianPayoff{ScalarFn::square()});
    for (std::size_t k = 0; k <= 4; ++k) {
        const StoppedPath sp = stop(p, k);
        double mean = 0.0;
        for (std::size_t j = 0; j < 4; ++j) mean += sp.value1(j);
        mean *= 0.25;
        const double slope = (4.0 - static_cast<double>(k)) / 4.0;

        const auto g = vertical_gradient(path_fn(F), sp);
        CHECK_THAT(g[0], Catch::Matchers::WithinAbs(2.0 * mean * slope, 1e-9));

        const auto h = vertical_hessian(path_fn(F), sp);
        CHECK_THAT(h[0], Catch::Matchers::WithinAbs(2.0 * slope * slope, 1e-6));
    }
}

TEST_CASE("running integrals have vanishing vertical derivatives") {
    const GridPath p = hand_path();
    const auto F = make_functional(IntegralOfFunction{ScalarFn::expm1(), WeightFn::cosine(3.0)});
    for (std::size_t k = 0; k <= 4; ++k) {
        const StoppedPath sp = stop(p, k);
        CHECK(vertical_gradient(path_fn(F), sp)[0] == 0.0);
        CHECK(vertical_hessian(path_fn(F), sp)[0] == 0.0);
    }
}

TEST_CASE("terminal profile derivatives reduce to the profile's own") {
    const GridPath p = hand_path();
    const auto F = make_functional(TerminalPayoff{ScalarFn::expm1()});
    // post-jump path: frozen value 0.7
    {
        const StoppedPath sp = stop(p, 2);
        CHECK_THAT(vertical_gradient(path_fn(F), sp)[0],
                   Catch::Matchers::WithinAbs(std::exp(0.7), 1e-8));
        CHECK_THAT(vertical_hessian(path_fn(F), sp)[0],
                   Catch::Matchers::WithinAbs(std::exp(0.7), 1e-6));
    }
    // pre-jump path: frozen value is the left limit 1.2
    {
        const StoppedPath sp = stop_pre(p, 2);
        CHECK_THAT(vertical_gradient(path_fn(F), sp)[0],
                   Catch::Matchers::WithinAbs(std::exp(1.2), 1e-8));
    }
}

TEST_CASE("integral payoff gradient scales with the remaining time") {
    const GridPath p = hand_path();
    const auto F = make_functional(IntegralPayoff{ScalarFn::smooth_call(0.5, 0.3)});
    const ScalarFn prof = ScalarFn::smooth_call(0.5, 0.3);
    for (std::size_t k = 0; k <= 4; ++k) {
        const StoppedPath sp = stop(p, k);
        const double expect =
            prof.d1(sp.frozen1()) * static_cast<double>(4 - k) * 0.25;
        CHECK_THAT(vertical_gradient(path_fn(F), sp)[0],
                   Catch::Matchers::WithinAbs(expect, 1e-8));
    }
}

TEST_CASE("hessian of a projected terminal square is the rank-one form") {
    const TimeGrid grid{1.0, 4};
    const GridPath p(grid, 2, {1.0, 0.0, 1.2, -0.1, 0.7, 0.4, 0.7, 0.4, 1.1, 0.2},
                     {0, 0, 1, 0, 0});
    const std::vector<double> w = {1.5, -0.6};
    const auto F = make_functional(TerminalPayoff{ScalarFn::square()}, w);
    const StoppedPath sp = stop(p, 2);

    const auto h = vertical_hessian(path_fn(F), sp);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK_THAT(h[i * 2 + j], Catch::Matchers::WithinAbs(2.0 * w[i] * w[j], 1e-6));

    const auto g = vertical_gradient(path_fn(F), sp);
    const double proj = 1.5 * 0.7 - 0.6 * 0.4;
    for (std::size_t i = 0; i < 2; ++i)
        CHECK_THAT(g[i], Catch::Matchers::WithinAbs(2.0 * proj * w[i], 1e-8));
}

TEST_CASE("richardson extrapolation rescues a coarse gradient step") {
    const GridPath p = hand_path();
    const auto F = make_functional(TerminalPayoff{ScalarFn::expm1()});
    const StoppedPath sp = stop(p, 2);
    const double exact = std::exp(0.7);

    DerivativeConfig coarse;
    coarse.grad_step = 1e-3;
    const double plain = vertical_gradient(path_fn(F), sp, coarse)[0];
    coarse.richardson = true;
    const double rich = vertical_gradient(path_fn(F), sp, coarse)[0];

    CHECK(std::abs(plain - exact) > 1e-7);
    CHECK_THAT(rich, Catch::Matchers::WithinAbs(exact, 1e-9));
}

TEST_CASE("convexity probes accept the convex and flag the non-convex") {
    const GridPath p = hand_path();
    const StoppedPath sp = stop(p, 2);
    const ProbeConfig cfg;

    Rng rng(901);
    const auto ok = probe_vertical_property(
        path_fn(make_functional(AsianPayoff{ScalarFn::square()})), sp,
        VerticalProperty::convex, cfg, rng);
    CHECK(ok.passed());
    CHECK(ok.n_probes == cfg.n_probes);

    Rng rng2(902);
    const auto bad = probe_vertical_property(
        path_fn(make_functional(TerminalPayoff{ScalarFn::gauss_bump(0.7, 0.5)})), sp,
        VerticalProperty::convex, cfg, rng2);
    CHECK_FALSE(bad.passed());
    CHECK(bad.worst_base.size() == 1);
}

TEST_CASE("monotonicity probes check the increasing direction") {
    const GridPath p = hand_path();
    const StoppedPath sp = stop(p, 2);
    const ProbeConfig cfg;

    Rng rng(903);
    const auto ok = probe_vertical_property(
        path_fn(make_functional(TerminalPayoff{ScalarFn::smooth_call(0.5, 0.2)})), sp,
        VerticalProperty::monotone, cfg, rng);
    CHECK(ok.passed());

    Rng rng2(904);
    const auto bad = probe_vertical_property(
        path_fn(make_functional(TerminalPayoff{ScalarFn::gauss_bump(0.7, 0.5)})), sp,
        VerticalProperty::monotone, cfg, rng2);
    CHECK(bad.min_slack < 0.0);
}

TEST_CASE("directional convexity separates from plain convexity") {
    const TimeGrid grid{1.0, 4};
    const GridPath p(grid, 2, {1.0, 0.0, 1.2, -0.1, 0.7, 0.4, 0.7, 0.4, 1.1, 0.2},
                     {0, 0, 1, 0, 0});
    const StoppedPath sp = stop(p, 2);
    const ProbeConfig cfg;

    // (w . x)^2 with mixed-sign weights is convex but not directionally so.
    const auto mixed = make_functional(TerminalPayoff{ScalarFn::square()},
                                       std::vector<double>{1.0, -1.0});
    Rng rng(905);
    CHECK(probe_vertical_property(path_fn(mixed), sp, VerticalProperty::convex, cfg, rng)
              .passed());
    Rng rng2(906);
    const auto dcx =
        probe_vertical_property(path_fn(mixed), sp, VerticalProperty::directionally_convex,
                                cfg, rng2);
    CHECK(dcx.min_slack < -1.0);

    // nonnegative weights restore it
    const auto pos = make_functional(TerminalPayoff{ScalarFn::square()},
                                     std::vector<double>{1.0, 2.0});
    Rng rng3(907);
    CHECK(probe_vertical_property(path_fn(pos), sp, VerticalProperty::directionally_convex,
                                  cfg, rng3)
              .passed());
}
