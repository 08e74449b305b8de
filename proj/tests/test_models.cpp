#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fic/models.hpp"
#include "fic/path.hpp"
#include "fic/rng.hpp"

using namespace fic;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

// terminal first-coordinate moments over n_paths simulations
Moments terminal_moments(const ModelSpec& m, const TimeGrid& grid, const std::vector<double>& x0,
                         std::size_t n_paths, std::uint64_t root) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng rng(derive_seed(root, stream::simulate, p));
        const GridPath path = simulate(m, grid, x0, rng);
        const double v = path.value1(grid.n_steps);
        s1 += v;
        s2 += v * v;
    }
    const double mean = s1 / static_cast<double>(n_paths);
    return {mean, s2 / static_cast<double>(n_paths) - mean * mean};
}

}  // namespace

TEST_CASE("simulation is reproducible from the seed") {
    const TimeGrid grid{1.0, 32};
    const ModelSpec m = LevyJumpDiffusion{{0.1}, {0.3}, {{{0.2}, 1.0}}};
    Rng a(42), b(42), c(43);
    const GridPath pa = simulate(m, grid, {1.0}, a);
    const GridPath pb = simulate(m, grid, {1.0}, b);
    const GridPath pc = simulate(m, grid, {1.0}, c);
    CHECK(pa == pb);
    CHECK_FALSE(pa == pc);
}

TEST_CASE("brownian terminal moments match the law") {
    const TimeGrid grid{1.0, 64};
    const ModelSpec m = BrownianModel{{0.1}, {0.4}};
    const std::size_t n_paths = 20000;
    const Moments mo = terminal_moments(m, grid, {2.0}, n_paths, 7001);

    const double se_mean = 0.4 / std::sqrt(static_cast<double>(n_paths));
    CHECK_THAT(mo.mean, Catch::Matchers::WithinAbs(2.1, 3.5 * se_mean));
    CHECK_THAT(mo.var, Catch::Matchers::WithinAbs(0.16, 0.16 * 0.05));

    // A continuous model never flags a jump.
    Rng rng(derive_seed(7001, stream::simulate, 0));
    const GridPath p = simulate(m, grid, {2.0}, rng);
    for (std::size_t k = 0; k <= grid.n_steps; ++k) CHECK_FALSE(p.has_jump(k));
}

TEST_CASE("correlated brownian covariance matches sigma sigma^T") {
    const TimeGrid grid{1.0, 32};
    const std::vector<double> sigma = {0.3, 0.0, 0.15, 0.2};
    const ModelSpec m = BrownianModel{{0.0, 0.0}, sigma};

    const Characteristics ch = characteristics_at(m, 0.0, {0.0, 0.0}, 0.0);
    CHECK(ch.cov[0] == Catch::Approx(0.09));
    CHECK(ch.cov[1] == Catch::Approx(0.045));
    CHECK(ch.cov[2] == Catch::Approx(0.045));
    CHECK(ch.cov[3] == Catch::Approx(0.0625));

    const std::size_t n_paths = 20000;
    double sxx = 0.0, sxy = 0.0, syy = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng rng(derive_seed(8101, stream::simulate, p));
        const GridPath path = simulate(m, grid, {0.0, 0.0}, rng);
        const double x = path.value(grid.n_steps, 0);
        const double y = path.value(grid.n_steps, 1);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double np = static_cast<double>(n_paths);
    const double cxx = sxx / np - (sx / np) * (sx / np);
    const double cxy = sxy / np - (sx / np) * (sy / np);
    const double cyy = syy / np - (sy / np) * (sy / np);
    CHECK_THAT(cxx, Catch::Matchers::WithinAbs(0.09, 0.005));
    CHECK_THAT(cxy, Catch::Matchers::WithinAbs(0.045, 0.004));
    CHECK_THAT(cyy, Catch::Matchers::WithinAbs(0.0625, 0.004));
}

TEST_CASE("raw jump model applies its stated drift between jumps") {
    const TimeGrid grid{1.0, 100};
    // drift chosen as the negative compensator, so the model is a martingale
    const ModelSpec m = CompoundPoissonModel{{-1.0}, {{{0.5}, 2.0}}};
    const double dt = grid.dt();

    Rng rng(derive_seed(5, stream::simulate, 0));
    const GridPath p = simulate(m, grid, {0.0}, rng);
    for (std::size_t k = 1; k <= grid.n_steps; ++k) {
        const double incr = p.value1(k) - p.value1(k - 1);
        if (p.has_jump(k)) {
            // drift plus a whole number of atom jumps
            const double jumps = incr + 1.0 * dt;
            const double ratio = jumps / 0.5;
            CHECK_THAT(ratio, Catch::Matchers::WithinAbs(std::round(ratio), 1e-9));
            CHECK(std::round(ratio) >= 1.0);
        } else {
            CHECK_THAT(incr, Catch::Matchers::WithinAbs(-1.0 * dt, 1e-12));
        }
    }

    const std::size_t n_paths = 20000;
    const Moments mo = terminal_moments(m, grid, {0.0}, n_paths, 5);
    // martingale: E X_T = 0, Var = rate * x^2 * T
    const double se = std::sqrt(0.5 / static_cast<double>(n_paths));
    CHECK_THAT(mo.mean, Catch::Matchers::WithinAbs(0.0, 3.5 * se));
    CHECK_THAT(mo.var, Catch::Matchers::WithinAbs(0.5, 0.5 * 0.06));

    // characteristic drift folds the compensator back in
    const Characteristics ch = characteristics_at(m, 0.0, {0.0}, 0.0);
    CHECK(ch.drift[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(ch.cov[0] == 0.0);
    CHECK(ch.total_rate() == Catch::Approx(2.0));
}

TEST_CASE("levy drift is the characteristic drift after compensation") {
    const TimeGrid grid{1.0, 64};
    const ModelSpec m = LevyJumpDiffusion{{0.2}, {0.3}, {{{-0.2}, 1.5}, {{0.1}, 2.0}}};
    const std::size_t n_paths = 20000;
    const Moments mo = terminal_moments(m, grid, {1.0}, n_paths, 99);

    // E X_T = x0 + b T, Var = (sigma^2 + sum rate x^2) T
    const double var = 0.09 + 1.5 * 0.04 + 2.0 * 0.01;
    const double se = std::sqrt(var / static_cast<double>(n_paths));
    CHECK_THAT(mo.mean, Catch::Matchers::WithinAbs(1.2, 3.5 * se));
    CHECK_THAT(mo.var, Catch::Matchers::WithinAbs(var, var * 0.06));

    const Characteristics ch = characteristics_at(m, 0.5, {3.0}, 2.0);
    CHECK(ch.drift[0] == Catch::Approx(0.2));
    CHECK(ch.cov[0] == Catch::Approx(0.09));
    CHECK(ch.kernel_integral([](const std::vector<double>& x) { return x[0] * x[0]; }) ==
          Catch::Approx(0.08));
}

TEST_CASE("predictable-coefficient model drifts at its stated beta") {
    const TimeGrid grid{1.0, 64};
    const ModelSpec m = ItoSemimartingale{
        CoefficientSpec::constant(-0.15),
        CoefficientSpec::sin_value(0.2, 0.05, 1.0),
        {{-0.3, CoefficientSpec::constant(0.5)}},
    };
    const std::size_t n_paths = 20000;
    const Moments mo = terminal_moments(m, grid, {1.0}, n_paths, 314);
    // beta is the identity-truncation drift, so the compensated jumps do not
    // shift the mean
    const double se = std::sqrt(mo.var / static_cast<double>(n_paths));
    CHECK_THAT(mo.mean, Catch::Matchers::WithinAbs(0.85, 3.5 * se));
    CHECK_FALSE(has_independent_increments(m));
    CHECK(has_independent_increments(ModelSpec{BrownianModel{{0.0}, {1.0}}}));
}

TEST_CASE("characteristics read the predictable state of a stopped path") {
    const TimeGrid grid{1.0, 4};
    const GridPath p(grid, 1, {1.0, 1.2, 0.7, 0.7, 1.1}, {0, 0, 1, 0, 0});
    const ModelSpec m = ItoSemimartingale{
        CoefficientSpec::sin_mean(0.0, 1.0, 2.0),
        CoefficientSpec::affine_value(0.1, 0.2),
        {{0.4, CoefficientSpec::affine_time(0.1, 0.3)}},
    };

    // At the pre-jump path of index 2 the frozen value is the left limit 1.2
    // and the running average reads the strict prefix {1.0, 1.2}.
    const Characteristics ch = characteristics_at(m, stop_pre(p, 2));
    CHECK(ch.drift[0] == Catch::Approx(std::sin(2.0 * 1.1)));
    const double delta = 0.1 + 0.2 * 1.2;
    CHECK(ch.cov[0] == Catch::Approx(delta * delta));
    CHECK(ch.atoms.size() == 1);
    CHECK(ch.atoms[0].rate == Catch::Approx(0.1 + 0.3 * 0.5));

    // Post-jump at the same index the frozen value is 0.7.
    const Characteristics ch2 = characteristics_at(m, stop(p, 2));
    const double delta2 = 0.1 + 0.2 * 0.7;
    CHECK(ch2.cov[0] == Catch::Approx(delta2 * delta2));

    // A negative rate at some state is refused.
    const ModelSpec bad = ItoSemimartingale{
        CoefficientSpec::constant(0.0),
        CoefficientSpec::constant(0.1),
        {{0.4, CoefficientSpec::affine_value(0.0, -1.0)}},
    };
    CHECK_THROWS_AS(characteristics_at(bad, stop(p, 2)), std::domain_error);
}

TEST_CASE("increments over disjoint windows are uncorrelated for levy models") {
    const TimeGrid grid{1.0, 64};
    const ModelSpec m = LevyJumpDiffusion{{0.0}, {0.25}, {{{0.3}, 1.0}}};
    const std::size_t n_paths = 20000;
    double sa = 0.0, sb = 0.0, sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng rng(derive_seed(2024, stream::simulate, p));
        const GridPath path = simulate(m, grid, {0.0}, rng);
        const double a = path.value1(32) - path.value1(0);
        const double b = path.value1(64) - path.value1(32);
        sa += a;
        sb += b;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    const double np = static_cast<double>(n_paths);
    const double cov = sab / np - (sa / np) * (sb / np);
    const double va = saa / np - (sa / np) * (sa / np);
    const double vb = sbb / np - (sb / np) * (sb / np);
    const double corr = cov / std::sqrt(va * vb);
    CHECK_THAT(corr, Catch::Matchers::WithinAbs(0.0, 3.5 / std::sqrt(np)));
}

TEST_CASE("jump activity matches the closed poisson series") {
    const TimeGrid grid{1.0, 250};
    const ModelSpec m = CompoundPoissonModel{{0.0}, {{{0.5}, 2.0}}};
    // E sqrt(sum of squared jumps) = |x| E sqrt(N), N ~ Poisson(rate T),
    // up to the rare event of two arrivals in one step.
    double e_sqrt_n = 0.0;
    double term = std::exp(-2.0);
    for (int k = 0; k <= 60; ++k) {
        if (k > 0) term *= 2.0 / static_cast<double>(k);
        e_sqrt_n += std::sqrt(static_cast<double>(k)) * term;
    }
    const double expect = 0.5 * e_sqrt_n;
    const double got = jump_activity_estimate(m, grid, {0.0}, 20000, 606);
    CHECK_THAT(got, Catch::Matchers::WithinAbs(expect, 0.012));
}

TEST_CASE("model validation rejects malformed specs") {
    const TimeGrid grid{1.0, 8};
    Rng rng(1);
    CHECK_THROWS_AS(simulate(BrownianModel{{0.0, 0.0}, {1.0}}, grid, {0.0, 0.0}, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate(CompoundPoissonModel{{0.0}, {{{0.5}, -1.0}}}, grid, {0.0}, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate(CompoundPoissonModel{{0.0}, {{{0.5, 0.5}, 1.0}}}, grid, {0.0}, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate(BrownianModel{{0.0}, {1.0}}, grid, {0.0, 1.0}, rng),
                    std::invalid_argument);
    // per-step jump intensity beyond the sampler's range
    CHECK_THROWS_AS(simulate(CompoundPoissonModel{{0.0}, {{{0.5}, 1e5}}}, grid, {0.0}, rng),
                    std::invalid_argument);
}
