#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "fic/comparison.hpp"
#include "fic/parallel.hpp"

using namespace fic;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

ModelSpec brownian(double mu, double s) { return BrownianModel{{mu}, {s}}; }

FunctionalSpec asian_square() { return make_functional(AsianPayoff{ScalarFn::square()}); }

FunctionalSpec terminal(ScalarFn f) { return make_functional(TerminalPayoff{f}); }

const HypothesisCheck* find_row(const OrderReport& rep, const std::string& name) {
    for (const auto& h : rep.hypotheses)
        if (h.name == name) return &h;
    return nullptr;
}

}  // namespace

TEST_CASE("selector names round-trip") {
    for (TheoremSelector s :
         {TheoremSelector::emm_dcx, TheoremSelector::emm_cx, TheoremSelector::emm_general,
          TheoremSelector::emm_two_kernels, TheoremSelector::p_incr_dcx,
          TheoremSelector::p_incr_cx, TheoremSelector::p_general})
        CHECK(selector_from_name(selector_name(s)) == s);
    CHECK_THROWS_AS(selector_from_name("emm"), std::invalid_argument);
}

TEST_CASE("psd order on scalars and matrices") {
    CHECK(psd_order({0.04}, {0.04}, 1, 0.0));
    CHECK(psd_order({0.04}, {0.09}, 1, 1e-12));
    CHECK_FALSE(psd_order({0.09}, {0.04}, 1, 1e-12));

    // eigenvalues of the difference are 0.5 and -0.1: comparable entrywise
    // but not in the psd order
    const std::vector<double> zero4(4, 0.0);
    CHECK_FALSE(psd_order(zero4, {0.2, 0.3, 0.3, 0.2}, 2, 1e-12));
    CHECK(psd_order(zero4, {0.4, 0.3, 0.3, 0.4}, 2, 1e-12));

    CHECK_THROWS_AS(psd_order(zero4, {0.0, 0.3, 0.2, 0.0}, 2, 1e-12), std::invalid_argument);
    CHECK_THROWS_AS(psd_order({0.0}, {0.0, 0.0}, 1, 1e-12), std::invalid_argument);
}

TEST_CASE("a model compared with itself sits exactly on the boundary") {
    set_max_threads(4);
    ComparisonScenario sc;
    sc.model_x = brownian(0.0, 0.25);
    sc.model_y = brownian(0.0, 0.25);
    sc.payoff = asian_square();
    sc.selector = TheoremSelector::emm_cx;
    sc.grid = TimeGrid{1.0, 50};
    sc.budgets.n_outer = 4000;
    sc.budgets.n_valuation = 1500;
    sc.budgets.n_hyp_probes = 10;
    sc.budgets.shape_points = 4;
    sc.budgets.shape_probes = 8;
    sc.seed = 77;

    const OrderReport rep = run_comparison(sc);
    CHECK(rep.hypotheses_pass());
    REQUIRE(rep.has_conclusion);

    const auto* diff = find_row(rep, "diffusion order");
    REQUIRE(diff != nullptr);
    CHECK(diff->passed);
    CHECK(diff->worst_slack == 0.0);

    const auto* kernel = find_row(rep, "kernel order");
    REQUIRE(kernel != nullptr);
    CHECK(kernel->passed);
    CHECK(kernel->worst_slack == 0.0);
    CHECK_THAT(kernel->note, ContainsSubstring("no jump part"));

    const auto* kbe = find_row(rep, "backward equation");
    REQUIRE(kbe != nullptr);
    CHECK(kbe->passed);

    const auto* shape = find_row(rep, "vertical shape: convex");
    REQUIRE(shape != nullptr);
    CHECK(shape->passed);

    const auto* decl = find_row(rep, "integrability (declared)");
    REQUIRE(decl != nullptr);
    CHECK_FALSE(decl->checked);

    CHECK(std::abs(rep.conclusion.margin) <= 4.0);
    CHECK(rep.conclusion.verdict == "ordered");
}

TEST_CASE("diffusion-dominated pair orders an averaged variance payoff") {
    set_max_threads(4);
    ComparisonScenario sc;
    sc.model_x = brownian(0.0, 0.3);
    sc.model_y = brownian(0.0, 0.2);
    sc.payoff = asian_square();
    sc.selector = TheoremSelector::emm_cx;
    sc.grid = TimeGrid{1.0, 50};
    sc.budgets.n_outer = 30000;
    sc.budgets.n_valuation = 1500;
    sc.budgets.n_hyp_probes = 10;
    sc.budgets.shape_points = 4;
    sc.budgets.shape_probes = 8;
    sc.seed = 401;

    const OrderReport rep = run_comparison(sc);
    CHECK(rep.hypotheses_pass());

    const auto* diff = find_row(rep, "diffusion order");
    REQUIRE(diff != nullptr);
    CHECK(diff->worst_slack == Approx(0.05).margin(1e-12));

    // squared left-Riemann average of a driftless Gaussian path:
    // E = 1 + sigma^2 dt sum_{j,k<n} min(j,k) / n^2
    const std::size_t n = sc.grid.n_steps;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) s += static_cast<double>(std::min(j, k));
    const double v = sc.grid.dt() * s / static_cast<double>(n * n);
    CHECK(rep.conclusion.e_x == Approx(1.0 + 0.09 * v).margin(0.012));
    CHECK(rep.conclusion.e_y == Approx(1.0 + 0.04 * v).margin(0.012));
    CHECK(rep.conclusion.margin > 3.0);
    CHECK(rep.conclusion.verdict == "ordered");
}

TEST_CASE("swapping the models with the reversed flag mirrors the slacks") {
    set_max_threads(4);
    ComparisonScenario sc;
    sc.model_x = brownian(0.0, 0.2);
    sc.model_y = brownian(0.0, 0.3);
    sc.payoff = asian_square();
    sc.selector = TheoremSelector::emm_cx;
    sc.grid = TimeGrid{1.0, 50};
    sc.reversed = true;
    sc.budgets.n_outer = 30000;
    sc.budgets.n_valuation = 1500;
    sc.budgets.n_hyp_probes = 10;
    sc.budgets.shape_points = 3;
    sc.budgets.shape_probes = 8;
    sc.seed = 402;

    const OrderReport rep = run_comparison(sc);
    CHECK(rep.reversed);
    CHECK(rep.hypotheses_pass());

    const auto* diff = find_row(rep, "diffusion order");
    REQUIRE(diff != nullptr);
    CHECK(diff->passed);
    CHECK(diff->worst_slack == Approx(-0.05).margin(1e-12));

    CHECK(rep.conclusion.margin < -3.0);
    CHECK(rep.conclusion.verdict == "ordered");
}

TEST_CASE("a violated ordering is reported, not smoothed over") {
    set_max_threads(4);
    ComparisonScenario sc;
    sc.model_x = brownian(0.0, 0.2);
    sc.model_y = brownian(0.0, 0.3);
    sc.payoff = asian_square();
    sc.selector = TheoremSelector::emm_cx;
    sc.grid = TimeGrid{1.0, 50};
    sc.budgets.n_outer = 30000;
    sc.budgets.n_valuation = 1200;
    sc.budgets.n_hyp_probes = 8;
    sc.budgets.shape_points = 2;
    sc.seed = 403;

    const OrderReport hyp = check_hypotheses(sc);
    CHECK_FALSE(hyp.has_conclusion);
    CHECK_FALSE(hyp.hypotheses_pass());
    const auto* diff = find_row(hyp, "diffusion order");
    REQUIRE(diff != nullptr);
    CHECK_FALSE(diff->passed);
    CHECK(diff->worst_slack == Approx(-0.05).margin(1e-12));

    const ConclusionReport conc = compare_expectations(sc);
    CHECK(conc.margin < -3.0);
    CHECK(conc.verdict == "violated");
}

TEST_CASE("martingale selectors reject driftful models") {
    ComparisonScenario sc;
    sc.model_x = brownian(0.1, 0.2);
    sc.model_y = brownian(0.0, 0.2);
    sc.payoff = asian_square();
    sc.selector = TheoremSelector::emm_cx;
    sc.grid = TimeGrid{1.0, 20};
    CHECK_THROWS_AS(validate_scenario(sc), std::invalid_argument);

    sc.selector = TheoremSelector::p_incr_cx;
    CHECK_NOTHROW(validate_scenario(sc));

    ComparisonScenario tk;
    tk.model_x = LevyJumpDiffusion{{0.0}, {0.3}, {{{0.1}, 1.0}}};
    tk.model_y = LevyJumpDiffusion{{0.0}, {0.2}, {{{0.1}, 1.0}}};
    tk.payoff = asian_square();
    tk.selector = TheoremSelector::emm_two_kernels;
    tk.grid = TimeGrid{1.0, 20};
    CHECK_THROWS_WITH(validate_scenario(tk), ContainsSubstring("diffusion parts differ"));
}

TEST_CASE("thicker jump compensator raises convex payoffs") {
    set_max_threads(4);
    const ModelSpec base = brownian(0.0, 0.15);
    const std::vector<JumpAtom> thin = {{{0.1}, 0.5}, {{-0.1}, 0.5}};
    const std::vector<JumpAtom> thick = {{{0.1}, 3.0}, {{-0.1}, 3.0}};
    CompareBudgets budgets;
    budgets.n_outer = 8000;
    budgets.n_valuation = 1500;
    budgets.n_hyp_probes = 10;
    CompareTolerances tol;

    const OrderReport rep = two_kernel_compare(base, thin, thick, terminal(ScalarFn::square()),
                                               TimeGrid{1.0, 50}, 1.0, budgets, tol, 404);
    CHECK(rep.selector == TheoremSelector::emm_two_kernels);
    CHECK(rep.hypotheses_pass());

    // quadratic target: the kernel-integral difference is sum rate_diff x^2
    const auto* kernel = find_row(rep, "kernel order");
    REQUIRE(kernel != nullptr);
    CHECK(kernel->worst_slack == Approx(0.05).epsilon(1e-6));
    CHECK(find_row(rep, "diffusion order") == nullptr);
    CHECK(find_row(rep, "vertical shape: convex") == nullptr);

    CHECK(rep.conclusion.margin > 3.0);
    CHECK(rep.conclusion.verdict == "ordered");

    const OrderReport same = two_kernel_compare(base, thin, thin, terminal(ScalarFn::square()),
                                                TimeGrid{1.0, 50}, 1.0, budgets, tol, 405);
    const auto* same_kernel = find_row(same, "kernel order");
    REQUIRE(same_kernel != nullptr);
    CHECK(same_kernel->worst_slack == 0.0);
    CHECK(std::abs(same.conclusion.margin) <= 4.0);
}

TEST_CASE("state-dependent lower model stays below a jump diffusion") {
    set_max_threads(4);
    ComparisonScenario sc;
    sc.model_x = LevyJumpDiffusion{{0.0}, {0.3}, {{{0.1}, 1.0}, {{-0.1}, 1.0}}};
    sc.model_y = ItoSemimartingale{CoefficientSpec::constant(-0.05),
                                   CoefficientSpec::sin_value(0.2, 0.05, 1.0),
                                   {{0.1, CoefficientSpec::constant(0.5)},
                                    {-0.1, CoefficientSpec::constant(0.5)}}};
    sc.payoff = make_functional(IntegralPayoff{ScalarFn::smooth_call(1.0, 0.15)});
    sc.selector = TheoremSelector::p_incr_dcx;
    sc.grid = TimeGrid{1.0, 50};
    sc.budgets.n_outer = 30000;
    sc.budgets.n_valuation = 1200;
    sc.budgets.n_hyp_probes = 8;
    sc.budgets.shape_points = 3;
    sc.budgets.shape_probes = 8;
    sc.seed = 406;

    const OrderReport rep = run_comparison(sc);
    CHECK(rep.hypotheses_pass());

    const auto* drift = find_row(rep, "drift order");
    REQUIRE(drift != nullptr);
    CHECK(drift->worst_slack == Approx(0.05).margin(1e-12));

    const auto* diff = find_row(rep, "diffusion order");
    REQUIRE(diff != nullptr);
    CHECK(diff->worst_slack >= 0.027);

    const auto* kernel = find_row(rep, "kernel order");
    REQUIRE(kernel != nullptr);
    CHECK(kernel->worst_slack > 0.0);

    const auto* cvx = find_row(rep, "vertical shape: directionally convex");
    REQUIRE(cvx != nullptr);
    CHECK(cvx->passed);
    const auto* mono = find_row(rep, "vertical shape: increasing");
    REQUIRE(mono != nullptr);
    CHECK(mono->passed);

    CHECK(rep.conclusion.margin > 3.0);
    CHECK(rep.conclusion.verdict == "ordered");
}

TEST_CASE("shape probes catch a non-convex target") {
    set_max_threads(4);
    ComparisonScenario sc;
    sc.model_x = brownian(0.0, 0.25);
    sc.model_y = brownian(0.0, 0.25);
    sc.payoff = terminal(ScalarFn::gauss_bump(1.0, 0.3));
    sc.selector = TheoremSelector::emm_cx;
    sc.grid = TimeGrid{1.0, 50};
    sc.budgets.n_outer = 2000;
    sc.budgets.n_valuation = 1200;
    sc.budgets.n_hyp_probes = 6;
    sc.budgets.shape_points = 3;
    sc.budgets.shape_probes = 10;
    sc.seed = 407;

    const OrderReport rep = check_hypotheses(sc);
    const auto* shape = find_row(rep, "vertical shape: convex");
    REQUIRE(shape != nullptr);
    CHECK_FALSE(shape->passed);
    CHECK(shape->worst_slack < -1e-3);
    CHECK_FALSE(rep.hypotheses_pass());
}
