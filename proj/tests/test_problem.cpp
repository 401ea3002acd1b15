#include <cmath>

#include "doctest.h"
#include "hjb/problem.hpp"

using namespace hjb;

namespace {

Grid box1(double lo, double hi, std::size_t n) { return Grid{{make_axis(lo, hi, n)}}; }

BolzaProblem quadratic_problem(TerminalCost phi) {
    return build_problem(
        LagrangianModel::quadratic(box1(-3.0, 3.0, 61), box1(-4.0, 4.0, 81)), std::move(phi));
}

}  // namespace

TEST_CASE("build_problem accepts quadratic L with zero terminal cost") {
    auto p = quadratic_problem(TerminalCost::analytic([](const Vec&) { return 0.0; }));
    CHECK(p.coercivity_report().pass);
    Vec x{1.0}, u{2.0};
    CHECK(p.lagrangian()(x, u) == doctest::Approx(2.0));
}

TEST_CASE("build_problem rejects a negative Lagrangian") {
    Grid rg{{make_axis(0.0, 5.0, 51)}};
    CoercivityWitness th{
        SampledFunction::from_callable(rg, [](const Vec& r) { return 0.5 * r[0] * r[0]; }), 1.0};
    auto L = LagrangianModel::custom(
        box1(-1.0, 1.0, 5), box1(-2.0, 2.0, 41),
        [](const Vec&, const Vec& u) { return -1.0 + dot(u, u); }, th);
    CHECK_THROWS_AS(
        build_problem(L, TerminalCost::analytic([](const Vec&) { return 0.0; })),
        ValidationFailed);
}

TEST_CASE("build_problem rejects linear growth (coercivity)") {
    Grid rg{{make_axis(0.0, 5.0, 51)}};
    CoercivityWitness th{
        SampledFunction::from_callable(rg, [](const Vec& r) { return r[0]; }), 1.0};
    auto L = LagrangianModel::custom(
        box1(-1.0, 1.0, 5), box1(-2.0, 2.0, 41),
        [](const Vec&, const Vec& u) { return norm(u); }, th, true);
    CHECK_THROWS_AS(
        build_problem(L, TerminalCost::analytic([](const Vec&) { return 0.0; })),
        ValidationFailed);
}

TEST_CASE("lagrange_reduction snaps to the nearest node") {
    Grid g = box1(-1.0, 1.0, 201);  // step 0.01, contains 0
    SUBCASE("z exactly on a node") {
        TerminalCost phi = lagrange_reduction(g, Vec{0.0});
        SampledFunction tab = phi.tabulate(g);
        for (std::size_t i = 0; i < tab.size(); ++i) {
            if (i == 100) CHECK(tab[i] == 0.0);
            else CHECK(is_infinite(tab[i]));
        }
    }
    SUBCASE("z = 0.003 snaps to node 0.0 only") {
        TerminalCost phi = lagrange_reduction(g, Vec{0.003});
        SampledFunction tab = phi.tabulate(g);
        CHECK(tab[100] == 0.0);
        CHECK(is_infinite(tab[101]));
        CHECK(is_infinite(tab[99]));
    }
    SUBCASE("z outside the box") {
        CHECK_THROWS_AS(lagrange_reduction(g, Vec{1.5}), OutOfDomain);
    }
}

TEST_CASE("eval_action: constant path pays the potential only") {
    auto p = build_problem(
        LagrangianModel::quadratic(box1(-3.0, 3.0, 61), box1(-4.0, 4.0, 81),
                                   [](const Vec& x) { return x[0] * x[0]; }),
        TerminalCost::analytic([](const Vec&) { return 0.0; }));
    double x = 1.5;
    TrajectoryPath path{0.0, 0.01, std::vector<Vec>(101, Vec{x})};
    CHECK(eval_action(path, p) == doctest::Approx(x * x).epsilon(1e-12));
}

TEST_CASE("eval_action: straight line 0 -> 1 under u^2/2 costs 1/2") {
    auto p = quadratic_problem(TerminalCost::analytic([](const Vec&) { return 0.0; }));
    TrajectoryPath path{0.0, 0.1, {}};
    for (int k = 0; k <= 10; ++k) path.nodes.push_back(Vec{0.1 * k});
    CHECK(eval_action(path, p) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("eval_action: +inf when the endpoint misses an indicator target") {
    Grid g = box1(-3.0, 3.0, 61);
    auto p = build_problem(LagrangianModel::quadratic(g, box1(-4.0, 4.0, 81)),
                           TerminalCost::indicator_point(g, Vec{2.0}));
    TrajectoryPath path{0.0, 0.1, {}};
    for (int k = 0; k <= 10; ++k) path.nodes.push_back(Vec{0.1 * k});
    CHECK(is_infinite(eval_action(path, p)));
}

TEST_CASE("eval_action is additive over concatenation") {
    auto p = quadratic_problem(TerminalCost::analytic([](const Vec& y) { return std::abs(y[0]); }));
    TrajectoryPath whole{0.0, 0.05, {}};
    for (int k = 0; k <= 20; ++k) whole.nodes.push_back(Vec{0.1 * std::sin(0.3 * k)});
    TrajectoryPath first{0.0, 0.05, {whole.nodes.begin(), whole.nodes.begin() + 11}};
    TrajectoryPath second{0.5, 0.05, {whole.nodes.begin() + 10, whole.nodes.end()}};
    // additivity up to the terminal cost evaluated at the junction
    double joint = eval_action(whole, p);
    double phi_mid = p.terminal()(first.nodes.back());
    double phi_end = p.terminal()(whole.nodes.back());
    CHECK(joint == doctest::Approx(eval_action(first, p) - phi_mid + eval_action(second, p))
                       .epsilon(1e-12));
    CHECK(eval_action(whole, p) >= 0.0);
    (void)phi_end;
}

TEST_CASE("refining h for a fixed smooth path changes the action by O(h)") {
    auto p = quadratic_problem(TerminalCost::analytic([](const Vec&) { return 0.0; }));
    auto action_at = [&](std::size_t n) {
        TrajectoryPath path{0.0, 1.0 / static_cast<double>(n), {}};
        for (std::size_t k = 0; k <= n; ++k) {
            double s = static_cast<double>(k) / static_cast<double>(n);
            path.nodes.push_back(Vec{std::sin(s)});
        }
        return eval_action(path, p);
    };
    double exact = 0.25 + std::sin(2.0) / 8.0;  // integral of cos(s)^2/2
    double coarse = action_at(50), fine = action_at(100);
    CHECK(std::abs(fine - exact) < std::abs(coarse - exact) + 1e-12);
    CHECK(std::abs(fine - exact) < 0.5 / 100.0);
}
