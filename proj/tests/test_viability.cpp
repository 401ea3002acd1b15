#include <cmath>

#include "doctest.h"
#include "hjb/viability.hpp"

using namespace hjb;

namespace {

DiscreteSet unit_disk(double res = 0.01) {
    Grid box({Axis{-1.5, 1.5, 301}, Axis{-1.5, 1.5, 301}});
    return DiscreteSet::implicit([](const Vec& z) { return norm(z) <= 1.0; }, box, res);
}

VelocityMap rotation_field() {
    return VelocityMap::analytic(
        [](const Vec& y) { return std::vector<Vec>{Vec{-y[1], y[0]}}; }, 2.0);
}

VelocityMap outward_field() {
    return VelocityMap::analytic([](const Vec& y) { return std::vector<Vec>{y}; }, 2.0);
}

std::vector<Vec> boundary_samples(std::size_t n) {
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < n; ++i) {
        double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        pts.push_back(Vec{std::cos(th), std::sin(th)});
    }
    return pts;
}

}  // namespace

TEST_CASE("check_viability_domain: rotation stays in the disk, outward escapes") {
    auto K = unit_disk();
    auto pts = boundary_samples(8);
    auto rot = check_viability_domain(K, rotation_field(), pts, 0.05);
    CHECK(rot.pass);
    for (const auto& p : rot.points) CHECK(p.best_ratio <= 0.05);
    auto out = check_viability_domain(K, outward_field(), pts, 0.05);
    CHECK(!out.pass);
    for (const auto& p : out.points) CHECK(p.best_ratio > 0.5);
}

TEST_CASE("polar_condition mirrors the viability verdicts") {
    auto K = unit_disk();
    auto ps = unit_directions(2, 32);
    auto rot = polar_condition(K, rotation_field(), Vec{1.0, 0.0}, ps, 0.05);
    CHECK(rot.pass);
    CHECK(rot.polar_count >= 1);
    auto out = polar_condition(K, outward_field(), Vec{1.0, 0.0}, ps, 0.05);
    CHECK(!out.pass);
    CHECK(out.worst > 0.5);
}

TEST_CASE("polar_condition on an interval with a one-sided field") {
    Grid box({Axis{-0.5, 1.5, 401}});
    auto K = DiscreteSet::implicit(
        [](const Vec& z) { return z[0] >= 0.0 && z[0] <= 1.0; }, box, 0.005);
    auto G = VelocityMap::analytic([](const Vec&) { return std::vector<Vec>{Vec{-1.0}}; }, 2.0);
    auto at0 = polar_condition(K, G, Vec{0.0}, unit_directions(1, 2), 0.05);
    CHECK(!at0.pass);
    auto at1 = polar_condition(K, G, Vec{1.0}, unit_directions(1, 2), 0.05);
    CHECK(at1.pass);
}

TEST_CASE("distance_descent on the disk") {
    auto K = unit_disk();
    std::vector<double> hs{0.02, 0.01, 0.005};
    SUBCASE("rotation: quadratic contact") {
        auto tr = distance_descent(K, rotation_field(), Vec{1.0, 0.0}, 2.0, hs, 0.01);
        CHECK(tr.pass);
        CHECK(tr.h_eps == doctest::Approx(0.02));
        for (const auto& s : tr.steps) {
            CHECK(s.ratio <= 0.1);
            // chord geometry: dist((1,h), disk) = sqrt(1+h^2) - 1
            double expect = std::sqrt(1.0 + s.h * s.h) - 1.0;
            CHECK(std::sqrt(2.0 * s.g) == doctest::Approx(expect).epsilon(0.05));
            CHECK(norm(s.p_h) <= s.h * 2.0 + 1e-6);
            CHECK(s.polar_normal_ok);
            CHECK(s.support_touch_ok);
        }
    }
    SUBCASE("outward: linear escape at every scale") {
        auto tr = distance_descent(K, outward_field(), Vec{1.0, 0.0}, 1.0, hs, 0.5);
        CHECK(!tr.pass);
        for (const auto& s : tr.steps) CHECK(s.ratio > 0.9);
    }
    SUBCASE("whole space is trivially viable") {
        Grid box({Axis{-2.0, 2.0, 81}, Axis{-2.0, 2.0, 81}});
        auto all = DiscreteSet::implicit([](const Vec&) { return true; }, box, 0.05);
        auto tr = distance_descent(all, outward_field(), Vec{1.0, 0.0}, 2.0, hs, 0.01);
        CHECK(tr.pass);
        for (const auto& s : tr.steps) CHECK(s.g == doctest::Approx(0.0));
    }
}

TEST_CASE("viable_euler") {
    auto K = unit_disk();
    SUBCASE("rotation closes the circle") {
        auto run = viable_euler(K, rotation_field(), Vec{1.0, 0.0}, 0.01, 2.0 * M_PI);
        CHECK(dist(run.path.nodes.back(), Vec{1.0, 0.0}) <= 0.15);
        for (const Vec& y : run.path.nodes) {
            CHECK(norm(y) <= 1.0 + 1e-9);
            CHECK(norm(y) >= 1.0 - 0.02);
        }
        CHECK(run.max_pre_projection <= 0.01 * 0.1);
    }
    SUBCASE("outward escapes immediately") {
        CHECK_THROWS_AS(viable_euler(K, outward_field(), Vec{1.0, 0.0}, 0.01, 1.0), Escaped);
    }
    SUBCASE("hypograph of a sampled curve") {
        Grid g({Axis{0.0, 3.0, 601}});
        auto psi = SampledFunction::from_callable(g, [](const Vec& s) { return std::cos(s[0]); });
        auto K2 = epigraph(psi, GraphSide::Hypo);
        auto G = VelocityMap::analytic(
            [](const Vec& y) {
                return std::vector<Vec>{Vec{1.0, -std::sin(y[0]) - 0.1}};
            },
            3.0);
        auto run = viable_euler(K2, G, Vec{0.0, 0.9}, 0.01, 2.5);
        for (const Vec& y : run.path.nodes) CHECK(y[1] <= std::cos(y[0]) + 1e-6);
    }
}

TEST_CASE("epigraph velocity map support identities") {
    Grid xg({Axis{-1.0, 1.0, 41}});
    Grid ug({Axis{-3.0, 3.0, 301}});
    Grid pg({Axis{-3.0, 3.0, 301}});
    auto L = LagrangianModel::quadratic(xg, ug);
    auto H = hamiltonian_table(L.eval(), xg, ug, pg, &L.theta());
    auto G = epigraph_velocity_map(L, H, 4.0);

    Vec y{0.5, 0.25, 1.0};  // (t, x, r)
    SUBCASE("finite branch matches the Hamiltonian table") {
        CHECK(G.sigma(y, Vec{0.0, 1.0, -1.0}) == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(G.sigma(y, Vec{0.3, 1.0, -2.0}) ==
              doctest::Approx(-0.3 + 2.0 * H.query(Vec{0.25}, Vec{0.5})).epsilon(1e-9));
    }
    SUBCASE("q = 0 forces p_x = 0") {
        CHECK(G.sigma(y, Vec{1.0, 0.0, 0.0}) == doctest::Approx(-1.0));
        CHECK(is_infinite(G.sigma(y, Vec{1.0, 0.5, 0.0})));
    }
    SUBCASE("q > 0 is unbounded") { CHECK(is_infinite(G.sigma(y, Vec{0.0, 1.0, 1.0}))); }
    SUBCASE("brute-force enumeration over (u, rho) samples") {
        // raw pairing against g = (-1, u, -L - rho) with the cost probe -q
        for (double q : {-1.0, -0.5, -2.0}) {
            Vec p{0.1, 0.8, q};
            double brute = -kPlusInfinity;
            for (const Vec& g : G.samples(y, kPlusInfinity)) {
                Vec raw{p[0], p[1], -q};
                brute = std::max(brute, dot(raw, g));
            }
            CHECK(G.sigma(y, p) == doctest::Approx(brute).epsilon(1e-3));
        }
    }
    SUBCASE("sampled velocities carry the -1 time slot and the cost ray") {
        auto gs = G.samples(y);
        CHECK(!gs.empty());
        for (const Vec& g : gs) {
            CHECK(g[0] == -1.0);
            double u = g[1];
            CHECK(g[2] <= -0.5 * u * u + 1e-9);
        }
    }
}

TEST_CASE("usc_margin") {
    Grid xg({Axis{-1.0, 1.0, 41}});
    Grid ug({Axis{-3.0, 3.0, 301}});
    Grid pg({Axis{-2.0, 2.0, 201}});
    SUBCASE("x-independent Hamiltonian spans the whole domain") {
        auto L = LagrangianModel::quadratic(xg, ug);
        auto H = hamiltonian_table(L.eval(), xg, ug, pg, &L.theta());
        CHECK(usc_margin(H, Vec{0.0}, 0.1) == doctest::Approx(1.0));
    }
    SUBCASE("H = p^2/2 - x^2 has a positive but bounded margin") {
        auto L = LagrangianModel::quadratic(xg, ug, [](const Vec& x) { return x[0] * x[0]; });
        auto H = hamiltonian_table(L.eval(), xg, ug, pg, &L.theta());
        double r = usc_margin(H, Vec{0.5}, 0.1);
        CHECK(r > 0.05);
        CHECK(r < 0.2);
        // at the minimum of -x^2's violation set, every y is admissible
        CHECK(usc_margin(H, Vec{0.0}, 0.1) == doctest::Approx(1.0));
    }
    SUBCASE("upward jump collapses the margin on the low side") {
        Grid xj({Axis{-1.0, 1.0, 21}});
        Grid pj({Axis{-1.0, 1.0, 3}});
        std::vector<double> vals(xj.size() * pj.size());
        for (std::size_t xi = 0; xi < xj.size(); ++xi)
            for (std::size_t pi = 0; pi < pj.size(); ++pi)
                vals[xi * pj.size() + pi] = xj.point_flat(xi)[0] >= 0.0 ? 1.0 : 0.0;
        HamiltonianTable H(xj, pj, vals, std::vector<double>(xj.size(), 0.0));
        CHECK(usc_margin(H, Vec{-0.1}, 0.1) == doctest::Approx(0.0));
        CHECK(usc_margin(H, Vec{0.1}, 0.1) > 0.5);
    }
}
