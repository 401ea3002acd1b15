// Acceptance battery for the hjbolza library: ten pinned criteria, one
// pass/fail line each. Exit 0 iff all pass.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "hjb/io.hpp"
#include "hjb/parallel.hpp"

using namespace hjb;

namespace {

Grid box1(double lo, double hi, std::size_t n) { return Grid{{make_axis(lo, hi, n)}}; }

// closed form for L = u^2/2, phi = |y|
double hopf_lax_abs(double t, double x) {
    return std::abs(x) <= t ? x * x / (2.0 * t) : std::abs(x) - 0.5 * t;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct BatteryResult {
    std::array<bool, 9> pass{};
    std::array<std::string, 9> detail{};
    std::string artifacts;  // byte-compared across thread counts
};

BatteryResult run_battery() {
    BatteryResult R;
    std::ostringstream art;
    char d[256];

    // shared benchmark: L = u^2/2, phi = |y|, t in [0,1], x in [-3,3],
    // dt = dx = 0.01
    const double dt = 0.01, dx = 0.01;
    const double tol_cert = 10.0 * (dt + dx);  // 0.2
    Grid xg = box1(-3.0, 3.0, 601);
    Grid ug = box1(-4.0, 4.0, 81);
    auto problem1 =
        build_problem(LagrangianModel::quadratic(xg, ug),
                      TerminalCost::analytic([](const Vec& y) { return std::abs(y[0]); }));
    VelocitySearchBox search1{4.0, 40, "acceptance"};

    // ---- 1: Hopf-Lax benchmark --------------------------------------
    auto t0 = std::chrono::steady_clock::now();
    ValueField V1 = solve_dp(problem1, dt, 100, xg, search1);
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double err1 = 0.0;
    for (std::size_t k = 10; k <= 100; ++k) {
        double t = dt * static_cast<double>(k);
        for (std::size_t i = 0; i < xg.size(); ++i)
            err1 = std::max(err1, std::abs(V1.at(k, i) - hopf_lax_abs(t, xg.axis(0).node(i))));
    }
    R.pass[0] = err1 <= 0.05 && seconds <= 10.0;
    std::snprintf(d, sizeof d, "max err %.4f (tol 0.05), %.2f s (limit 10)", err1, seconds);
    R.detail[0] = d;
    write_field_csv(V1.field(), art);

    // ---- 2: Lagrange reduction, phi = indicator{0} -------------------
    auto problem2 = build_problem(LagrangianModel::quadratic(xg, box1(-21.0, 21.0, 211)),
                                  TerminalCost::indicator_point(xg, Vec{0.0}));
    ValueField V2 = solve_dp(problem2, dt, 100, xg, VelocitySearchBox{20.0, 40, "acceptance"});
    double err2 = 0.0;
    for (std::size_t k = 10; k <= 100; ++k) {
        double t = dt * static_cast<double>(k);
        for (double x = -1.5; x <= 1.5 + 1e-12; x += 0.05) {
            Vec q{x};
            err2 = std::max(err2, std::abs(V2.interp_slice(k, q) - x * x / (2.0 * t)));
        }
    }
    R.pass[1] = err2 <= 0.05;
    std::snprintf(d, sizeof d, "max |V - x^2/(2t)| = %.4f (tol 0.05)", err2);
    R.detail[1] = d;
    write_field_csv(V2.field(), art);

    // ---- 3: Legendre-Fenchel properties ------------------------------
    {
        Grid ufine = box1(-2.0, 2.0, 401);
        Grid pfine = box1(-1.5, 1.5, 301);
        auto half_sq =
            SampledFunction::from_callable(ufine, [](const Vec& u) { return 0.5 * u[0] * u[0]; });
        auto conj = conjugate(half_sq, pfine);
        double fy_worst = 0.0;  // Fenchel-Young: f(u) + f*(p) - <p,u> >= 0
        for (std::size_t j = 0; j < pfine.size(); ++j)
            for (std::size_t i = 0; i < ufine.size(); ++i) {
                double r = half_sq[i] + conj.value[j] -
                           pfine.axis(0).node(j) * ufine.axis(0).node(i);
                fy_worst = std::min(fy_worst, r);
            }

        double bi_worst = 0.0;  // biconjugate of a convex input is the input
        for (const auto& f : {half_sq, SampledFunction::from_callable(
                                           ufine, [](const Vec& u) { return std::abs(u[0]); })}) {
            auto bi = biconjugate(f);
            for (std::size_t i = 0; i < ufine.size(); ++i)
                bi_worst = std::max(bi_worst, std::abs(bi[i] - f[i]));
        }

        // quartic conjugate at p = 1: sup_u (u - u^4/4) = 3/4 at u = 1
        auto quart =
            SampledFunction::from_callable(ufine, [](const Vec& u) { return 0.25 * std::pow(u[0], 4); });
        auto qconj = conjugate(quart, box1(-1.5, 1.5, 61));
        Vec one{1.0};
        double h1 = qconj.value.interp(one);
        double brute = -kPlusInfinity;
        for (std::size_t i = 0; i < ufine.size(); ++i)
            brute = std::max(brute, ufine.axis(0).node(i) - quart[i]);

        R.pass[2] = fy_worst >= -1e-9 && bi_worst <= 1e-9 && std::abs(h1 - 0.75) <= 1e-4 &&
                    std::abs(h1 - brute) <= 1e-4;
        std::snprintf(d, sizeof d,
                      "Fenchel-Young min %.2e, biconjugate gap %.2e, H(1) = %.6f", fy_worst,
                      bi_worst, h1);
        R.detail[2] = d;
        art << fmt17(fy_worst) << ',' << fmt17(bi_worst) << ',' << fmt17(h1) << '\n';
    }

    // Hamiltonian table for the shared benchmark
    auto H1 = hamiltonian_table(problem1.lagrangian().eval(), xg, ug, box1(-3.0, 3.0, 121),
                                &problem1.lagrangian().theta());

    // ---- 4: viscosity certificate on the computed field --------------
    {
        auto pts = interior_sample_points(V1.field(), 0.1, 200, 77);
        HjSettings s;
        s.tol = tol_cert;
        std::size_t ok = 0;
        for (const Vec& z : pts) {
            auto sup = check_hj(V1.field(), H1, HjMode::Super, {z}, s);
            auto sub = check_hj(V1.field(), H1, HjMode::Sub, {z}, s);
            // an empty sampled superdifferential satisfies the subsolution
            // inequality vacuously: only an actual violator counts against
            if (sup.verdict == Verdict::Pass && sub.verdict != Verdict::Fail) ++ok;
        }
        double frac = static_cast<double>(ok) / static_cast<double>(pts.size());
        std::vector<Vec> tpts(pts.begin(), pts.begin() + 20);
        auto tech = check_technical(V1.field(), tpts);
        R.pass[3] = frac >= 0.99 && tech.verdict == Verdict::Pass;
        std::snprintf(d, sizeof d, "%.1f%% of %zu points pass both inequalities, technical %s",
                      100.0 * frac, pts.size(), to_string(tech.verdict));
        R.detail[3] = d;
        art << fmt17(frac) << ',' << to_string(tech.verdict) << '\n';
    }

    // ---- 5: comparison desk test on V +- 0.1 t ------------------------
    {
        const Grid& g = V1.field().grid();
        SampledFunction plus = V1.field(), minus = V1.field();
        for (std::size_t i = 0; i < g.size(); ++i) {
            double shift = 0.1 * g.point_flat(i)[0];
            plus[i] += shift;
            minus[i] -= shift;
        }
        auto pts = interior_sample_points(V1.field(), 0.3, 80, 131);
        HjSettings s;
        s.tol = 0.02;
        bool exact = true;
        for (const Vec& z : pts) {
            exact = exact && check_hj(plus, H1, HjMode::Super, {z}, s).verdict == Verdict::Pass &&
                    check_hj(plus, H1, HjMode::Equation, {z}, s).verdict == Verdict::Fail &&
                    check_hj(minus, H1, HjMode::SubLsc, {z}, s).verdict == Verdict::Pass &&
                    check_hj(minus, H1, HjMode::Equation, {z}, s).verdict == Verdict::Fail;
        }
        bool geq = compare_fields(plus, V1.field(), FieldRelation::Geq, 1e-9).verdict ==
                   Verdict::Pass;
        bool leq = compare_fields(minus, V1.field(), FieldRelation::Leq, 1e-9).verdict ==
                   Verdict::Pass;
        R.pass[4] = exact && geq && leq;
        std::snprintf(d, sizeof d,
                      "classification exact at %zu points: %s, ordering: %s/%s", pts.size(),
                      exact ? "yes" : "no", geq ? "geq" : "GEQ-FAIL", leq ? "leq" : "LEQ-FAIL");
        R.detail[4] = d;
        art << (exact && geq && leq ? "classified\n" : "misclassified\n");
    }

    // ---- 6: uniqueness desk test --------------------------------------
    {
        Grid xc = box1(-3.0, 3.0, 301);  // resolution 2 dx
        auto pc = build_problem(LagrangianModel::quadratic(xc, box1(-4.0, 4.0, 81)),
                                TerminalCost::analytic([](const Vec& y) { return std::abs(y[0]); }));
        ValueField Vc = solve_dp(pc, 2.0 * dt, 50, xc, search1);
        double gap = 0.0;
        for (std::size_t k = 5; k <= 50; ++k) {
            double t = 2.0 * dt * static_cast<double>(k);
            for (std::size_t i = 0; i < xc.size(); ++i) {
                Vec q{xc.axis(0).node(i)};
                gap = std::max(gap, std::abs(Vc.at(k, i) - V1.interp(t, q)));
            }
        }

        SampledFunction wrong = V1.field();  // terminal data phi + 1
        for (std::size_t i = 0; i < wrong.size(); ++i) wrong[i] += 1.0;
        bool all_fail = true;
        for (double x = -2.0; x <= 2.0 + 1e-12; x += 0.25) {
            auto r = check_initial(wrong, problem1.terminal(), {Vec{x}}, {}, tol_cert);
            all_fail = all_fail && r.verdict == Verdict::Fail;
        }
        R.pass[5] = gap <= 0.05 && all_fail;
        std::snprintf(d, sizeof d,
                      "resolution gap %.4f (tol 0.05), shifted data rejected everywhere: %s",
                      gap, all_fail ? "yes" : "no");
        R.detail[5] = d;
        art << fmt17(gap) << ',' << (all_fail ? "rejected" : "accepted") << '\n';
    }

    // ---- 7: viability suite -------------------------------------------
    {
        Grid box({Axis{-1.5, 1.5, 301}, Axis{-1.5, 1.5, 301}});
        auto K = DiscreteSet::implicit([](const Vec& z) { return norm(z) <= 1.0; }, box, 0.01);
        auto rot = VelocityMap::analytic(
            [](const Vec& y) { return std::vector<Vec>{Vec{-y[1], y[0]}}; }, 2.0);
        auto out = VelocityMap::analytic([](const Vec& y) { return std::vector<Vec>{y}; }, 2.0);

        std::vector<Vec> pts;
        for (std::size_t i = 0; i < 32; ++i) {
            double th = 2.0 * M_PI * static_cast<double>(i) / 32.0;
            pts.push_back(Vec{std::cos(th), std::sin(th)});
        }
        auto p_dirs = unit_directions(2, 32);
        std::vector<double> hs{0.02, 0.01, 0.005};

        auto dom_rot = check_viability_domain(K, rot, pts, 0.05);
        auto dom_out = check_viability_domain(K, out, pts, 0.05);
        bool ok = dom_rot.pass;
        for (const auto& p : dom_out.points) ok = ok && !p.pass;

        double worst_ratio = 0.0;
        for (const Vec& x : pts) {
            ok = ok && polar_condition(K, rot, x, p_dirs, 0.05).pass;
            ok = ok && !polar_condition(K, out, x, p_dirs, 0.05).pass;
            auto down = distance_descent(K, rot, x, 2.0, hs, 0.01);
            ok = ok && down.pass;
            for (const auto& step : down.steps) {
                ok = ok && step.ratio <= 0.1;
                worst_ratio = std::max(worst_ratio, step.ratio);
            }
            ok = ok && !distance_descent(K, out, x, 1.0, hs, 0.5).pass;
        }

        auto run = viable_euler(K, rot, Vec{1.0, 0.0}, 0.01, 2.0 * M_PI);
        double closure = dist(run.path.nodes.back(), Vec{1.0, 0.0});
        ok = ok && closure <= 0.15;

        R.pass[6] = ok;
        std::snprintf(d, sizeof d,
                      "32 boundary samples, worst descent ratio %.4f (tol 0.1), loop closure "
                      "%.4f (tol 0.15)",
                      worst_ratio, closure);
        R.detail[6] = d;
        art << fmt17(worst_ratio) << ',' << fmt17(closure) << '\n';
        write_trajectory_csv(run.path, art);
    }

    // ---- 8: epigraph-map support identity -----------------------------
    {
        double worst8 = 0.0;
        for (int withPotential : {0, 1}) {
            Grid xs = box1(-2.0, 2.0, 201);
            Grid us = box1(-4.0, 4.0, 161);
            auto L = LagrangianModel::quadratic(
                xs, us,
                withPotential ? LagrangianModel::Potential([](const Vec& x) { return dot(x, x); })
                              : LagrangianModel::Potential{});
            auto H = hamiltonian_table(L.eval(), xs, us, box1(-3.0, 3.0, 241), &L.theta());
            auto G = epigraph_velocity_map(L, H, 4.0);

            std::mt19937 rng(4242);
            std::uniform_real_distribution<double> ux(-1.0, 1.0), uq(-2.0, -0.5);
            for (int k = 0; k < 1000; ++k) {
                double x = ux(rng), pt = ux(rng), px = ux(rng), q = uq(rng);
                Vec y{0.5, x, 0.0};
                double got = G.sigma(y, Vec{pt, px, q});
                double want = -pt + std::abs(q) * H.query(Vec{x}, Vec{px / std::abs(q)});
                worst8 = std::max(worst8, std::abs(got - want));
                art << fmt17(got) << '\n';
            }
        }
        R.pass[7] = worst8 <= 1e-6;
        std::snprintf(d, sizeof d, "max support-function mismatch %.2e over 2000 draws (tol 1e-6)",
                      worst8);
        R.detail[7] = d;
    }

    // ---- 9: hypograph inequality along reconstructed trajectories -----
    {
        double worst9 = -kPlusInfinity;
        bool ok = true;
        const double eps = tol_cert;
        for (double x0 : {-2.0, -0.7, 0.4, 1.5}) {
            Vec x{x0};
            auto path = reconstruct_trajectory(V1, problem1, search1, 1.0, x);
            double W0 = V1.interp(1.0, x);
            double cost = 0.0;
            for (std::size_t j = 0; j < path.nodes.size(); ++j) {
                double s = path.step * static_cast<double>(j);
                double lhs = V1.interp(1.0 - s, path.nodes[j]);
                double margin = lhs - (W0 - cost - eps * s);
                worst9 = std::max(worst9, -margin);
                ok = ok && margin >= 0.0;
                if (j + 1 < path.nodes.size())
                    cost += path.step * problem1.lagrangian()(path.nodes[j], path.velocity(j));
            }
            write_trajectory_csv(path, art);
        }
        R.pass[8] = ok;
        std::snprintf(d, sizeof d, "worst violation %.2e along 4 trajectories (tol 0)", worst9);
        R.detail[8] = d;
    }

    R.artifacts = art.str();
    return R;
}

}  // namespace

int main() {
    static const char* names[9] = {
        "Hopf-Lax benchmark, closed-form oracle",
        "Lagrange reduction to a point target",
        "Legendre-Fenchel conjugate properties",
        "viscosity certificate on the computed field",
        "comparison classification of V +- 0.1 t",
        "uniqueness desk test (resolutions and shifted data)",
        "viability suite on the unit disk",
        "epigraph-map support identity",
        "hypograph inequality along trajectories",
    };

    set_thread_count(1);
    BatteryResult base = run_battery();
    bool all = true;
    for (int i = 0; i < 9; ++i) {
        std::cout << "criterion " << i + 1 << " (" << names[i]
                  << "): " << (base.pass[i] ? "PASS" : "FAIL") << " -- " << base.detail[i]
                  << "\n";
        all = all && base.pass[i];
    }

    bool deterministic = true;
    for (int n : {4, 8}) {
        set_thread_count(n);
        deterministic = deterministic && run_battery().artifacts == base.artifacts;
    }
    std::cout << "criterion 10 (byte-identical artifacts across 1/4/8 threads): "
              << (deterministic ? "PASS" : "FAIL") << "\n";
    all = all && deterministic;

    return all ? 0 : 1;
}
