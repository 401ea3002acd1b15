#include "hjb/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hjb {

namespace {

double max_step(const Grid& g) {
    double s = 0.0;
    for (std::size_t a = 0; a < g.dim(); ++a) s = std::max(s, g.axis(a).step());
    return s;
}

double step_sum(const Grid& g) {
    double s = 0.0;
    for (std::size_t a = 0; a < g.dim(); ++a) s += g.axis(a).step();
    return s;
}

// central finite-difference gradient at a node, one-sided at edges
Vec fd_gradient(const SampledFunction& W, const std::vector<std::size_t>& idx) {
    const Grid& g = W.grid();
    Vec grad(g.dim());
    for (std::size_t a = 0; a < g.dim(); ++a) {
        std::size_t lo = idx[a] > 0 ? idx[a] - 1 : idx[a];
        std::size_t hi = idx[a] + 1 < g.axis(a).count ? idx[a] + 1 : idx[a];
        if (lo == hi) continue;
        auto il = idx, ih = idx;
        il[a] = lo;
        ih[a] = hi;
        double vl = W.at(il), vh = W.at(ih);
        if (is_infinite(vl) || is_infinite(vh)) continue;
        grad[a] = (vh - vl) / (static_cast<double>(hi - lo) * g.axis(a).step());
    }
    return grad;
}

// spatial kink detector: second difference large relative to the step
bool near_kink(const SampledFunction& W, const std::vector<std::size_t>& idx) {
    const Grid& g = W.grid();
    for (std::size_t a = 1; a < g.dim(); ++a) {  // spatial axes only
        if (idx[a] == 0 || idx[a] + 1 >= g.axis(a).count) return true;
        auto il = idx, ih = idx;
        il[a] -= 1;
        ih[a] += 1;
        double vl = W.at(il), vc = W.at(idx), vh = W.at(ih);
        if (is_infinite(vl) || is_infinite(vc) || is_infinite(vh)) return true;
        if (std::abs(vh - 2.0 * vc + vl) > 0.5 * g.axis(a).step()) return true;
    }
    return false;
}

}  // namespace

std::vector<Vec> interior_sample_points(const SampledFunction& W, double t_min,
                                        std::size_t count, std::uint32_t seed) {
    const Grid& g = W.grid();
    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    std::vector<Vec> points;
    for (std::size_t tries = 0; tries < 200 * count && points.size() < count; ++tries) {
        std::size_t f = pick(rng);
        auto idx = g.unflat(f);
        Vec z = g.point(idx);
        if (z[0] < t_min) continue;
        if (idx[0] == 0 || idx[0] + 1 >= g.axis(0).count) continue;
        if (is_infinite(W[f])) continue;
        if (near_kink(W, idx)) continue;
        points.push_back(z);
    }
    return points;
}

CheckResult check_hj(const SampledFunction& W, const HamiltonianTable& H, HjMode mode,
                     const std::vector<Vec>& points, const HjSettings& settings) {
    const Grid& g = W.grid();
    const std::size_t d = g.dim();
    const double radius =
        settings.sample_radius > 0.0 ? settings.sample_radius : 3.0 * max_step(g);
    const double delta = settings.delta > 0.0 ? settings.delta : 0.5 * step_sum(g);
    const DifferentialSign sign =
        mode == HjMode::Sub ? DifferentialSign::Super : DifferentialSign::Sub;

    CheckResult result;
    result.name = mode == HjMode::Super      ? "hj_supersolution"
                  : mode == HjMode::Sub      ? "hj_subsolution"
                  : mode == HjMode::Equation ? "hj_equation"
                                             : "hj_subsolution_lsc";
    result.verdict = Verdict::Pass;
    std::size_t vacuous = 0;

    for (const Vec& z : points) {
        if (z[0] <= 0.0) throw OutOfDomain("check_hj: sample point with t <= 0");
        auto idx = g.nearest(z);
        Vec grad = fd_gradient(W, idx);
        std::vector<Axis> axes(d);
        for (std::size_t a = 0; a < d; ++a)
            axes[a] = Axis{grad[a] - settings.p_window, grad[a] + settings.p_window,
                           settings.p_nodes};
        Grid p_grid(axes);

        auto sample = differential_sample(W, g.point(idx), sign, radius, delta, p_grid);
        if (sample.accepted.empty()) {
            ++vacuous;
            continue;
        }
        for (const Vec& p : sample.accepted) {
            Vec x(d - 1), px(d - 1);
            for (std::size_t a = 1; a < d; ++a) {
                x[a - 1] = z[a];
                px[a - 1] = -p[a];
            }
            if (!H.p_grid().contains(px))
                throw OutOfTable("check_hj: -p_x outside the Hamiltonian p-grid");
            double residual = p[0] + H.query(x, px);
            bool bad = false;
            switch (mode) {
                case HjMode::Super: bad = residual < -settings.tol; break;
                case HjMode::Sub:
                case HjMode::SubLsc: bad = residual > settings.tol; break;
                case HjMode::Equation: bad = std::abs(residual) > settings.tol; break;
            }
            double score = mode == HjMode::Super ? -residual
                           : mode == HjMode::Equation ? std::abs(residual)
                                                      : residual;
            if (score > result.worst_residual) {
                result.worst_residual = score;
                result.witness = z;
            }
            if (bad) result.verdict = Verdict::Fail;
        }
    }
    result.vacuous_fraction =
        points.empty() ? 1.0 : static_cast<double>(vacuous) / static_cast<double>(points.size());
    if (result.verdict == Verdict::Pass && result.vacuous_fraction > 0.5) {
        result.verdict = Verdict::Inconclusive;
        result.note = "more than half of the sample points had empty differential samples";
    }
    return result;
}

CheckResult check_initial(const SampledFunction& W, const TerminalCost& phi,
                          const std::vector<Vec>& boundary_points,
                          const std::vector<double>& h_sequence, double tol) {
    const Grid& g = W.grid();
    const std::size_t d = g.dim();
    std::vector<double> hs = h_sequence;
    if (hs.empty()) hs = scale_sequence(0.1, 2.0 * g.axis(0).step());

    CheckResult result;
    result.name = "initial_condition";
    result.verdict = Verdict::Pass;

    for (const Vec& x : boundary_points) {
        std::vector<double> profile;
        for (double h : hs) {
            double rho = std::sqrt(h);
            double best = kPlusInfinity;
            const int half = 10;
            std::size_t total = 1;
            for (std::size_t a = 0; a + 1 < d; ++a) total *= 2 * half + 1;
            for (std::size_t c = 0; c < total; ++c) {
                std::size_t t = c;
                Vec z(d);
                z[0] = h;
                double r2 = 0.0;
                for (std::size_t a = 1; a < d; ++a) {
                    int o = static_cast<int>(t % (2 * half + 1)) - half;
                    t /= 2 * half + 1;
                    double off = rho * static_cast<double>(o) / static_cast<double>(half);
                    z[a] = x[a - 1] + off;
                    r2 += off * off;
                }
                if (r2 > rho * rho * (1.0 + 1e-12)) continue;
                if (!g.contains(z)) continue;
                best = std::min(best, W.interp(z));
            }
            profile.push_back(best);
        }
        double estimate = profile.back();
        // stability of the tail (a grid cannot refute a liminf)
        std::size_t tail = std::min<std::size_t>(3, profile.size());
        double lo = kPlusInfinity, hi = -kPlusInfinity;
        for (std::size_t j = profile.size() - tail; j < profile.size(); ++j) {
            lo = std::min(lo, profile[j]);
            hi = std::max(hi, profile[j]);
        }
        bool stable = is_infinite(lo) == is_infinite(hi) && (is_infinite(lo) || hi - lo <= 2.0 * tol);

        double target = phi(x);
        bool ok;
        if (is_infinite(target))
            ok = estimate >= 1.0 / tol;
        else
            ok = !is_infinite(estimate) && std::abs(estimate - target) <= tol;

        double residual = is_infinite(target)
                              ? (ok ? 0.0 : 1.0 / tol - estimate)
                              : (is_infinite(estimate) ? kPlusInfinity
                                                       : std::abs(estimate - target));
        if (residual > result.worst_residual) {
            result.worst_residual = residual;
            result.witness = x;
        }
        if (!ok) {
            if (stable) {
                result.verdict = Verdict::Fail;
            } else if (result.verdict == Verdict::Pass) {
                result.verdict = Verdict::Inconclusive;
                result.note = "per-scale profile not stabilized at a failing point";
            }
        }
    }
    return result;
}

CheckResult check_technical(const SampledFunction& W, const std::vector<Vec>& points,
                            const TechnicalSettings& settings) {
    const std::size_t d = W.grid().dim();
    CheckResult result;
    result.name = "technical_conditions";
    result.verdict = Verdict::Pass;

    for (const Vec& z : points) {
        // null-direction profile must stay shallow
        auto null_est = contingent_derivative(W, z, Vec(d));
        double dive = 0.0;
        for (double v : null_est.profile)
            if (!is_infinite(v)) dive = std::min(dive, v);
        if (-dive > result.worst_residual) {
            result.worst_residual = -dive;
            result.witness = z;
        }
        if (dive < -settings.tol) {
            result.verdict = Verdict::Fail;
            result.note = "null-direction profile dives";
            continue;
        }

        // some backward direction (-1, u) must have a finite quotient
        bool finite_found = false;
        std::size_t per_axis = settings.u_samples;
        std::size_t total = 1;
        for (std::size_t a = 0; a + 1 < d; ++a) total *= per_axis;
        for (std::size_t c = 0; c < total && !finite_found; ++c) {
            std::size_t t = c;
            Vec dir(d);
            dir[0] = -1.0;
            for (std::size_t a = 1; a < d; ++a) {
                double s = per_axis == 1
                               ? 0.0
                               : -settings.u_max + 2.0 * settings.u_max *
                                                       static_cast<double>(t % per_axis) /
                                                       static_cast<double>(per_axis - 1);
                t /= per_axis;
                dir[a] = s;
            }
            finite_found = !is_infinite(contingent_derivative(W, z, dir).estimate);
        }
        if (!finite_found) {
            result.verdict = Verdict::Fail;
            result.note = "no finite backward quotient";
            result.witness = z;
        }
    }
    return result;
}

CheckResult compare_fields(const SampledFunction& W, const SampledFunction& V_ref,
                           FieldRelation relation, double tol) {
    const Grid& gw = W.grid();
    const Grid& gv = V_ref.grid();
    if (gw.dim() != gv.dim()) throw GridMismatch("compare_fields: dimension mismatch");
    for (std::size_t a = 0; a < gw.dim(); ++a) {
        if (std::abs(gw.axis(a).lo - gv.axis(a).lo) > 1e-9 ||
            std::abs(gw.axis(a).hi - gv.axis(a).hi) > 1e-9)
            throw GridMismatch("compare_fields: domain mismatch on axis " + std::to_string(a));
    }
    const bool same = [&] {
        for (std::size_t a = 0; a < gw.dim(); ++a)
            if (gw.axis(a).count != gv.axis(a).count) return false;
        return true;
    }();

    CheckResult result;
    result.name = relation == FieldRelation::Geq   ? "compare_geq"
                  : relation == FieldRelation::Leq ? "compare_leq"
                                                   : "compare_eq";
    result.verdict = Verdict::Pass;
    for (std::size_t i = 0; i < gw.size(); ++i) {
        double w = W[i];
        double v = same ? V_ref[i] : V_ref.interp(gw.point_flat(i));
        if (is_infinite(w) && is_infinite(v)) continue;
        double viol = 0.0;
        switch (relation) {
            case FieldRelation::Geq:
                viol = is_infinite(w) ? 0.0 : (is_infinite(v) ? kPlusInfinity : v - w);
                break;
            case FieldRelation::Leq:
                viol = is_infinite(v) ? 0.0 : (is_infinite(w) ? kPlusInfinity : w - v);
                break;
            case FieldRelation::Eq:
                viol = is_infinite(w) || is_infinite(v) ? kPlusInfinity : std::abs(w - v);
                break;
        }
        if (viol > result.worst_residual) {
            result.worst_residual = viol;
            result.witness = gw.point_flat(i);
        }
        if (viol > tol) result.verdict = Verdict::Fail;
    }
    return result;
}

CertificateReport run_certificate(const BolzaProblem& problem, const ValueField& candidate,
                                  const HamiltonianTable& H, const VerifySettings& settings) {
    const SampledFunction& W = candidate.field();
    const Grid& g = W.grid();
    const double dt = g.axis(0).step();
    const double tol = settings.tol > 0.0 ? settings.tol : 10.0 * step_sum(g);
    const double t_min = settings.t_min > 0.0 ? settings.t_min : 10.0 * dt;

    CertificateReport report;
    report.tol = tol;

    std::vector<Vec> interior =
        interior_sample_points(W, t_min, settings.interior_samples, settings.seed);

    HjSettings hj;
    hj.tol = tol;
    report.checks.push_back(check_hj(W, H, HjMode::Super, interior, hj));
    report.checks.push_back(check_hj(W, H, HjMode::Sub, interior, hj));
    report.checks.push_back(check_hj(W, H, HjMode::Equation, interior, hj));
    report.checks.push_back(check_hj(W, H, HjMode::SubLsc, interior, hj));

    // boundary sample: uniform spatial nodes with finite terminal cost
    std::vector<Vec> boundary;
    {
        const Grid& xg = candidate.x_grid();
        std::size_t want = std::max<std::size_t>(settings.boundary_samples, 1);
        std::size_t stride = std::max<std::size_t>(xg.size() / want, 1);
        for (std::size_t i = 0; i < xg.size() && boundary.size() < want; i += stride) {
            Vec x = xg.point_flat(i);
            boundary.push_back(x);
        }
    }
    report.checks.push_back(check_initial(W, problem.terminal(), boundary, {}, tol));

    std::vector<Vec> tech(interior.begin(),
                          interior.begin() + std::min<std::size_t>(interior.size(),
                                                                   settings.technical_samples));
    report.checks.push_back(check_technical(W, tech));

    if (settings.run_viability) {
        auto K = epigraph(W, GraphSide::Epi);
        auto G = epigraph_velocity_map(problem.lagrangian(), H,
                                       2.0 * derive_search_box(problem, candidate.h()).u_max);
        std::vector<Vec> pts;
        for (std::size_t i = 0; i < interior.size() && pts.size() < 8; i += 7) {
            const Vec& z = interior[i];
            Vec q(z.size() + 1);
            for (std::size_t a = 0; a < z.size(); ++a) q[a] = z[a];
            q[z.size()] = W.interp(z);
            pts.push_back(q);
        }
        auto vr = check_viability_domain(K, G, pts, settings.viability_tol);
        CheckResult cr;
        cr.name = "epigraph_viability";
        cr.verdict = vr.pass ? Verdict::Pass : Verdict::Fail;
        for (const auto& p : vr.points)
            if (p.best_ratio > cr.worst_residual) {
                cr.worst_residual = p.best_ratio;
                cr.witness = p.x;
            }
        report.checks.push_back(cr);
    }

    // reference DP field on the candidate's own grid
    {
        auto box = derive_search_box(problem, candidate.h());
        ValueField ref = solve_dp(problem, candidate.h(), candidate.steps(), candidate.x_grid(),
                                  box);
        report.checks.push_back(
            compare_fields(W, ref.field(), FieldRelation::Eq, settings.compare_tol));
    }

    // Lipschitz-constant estimate over the interior sample (reported, never
    // a verdict)
    double lip = 0.0;
    for (const Vec& z : interior) lip = std::max(lip, norm(fd_gradient(W, g.nearest(z))));
    report.lipschitz_estimate = lip;

    // conclusion
    auto find = [&](const std::string& n) -> const CheckResult* {
        for (const auto& c : report.checks)
            if (c.name == n) return &c;
        return nullptr;
    };
    const auto* eq = find("hj_equation");
    const auto* super = find("hj_supersolution");
    const auto* sub12 = find("hj_subsolution_lsc");
    const auto* init = find("initial_condition");
    const auto* tech_c = find("technical_conditions");
    const auto* cmp = find("compare_eq");
    auto pass = [](const CheckResult* c) { return c && c->verdict == Verdict::Pass; };
    if (pass(eq) && pass(super) && pass(sub12) && pass(init) && pass(tech_c) && pass(cmp)) {
        report.conclusion = "consistent with W = V (uniqueness class)";
    } else if (pass(super) && pass(init) && pass(tech_c)) {
        report.conclusion = "supersolution with matching data: W >= V (comparison)";
    } else if (pass(sub12) && pass(init)) {
        report.conclusion = "subsolution with matching data: W <= V (comparison)";
    } else {
        report.conclusion = "candidate rejected";
    }
    return report;
}

}  // namespace hjb
