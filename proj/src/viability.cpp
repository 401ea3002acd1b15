#include "hjb/viability.hpp"

#include <algorithm>
#include <cmath>

namespace hjb {

namespace {

constexpr int kRhoSamples = 5;

std::vector<double> default_scales(const DiscreteSet& K) {
    return scale_sequence(0.1, 2.0 * K.resolution());
}

}  // namespace

VelocityMap VelocityMap::analytic(Sampler samples, double truncation_radius) {
    if (!samples) throw std::invalid_argument("VelocityMap: null sampler");
    VelocityMap m;
    m.sampler_ = std::move(samples);
    m.radius_ = truncation_radius;
    return m;
}

VelocityMap VelocityMap::bolza_epigraph(const LagrangianModel& L, const HamiltonianTable& H,
                                        double truncation_radius) {
    VelocityMap m;
    m.lagrangian_ = std::make_shared<LagrangianModel>(L);
    m.hamiltonian_ = std::make_shared<HamiltonianTable>(H);
    m.radius_ = truncation_radius;
    return m;
}

std::vector<Vec> VelocityMap::samples(const Vec& y, double r) const {
    std::vector<Vec> out;
    if (sampler_) {
        for (const Vec& g : sampler_(y)) {
            if (norm(g) <= r + 1e-12) out.push_back(g);
        }
        return out;
    }
    // epigraph map: y = (t, x..., z); velocities (-1, u, -L(x,u) - rho)
    const Grid& ub = lagrangian_->u_box();
    const std::size_t n = ub.dim();
    Vec x(n);
    for (std::size_t a = 0; a < n; ++a) x[a] = y[1 + a];
    for (std::size_t ui = 0; ui < ub.size(); ++ui) {
        Vec u = ub.point_flat(ui);
        double lv = (*lagrangian_)(x, u);
        if (is_infinite(lv)) continue;
        for (int ri = 0; ri < kRhoSamples; ++ri) {
            double rho = radius_ * static_cast<double>(ri) / (kRhoSamples - 1.0);
            Vec g(n + 2);
            g[0] = -1.0;
            for (std::size_t a = 0; a < n; ++a) g[1 + a] = u[a];
            g[n + 1] = -lv - rho;
            if (norm(g) <= r + 1e-12) out.push_back(g);
        }
    }
    return out;
}

double VelocityMap::support(const Vec& y, const Vec& p) const {
    if (sampler_) {
        double s = -kPlusInfinity;
        for (const Vec& g : samples(y)) s = std::max(s, dot(p, g));
        return s;
    }
    // raw pairing against (-1, u, -L - rho); finite only when the cost
    // component of p is nonnegative
    const std::size_t n = p.size() - 2;
    const double c = p[n + 1];
    if (c < 0.0) return kPlusInfinity;
    Vec x(n), px(n);
    for (std::size_t a = 0; a < n; ++a) {
        x[a] = y[1 + a];
        px[a] = p[1 + a];
    }
    if (c == 0.0) {
        for (std::size_t a = 0; a < n; ++a)
            if (px[a] != 0.0) return kPlusInfinity;
        return -p[0];
    }
    double hv = hamiltonian_->query(x, (1.0 / c) * px);
    if (is_infinite(hv)) return kPlusInfinity;
    return -p[0] + c * hv;
}

double VelocityMap::sigma(const Vec& y, const Vec& p) const {
    if (!lagrangian_) throw std::logic_error("VelocityMap::sigma: not an epigraph map");
    // graph convention: q = -(raw cost component), so q < 0 is finite
    Vec raw = p;
    raw[p.size() - 1] = -p[p.size() - 1];
    return support(y, raw);
}

ViabilityReport check_viability_domain(const DiscreteSet& K, const VelocityMap& G,
                                       const std::vector<Vec>& points, double tol) {
    std::vector<double> hs = default_scales(K);
    ViabilityReport report;
    report.pass = true;
    for (const Vec& x : points) {
        std::vector<Vec> us = G.samples(x);
        if (us.empty()) throw EmptyValue("check_viability_domain: G(x) ∩ B_R sample is empty");
        ViabilityPointReport pr;
        pr.x = x;
        for (const Vec& u : us) {
            for (double h : hs) {
                double ratio = K.distance(x + h * u) / h;
                if (ratio < pr.best_ratio) {
                    pr.best_ratio = ratio;
                    pr.best_u = u;
                }
            }
        }
        pr.pass = pr.best_ratio <= tol;
        report.pass = report.pass && pr.pass;
        report.points.push_back(std::move(pr));
    }
    return report;
}

PolarReport polar_condition(const DiscreteSet& K, const VelocityMap& G, const Vec& x,
                            const std::vector<Vec>& p_sample, double tol) {
    ConeSample cone = contingent_cone(K, x, {}, p_sample, tol);
    ConeSample polar = polar_cone(cone, p_sample, tol);
    std::vector<Vec> us = G.samples(x);
    if (us.empty()) throw EmptyValue("polar_condition: G(x) ∩ B_R sample is empty");

    PolarReport report;
    report.pass = true;
    for (std::size_t i = 0; i < polar.directions.size(); ++i) {
        if (!polar.in[i]) continue;
        ++report.polar_count;
        const Vec& p = polar.directions[i];  // unit
        double inf_val = kPlusInfinity;
        for (const Vec& u : us) inf_val = std::min(inf_val, dot(p, u));
        if (inf_val > report.worst) {
            report.worst = inf_val;
            report.worst_p = p;
        }
        if (inf_val > tol) report.pass = false;
    }
    return report;
}

DescentTrace distance_descent(const DiscreteSet& K, const VelocityMap& G, const Vec& x,
                              double R, const std::vector<double>& h_grid, double eps,
                              double tol) {
    if (K.distance(x) > K.resolution())
        throw NotInSet("distance_descent: base point not in K");

    // truncation precondition: discarding samples outside B_R must not
    // change the achieved distance
    {
        std::vector<Vec> all = G.samples(x, kPlusInfinity);
        std::vector<Vec> trunc = G.samples(x, R);
        if (trunc.empty()) throw EmptyValue("distance_descent: G(x) ∩ B_R sample is empty");
        if (all.size() != trunc.size()) {
            double h = h_grid.empty() ? 0.1 : h_grid.front();
            double d_all = kPlusInfinity, d_trunc = kPlusInfinity;
            for (const Vec& u : all) d_all = std::min(d_all, K.distance(x + h * u));
            for (const Vec& u : trunc) d_trunc = std::min(d_trunc, K.distance(x + h * u));
            if (d_trunc > d_all + tol * h)
                throw TruncationViolated("distance_descent: B_R truncation changes dist(x+hG(x),K)");
        }
    }

    std::vector<Vec> us = G.samples(x, R);
    DescentTrace trace;
    trace.base = x;

    const double bound = std::sqrt(R * eps) * (1.0 + tol);
    for (double h : h_grid) {
        DescentStep step;
        step.h = h;
        double best = kPlusInfinity;
        for (const Vec& u : us) {
            double d = K.distance(x + h * u);
            if (d < best) {
                best = d;
                step.u_h = u;
            }
        }
        step.x_h = K.nearest(x + h * step.u_h);
        step.p_h = x + h * step.u_h - step.x_h;
        step.g = 0.5 * best * best;
        step.ratio = best / h;

        // normality spot checks from the descent argument
        double pn = norm(step.p_h);
        if (pn > 10.0 * K.resolution()) {
            Vec pu = (1.0 / pn) * step.p_h;
            ConeSample cone =
                contingent_cone(K, step.x_h, {}, unit_directions(x.size(), 16), 0.05);
            for (std::size_t i = 0; i < cone.directions.size(); ++i)
                if (cone.in[i] && dot(pu, cone.directions[i]) > 0.1) step.polar_normal_ok = false;
            double sv = G.support(x, -1.0 * step.p_h);
            double touch = dot(-1.0 * step.p_h, step.u_h);
            if (!is_infinite(sv) && std::abs(sv - touch) > tol * std::max(1.0, pn))
                step.support_touch_ok = false;
        }
        trace.steps.push_back(step);
    }

    // empirical h_eps: largest h whose entire tail of smaller steps meets
    // dist(x + h u_h, K)/h <= sqrt(R eps)
    std::vector<std::size_t> order(trace.steps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return trace.steps[a].h < trace.steps[b].h;
    });
    double h_eps = 0.0;
    for (std::size_t oi : order) {
        if (trace.steps[oi].ratio <= bound)
            h_eps = trace.steps[oi].h;
        else
            break;
    }
    trace.h_eps = h_eps;
    trace.pass = h_eps > 0.0;
    return trace;
}

EulerRun viable_euler(const DiscreteSet& K, const VelocityMap& G, const Vec& x0, double h,
                      double horizon, double tol_escape) {
    if (K.distance(x0) > K.resolution())
        throw NotInSet("viable_euler: start point not in K");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));

    EulerRun run;
    run.path.t_start = 0.0;
    run.path.step = h;
    run.path.nodes.push_back(x0);
    Vec y = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        std::vector<Vec> us = G.samples(y);
        if (us.empty()) throw EmptyValue("viable_euler: G(y) ∩ B_R sample is empty");
        Vec best_u = us[0];
        double best = kPlusInfinity;
        for (const Vec& u : us) {
            double d = K.distance(y + h * u);
            if (d < best) {
                best = d;
                best_u = u;
            }
        }
        if (best > h * tol_escape)
            throw Escaped("viable_euler: trajectory left the set at step " + std::to_string(k));
        run.max_pre_projection = std::max(run.max_pre_projection, best);
        run.max_pre_projection_ratio = std::max(run.max_pre_projection_ratio, best / (h * h));
        y = K.nearest(y + h * best_u);
        run.path.nodes.push_back(y);
    }
    return run;
}

VelocityMap epigraph_velocity_map(const LagrangianModel& L, const HamiltonianTable& H, double R) {
    return VelocityMap::bolza_epigraph(L, H, R);
}

double usc_margin(const HamiltonianTable& H, const Vec& x, double eps) {
    const Grid& xg = H.x_grid();
    const Grid& pg = H.p_grid();
    const std::size_t x_flat = xg.flat(xg.nearest(x));
    Vec x0 = xg.point_flat(x_flat);

    struct Node {
        std::size_t flat;
        double r;
    };
    std::vector<Node> nodes;
    nodes.reserve(xg.size());
    for (std::size_t i = 0; i < xg.size(); ++i) nodes.push_back({i, dist(xg.point_flat(i), x0)});
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.r < b.r; });

    // accept whole equal-distance groups at a time so a violator tied with
    // an admissible node cannot inflate the radius
    double radius = 0.0;
    std::size_t i = 0;
    while (i < nodes.size()) {
        std::size_t j = i;
        bool ok = true;
        while (j < nodes.size() && nodes[j].r <= nodes[i].r + 1e-12) {
            if (nodes[j].flat != x_flat) {
                for (std::size_t pi = 0; pi < pg.size(); ++pi) {
                    if (!(H.at(x_flat, pi) + eps > H.at(nodes[j].flat, pi))) {
                        ok = false;
                        break;
                    }
                }
            }
            if (!ok) break;
            ++j;
        }
        if (!ok) return radius;
        radius = nodes[j - 1].r;
        i = j;
    }
    return radius;
}

}  // namespace hjb
