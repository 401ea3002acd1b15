#include "hjb/problem.hpp"

#include <cmath>

namespace hjb {
namespace {

double max_u_norm(const Grid& u_box) {
    double m = 0.0;
    for (std::size_t i = 0; i < u_box.size(); ++i) m = std::max(m, norm(u_box.point_flat(i)));
    return m;
}

CoercivityWitness power_witness(const Grid& u_box, double exponent) {
    double rmax = max_u_norm(u_box) + 1.0;
    Grid rg{{make_axis(0.0, rmax, 257)}};
    SampledFunction th = SampledFunction::from_callable(
        rg, [exponent](const Vec& r) { return std::pow(r[0], exponent) / exponent; });
    return CoercivityWitness{std::move(th), 1.0};
}

}  // namespace

LagrangianModel LagrangianModel::quadratic(Grid x_box, Grid u_box, Potential potential) {
    LagrangianModel m;
    m.kind_ = LagrangianKind::Quadratic;
    m.x_box_ = std::move(x_box);
    m.u_box_ = std::move(u_box);
    m.theta_ = power_witness(m.u_box_, 2.0);
    m.x_independent_ = potential == nullptr;
    m.eval_ = [potential](const Vec& x, const Vec& u) {
        double v = 0.5 * dot(u, u);
        if (potential) v = sat_add(v, potential(x));
        return v;
    };
    return m;
}

LagrangianModel LagrangianModel::quartic(Grid x_box, Grid u_box, Potential potential) {
    LagrangianModel m;
    m.kind_ = LagrangianKind::Quartic;
    m.x_box_ = std::move(x_box);
    m.u_box_ = std::move(u_box);
    m.theta_ = power_witness(m.u_box_, 4.0);
    m.x_independent_ = potential == nullptr;
    m.eval_ = [potential](const Vec& x, const Vec& u) {
        double s = dot(u, u);
        double v = 0.25 * s * s;
        if (potential) v = sat_add(v, potential(x));
        return v;
    };
    return m;
}

LagrangianModel LagrangianModel::custom(Grid x_box, Grid u_box, LagrangianEval eval,
                                        CoercivityWitness theta, bool x_independent) {
    LagrangianModel m;
    m.kind_ = LagrangianKind::Custom;
    m.x_box_ = std::move(x_box);
    m.u_box_ = std::move(u_box);
    m.eval_ = std::move(eval);
    m.theta_ = std::move(theta);
    m.x_independent_ = x_independent;
    return m;
}

LagrangianModel LagrangianModel::custom_sampled(Grid x_box, Grid u_box, SampledFunction samples,
                                                CoercivityWitness theta, bool x_independent) {
    LagrangianModel m;
    m.kind_ = LagrangianKind::CustomSampled;
    m.x_box_ = std::move(x_box);
    m.u_box_ = std::move(u_box);
    m.theta_ = std::move(theta);
    m.x_independent_ = x_independent;
    auto table = std::make_shared<SampledFunction>(std::move(samples));
    const std::size_t nx = m.x_box_.dim();
    m.eval_ = [table, nx, x_independent](const Vec& x, const Vec& u) {
        Vec q(x_independent ? u.size() : nx + u.size());
        std::size_t off = 0;
        if (!x_independent)
            for (; off < nx; ++off) q[off] = x[off];
        for (std::size_t i = 0; i < u.size(); ++i) q[off + i] = u[i];
        return table->interp(q);
    };
    return m;
}

TerminalCost TerminalCost::analytic(std::function<double(const Vec&)> f) {
    TerminalCost t;
    t.kind_ = TerminalKind::Analytic;
    t.eval_ = std::move(f);
    return t;
}

TerminalCost TerminalCost::sampled(SampledFunction values) {
    TerminalCost t;
    t.kind_ = TerminalKind::Sampled;
    t.samples_ = std::move(values);
    t.eval_ = [tbl = std::make_shared<SampledFunction>(*t.samples_)](const Vec& x) {
        return tbl->interp(x);
    };
    return t;
}

TerminalCost TerminalCost::indicator_point(const Grid& x_grid, const Vec& z) {
    if (!x_grid.contains(z)) throw OutOfDomain("indicator_point: z outside the x-domain box");
    return indicator_set(x_grid, {x_grid.flat(x_grid.nearest(z))});
}

TerminalCost TerminalCost::indicator_set(const Grid& x_grid, std::vector<std::size_t> nodes) {
    TerminalCost t;
    t.kind_ = nodes.size() == 1 ? TerminalKind::IndicatorPoint : TerminalKind::IndicatorSet;
    SampledFunction s(x_grid, kPlusInfinity);
    for (std::size_t f : nodes) s[f] = 0.0;
    t.samples_ = std::move(s);
    auto tbl = std::make_shared<SampledFunction>(*t.samples_);
    // exact node membership, not interpolation: the cost is 0 only at the
    // snapped node(s)
    t.eval_ = [tbl](const Vec& x) {
        const Grid& g = tbl->grid();
        auto idx = g.nearest(x);
        Vec n = g.point(idx);
        for (std::size_t a = 0; a < g.dim(); ++a)
            if (std::abs(n[a] - x[a]) > 1e-9 * std::max(1.0, std::abs(x[a]))) return kPlusInfinity;
        return (*tbl)[g.flat(idx)];
    };
    return t;
}

SampledFunction TerminalCost::tabulate(const Grid& x_grid) const {
    if (samples_) {
        if (samples_->grid().size() == x_grid.size()) return *samples_;
        // resample indicator/sampled costs onto the requested grid by
        // exact node lookup (indicator) or interpolation (sampled)
    }
    SampledFunction out(x_grid, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval_(x_grid.point_flat(i));
    return out;
}

BolzaProblem::BolzaProblem(LagrangianModel lagrangian, TerminalCost terminal,
                           CoercivityReport coercivity)
    : L_(std::move(lagrangian)), phi_(std::move(terminal)), coercivity_(std::move(coercivity)) {}

BolzaProblem build_problem(LagrangianModel lagrangian, TerminalCost terminal) {
    const Grid& xg = lagrangian.x_box();
    const Grid& ug = lagrangian.u_box();

    // nonnegativity of L and convexity of each L(x,.) slice
    for (std::size_t xi = 0; xi < xg.size(); ++xi) {
        Vec x = xg.point_flat(xi);
        SampledFunction slice = SampledFunction::from_callable(
            ug, [&](const Vec& u) { return lagrangian(x, u); });
        for (std::size_t i = 0; i < slice.size(); ++i)
            if (!is_infinite(slice[i]) && slice[i] < -1e-12)
                throw ValidationFailed("build_problem: L < 0 at a sampled node");
        if (!midpoint_convex(slice, 1e-9))
            throw ValidationFailed("build_problem: L(x,.) not convex at a sampled slice");
    }

    // terminal cost nonnegativity on the grid
    SampledFunction phi_tab = terminal.tabulate(xg);
    for (std::size_t i = 0; i < phi_tab.size(); ++i)
        if (!is_infinite(phi_tab[i]) && phi_tab[i] < -1e-12)
            throw ValidationFailed("build_problem: terminal cost < 0 at a sampled node");

    CoercivityReport rep = check_coercivity(lagrangian.eval(), xg, ug, lagrangian.theta());
    if (!rep.pointwise_ok)
        throw ValidationFailed("build_problem: coercivity witness exceeds L at a sampled node");
    if (!rep.tail_ratio_increasing)
        throw ValidationFailed("build_problem: coercivity: Theta(r)/r not increasing at the tail");

    return BolzaProblem(std::move(lagrangian), std::move(terminal), std::move(rep));
}

TerminalCost lagrange_reduction(const Grid& x_grid, const Vec& z) {
    if (!x_grid.contains(z)) throw OutOfDomain("lagrange_reduction: z outside the x-domain box");
    return TerminalCost::indicator_point(x_grid, z);
}

double eval_action(const TrajectoryPath& path, const BolzaProblem& problem) {
    if (path.step <= 0.0 || path.nodes.size() < 2)
        throw std::invalid_argument("eval_action: need h > 0 and at least two nodes");
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
        Vec u = path.velocity(k);
        double lv = problem.lagrangian()(path.nodes[k], u);
        acc = sat_add(acc, is_infinite(lv) ? kPlusInfinity : path.step * lv);
        if (is_infinite(acc)) return kPlusInfinity;
    }
    return sat_add(acc, problem.terminal()(path.nodes.back()));
}

}  // namespace hjb
