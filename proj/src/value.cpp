#include "hjb/value.hpp"

#include <cmath>
#include <random>

#include "hjb/parallel.hpp"

namespace hjb {

VelocitySearchBox derive_search_box(const BolzaProblem& problem, double h, std::size_t m) {
    SampledFunction phi = problem.terminal().tabulate(problem.x_box());
    double phi_sup = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (!is_infinite(phi[i])) phi_sup = std::max(phi_sup, phi[i]);
    const double budget = (phi_sup + 1.0) / h;

    const CoercivityWitness& th = problem.lagrangian().theta();
    const Axis& rax = th.theta.grid().axis(0);
    double u_max = rax.node(1);
    for (std::size_t i = 0; i < rax.count; ++i) {
        if (is_infinite(th.theta[i])) break;
        if (th.theta[i] <= budget) u_max = std::max(u_max, rax.node(i));
    }
    VelocitySearchBox box;
    box.u_max = u_max;
    box.m = m;
    box.derivation = "largest sampled U with Theta(U) <= (sup finite phi + 1)/h = " +
                     std::to_string(budget) + " at h = " + std::to_string(h);
    return box;
}

ValueField::ValueField(double h, std::size_t steps, Grid x_grid, Provenance provenance)
    : h_(h), steps_(steps), x_grid_(std::move(x_grid)), provenance_(provenance) {
    std::vector<Axis> axes;
    axes.push_back(make_axis(0.0, h * static_cast<double>(steps), steps + 1));
    for (const Axis& a : x_grid_.axes()) axes.push_back(a);
    field_ = SampledFunction(Grid{axes}, kPlusInfinity);
}

double ValueField::interp_slice(std::size_t k, const Vec& x) const {
    // temporary slice view via joint interp at the exact time node
    Vec q(1 + x.size());
    q[0] = field_.grid().axis(0).node(k);
    for (std::size_t i = 0; i < x.size(); ++i) q[1 + i] = x[i];
    return field_.interp(q);
}

double ValueField::interp(double t, const Vec& x) const {
    Vec q(1 + x.size());
    q[0] = t;
    for (std::size_t i = 0; i < x.size(); ++i) q[1 + i] = x[i];
    return field_.interp(q);
}

namespace {

// enumerate the velocity sample box lexicographically (axis 0 slowest)
struct VelocityEnumerator {
    const VelocitySearchBox& box;
    std::size_t dim;
    std::size_t count() const {
        std::size_t c = 1;
        for (std::size_t a = 0; a < dim; ++a) c *= box.samples_per_axis();
        return c;
    }
    Vec at(std::size_t flat) const {
        Vec v(dim);
        for (std::size_t a = dim; a-- > 0;) {
            v[a] = box.sample(flat % box.samples_per_axis());
            flat /= box.samples_per_axis();
        }
        return v;
    }
};

}  // namespace

ValueField solve_dp(const BolzaProblem& problem, double h, std::size_t steps,
                    const Grid& x_grid, const VelocitySearchBox& search) {
    if (h <= 0.0) throw std::invalid_argument("solve_dp: h must be positive");
    for (std::size_t a = 0; a < x_grid.dim(); ++a) {
        double half = 0.5 * (x_grid.axis(a).hi - x_grid.axis(a).lo);
        if (search.u_max * h > half)
            throw EmptySearch("solve_dp: U_max * h exceeds the x-domain half-width");
    }

    ValueField V(h, steps, x_grid, Provenance::Dp);
    SampledFunction phi = problem.terminal().tabulate(x_grid);
    const std::size_t nx = x_grid.size();
    for (std::size_t i = 0; i < nx; ++i) V.at(0, i) = phi[i];

    const VelocityEnumerator vel{search, x_grid.dim()};
    const std::size_t nv = vel.count();
    const LagrangianEval L = problem.lagrangian().eval();

    SampledFunction prev_slice(x_grid, 0.0);

    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t i = 0; i < nx; ++i) prev_slice[i] = V.at(k, i);
        parallel_for(nx, [&](std::size_t i) {
            const Vec x = x_grid.point_flat(i);
            double best = kPlusInfinity;
            for (std::size_t vi = 0; vi < nv; ++vi) {
                const Vec v = vel.at(vi);
                const double tail = prev_slice.interp(x + h * v);
                if (is_infinite(tail)) continue;
                const double lv = L(x, v);
                if (is_infinite(lv)) continue;
                const double cand = h * lv + tail;
                if (cand < best) best = cand;  // strict: first (lexicographic) minimum wins
            }
            V.at(k + 1, i) = best;
        });
    }

    bool all_inf = true;
    for (std::size_t i = 0; i < nx && all_inf; ++i) all_inf = is_infinite(V.at(steps, i));
    V.set_infeasible(all_inf);
    return V;
}

double hopf_lax_oracle(const BolzaProblem& problem, double t, const Vec& x) {
    if (!problem.lagrangian().x_independent())
        throw std::invalid_argument("hopf_lax_oracle: L must be x-independent");
    if (t <= 0.0) throw std::invalid_argument("hopf_lax_oracle: t must be positive");
    const Grid& yg = problem.x_box();
    const LagrangianEval L = problem.lagrangian().eval();
    double best = kPlusInfinity;
    for (std::size_t i = 0; i < yg.size(); ++i) {
        Vec y = yg.point_flat(i);
        double pv = problem.terminal()(y);
        if (is_infinite(pv)) continue;
        Vec u = y - x;
        u *= 1.0 / t;
        double lv = L(x, u);
        if (is_infinite(lv)) continue;
        best = std::min(best, t * lv + pv);
    }
    return best;
}

namespace {

double segment_cost(const BolzaProblem& problem, double h, const Vec& a, const Vec& b) {
    Vec u = b - a;
    u *= 1.0 / h;
    double lv = problem.lagrangian()(a, u);
    return is_infinite(lv) ? kPlusInfinity : h * lv;
}

// cost terms touched by node k of the path
double local_cost(const BolzaProblem& problem, double h, const std::vector<Vec>& y,
                  std::size_t k) {
    double c = segment_cost(problem, h, y[k - 1], y[k]);
    if (k + 1 < y.size()) c = sat_add(c, segment_cost(problem, h, y[k], y[k + 1]));
    else c = sat_add(c, problem.terminal()(y[k]));
    return c;
}

}  // namespace

DirectMinimizeResult direct_minimize(const BolzaProblem& problem, double t, const Vec& x,
                                     std::size_t segments, std::size_t restarts,
                                     std::uint32_t seed) {
    if (segments < 1) throw std::invalid_argument("direct_minimize: need N >= 1");
    const double h = t / static_cast<double>(segments);
    const Grid& xg = problem.x_box();
    const std::size_t d = xg.dim();

    // finite-terminal-cost target nodes, ranked by straight-line action
    std::vector<std::size_t> targets;
    SampledFunction phi = problem.terminal().tabulate(xg);
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (!is_infinite(phi[i])) targets.push_back(i);
    if (targets.empty()) throw NoFiniteCost("direct_minimize: terminal cost identically +inf");

    auto straight_action = [&](const Vec& z) {
        Vec u = z - x;
        u *= 1.0 / t;
        double lv = problem.lagrangian()(x, u);
        return is_infinite(lv) ? kPlusInfinity : t * lv + phi[xg.flat(xg.nearest(z))];
    };
    std::size_t best_target = targets[0];
    for (std::size_t i : targets)
        if (straight_action(xg.point_flat(i)) < straight_action(xg.point_flat(best_target)))
            best_target = i;

    std::mt19937 rng(seed);
    DirectMinimizeResult best;
    const bool indicator_phi = problem.terminal().kind() == TerminalKind::IndicatorPoint ||
                               problem.terminal().kind() == TerminalKind::IndicatorSet;

    for (std::size_t r = 0; r <= restarts; ++r) {
        // initial path: straight line to a finite-cost target
        std::size_t target = best_target;
        if (r > 0) {
            std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
            target = targets[pick(rng)];
        }
        Vec z = xg.point_flat(target);

        auto descend = [&](std::vector<Vec>& y, double hl) {
            const std::size_t n = y.size() - 1;
            for (int sweep = 0; sweep < 400; ++sweep) {
                double moved = 0.0;
                for (std::size_t k = 1; k <= n; ++k) {
                    const bool endpoint = k == n;
                    for (std::size_t a = 0; a < d; ++a) {
                        const Axis& ax = xg.axis(a);
                        double cur = y[k][a];
                        double best_c = cur;
                        double best_v = local_cost(problem, hl, y, k);
                        auto try_c = [&](double c) {
                            if (c < ax.lo || c > ax.hi) return;
                            y[k][a] = c;
                            double v = local_cost(problem, hl, y, k);
                            if (v < best_v - 1e-15) {
                                best_v = v;
                                best_c = c;
                            }
                        };
                        if (endpoint && indicator_phi) {
                            // terminal cost finite only at grid nodes
                            for (std::size_t i = 0; i < ax.count; ++i) try_c(ax.node(i));
                        } else {
                            // coarse scan, then golden-section refine in the best cell
                            const int scan = 32;
                            double lo = std::max(ax.lo, cur - 0.25 * (ax.hi - ax.lo));
                            double hi = std::min(ax.hi, cur + 0.25 * (ax.hi - ax.lo));
                            for (int i = 0; i <= scan; ++i)
                                try_c(lo + (hi - lo) * static_cast<double>(i) / scan);
                            double dl = (hi - lo) / scan;
                            double gl = std::max(ax.lo, best_c - dl), gh = std::min(ax.hi, best_c + dl);
                            constexpr double invphi = 0.6180339887498949;
                            double c1 = gh - invphi * (gh - gl), c2 = gl + invphi * (gh - gl);
                            y[k][a] = c1;
                            double f1 = local_cost(problem, hl, y, k);
                            y[k][a] = c2;
                            double f2 = local_cost(problem, hl, y, k);
                            for (int it = 0; it < 48; ++it) {
                                if (f1 < f2) {
                                    gh = c2; c2 = c1; f2 = f1;
                                    c1 = gh - invphi * (gh - gl);
                                    y[k][a] = c1;
                                    f1 = local_cost(problem, hl, y, k);
                                } else {
                                    gl = c1; c1 = c2; f1 = f2;
                                    c2 = gl + invphi * (gh - gl);
                                    y[k][a] = c2;
                                    f2 = local_cost(problem, hl, y, k);
                                }
                            }
                            try_c(0.5 * (gl + gh));
                        }
                        y[k][a] = best_c;
                        moved = std::max(moved, std::abs(best_c - cur));
                    }
                }
                if (moved < 1e-10) break;
            }
        };

        // coarse-to-fine: coordinate sweeps propagate changes one node per
        // pass, so descend on doubled segment counts and interpolate up
        std::vector<std::size_t> levels;
        for (std::size_t n = segments; n > 1; n = (n + 1) / 2) levels.push_back(n);
        levels.push_back(1);
        std::reverse(levels.begin(), levels.end());

        std::vector<Vec> y{x, z};
        descend(y, t);
        for (std::size_t li = 1; li < levels.size(); ++li) {
            const std::size_t n = levels[li];
            const std::size_t prev_n = y.size() - 1;
            std::vector<Vec> fine(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                double s = static_cast<double>(k) * static_cast<double>(prev_n) /
                           static_cast<double>(n);
                std::size_t j = std::min(static_cast<std::size_t>(s), prev_n - 1);
                double fr = s - static_cast<double>(j);
                fine[k] = y[j] + fr * (y[j + 1] - y[j]);
            }
            y = std::move(fine);
            if (r > 0) {
                std::normal_distribution<double> jitter(0.0, 0.05);
                for (std::size_t k = 1; k < n; ++k)
                    for (std::size_t a = 0; a < d; ++a)
                        y[k][a] = std::clamp(y[k][a] + jitter(rng), xg.axis(a).lo, xg.axis(a).hi);
            }
            descend(y, t / static_cast<double>(n));
        }

        TrajectoryPath path{0.0, h, y};
        double cost = eval_action(path, problem);
        if (cost < best.cost) {
            best.cost = cost;
            best.path = std::move(path);
        }
    }
    if (is_infinite(best.cost)) throw NoFiniteCost("direct_minimize: all restarts ended at +inf");
    return best;
}

TrajectoryPath reconstruct_trajectory(const ValueField& field, const BolzaProblem& problem,
                                      const VelocitySearchBox& search, double t, const Vec& x) {
    if (field.provenance() != Provenance::Dp)
        throw std::invalid_argument("reconstruct_trajectory: field provenance must be dp");
    const double h = field.h();
    const std::size_t k_t = static_cast<std::size_t>(std::llround(t / h));
    if (k_t < 1 || k_t > field.steps())
        throw std::invalid_argument("reconstruct_trajectory: t outside the field's time grid");
    if (is_infinite(field.interp_slice(k_t, x)))
        throw Stuck("reconstruct_trajectory: V(t,x) = +inf");

    const Grid& xg = field.x_grid();
    const VelocityEnumerator vel{search, xg.dim()};
    const std::size_t nv = vel.count();
    const LagrangianEval L = problem.lagrangian().eval();

    TrajectoryPath path{0.0, h, {x}};
    Vec y = x;
    for (std::size_t k = k_t; k-- > 0;) {
        double best = kPlusInfinity;
        Vec best_v(xg.dim());
        bool found = false;
        for (std::size_t vi = 0; vi < nv; ++vi) {
            const Vec v = vel.at(vi);
            const double tail = field.interp_slice(k, y + h * v);
            if (is_infinite(tail)) continue;
            const double lv = L(y, v);
            if (is_infinite(lv)) continue;
            const double cand = h * lv + tail;
            if (cand < best) {
                best = cand;
                best_v = v;
                found = true;
            }
        }
        if (!found) throw Stuck("reconstruct_trajectory: all sampled velocities give +inf");
        y = y + h * best_v;
        path.nodes.push_back(y);
    }
    return path;
}

}  // namespace hjb
