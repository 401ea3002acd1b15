#include "hjb/transform.hpp"

#include <algorithm>
#include <cmath>

#include "hjb/parallel.hpp"

namespace hjb {
namespace {

// Intermediate stages of the iterated N-D transform mark slices with no
// finite sample by -kPlusInfinity ("contributes nothing to the sup").
constexpr double kMinusInfinity = -kPlusInfinity;

inline bool excluded(double v) { return v >= kInfThreshold || v <= -kInfThreshold; }

struct HullPoint {
    double u;
    double f;
    std::size_t node;  // index on the original axis
};

// Lower convex hull of (u, f) samples, u strictly increasing.
std::vector<HullPoint> lower_hull(const std::vector<HullPoint>& pts) {
    std::vector<HullPoint> hull;
    hull.reserve(pts.size());
    for (const HullPoint& p : pts) {
        while (hull.size() >= 2) {
            const HullPoint& a = hull[hull.size() - 2];
            const HullPoint& b = hull[hull.size() - 1];
            // keep b if it is strictly below chord a--p
            double cross = (b.u - a.u) * (p.f - a.f) - (p.u - a.u) * (b.f - a.f);
            if (cross > 0.0) break;
            hull.pop_back();
        }
        hull.push_back(p);
    }
    return hull;
}

// out[k] = max_i (p_k * u_i - f_i) over the finite samples; linear time in
// hull size + p count for ascending p. Returns false if no finite sample.
bool transform_1d(const Axis& u_axis, const double* f, std::size_t f_stride,
                  const Axis& p_axis, double* out, std::size_t out_stride,
                  bool* hit_boundary) {
    std::vector<HullPoint> pts;
    pts.reserve(u_axis.count);
    for (std::size_t i = 0; i < u_axis.count; ++i) {
        double v = f[i * f_stride];
        if (excluded(v)) continue;
        pts.push_back({u_axis.node(i), v, i});
    }
    if (pts.empty()) {
        for (std::size_t k = 0; k < p_axis.count; ++k) out[k * out_stride] = kMinusInfinity;
        return false;
    }
    std::vector<HullPoint> hull = lower_hull(pts);
    std::size_t v = 0;  // current hull vertex; advances with p
    for (std::size_t k = 0; k < p_axis.count; ++k) {
        double p = p_axis.node(k);
        while (v + 1 < hull.size()) {
            double slope = (hull[v + 1].f - hull[v].f) / (hull[v + 1].u - hull[v].u);
            if (p > slope) ++v;
            else break;
        }
        out[k * out_stride] = p * hull[v].u - hull[v].f;
        if (hit_boundary && (hull[v].node == 0 || hull[v].node == u_axis.count - 1))
            *hit_boundary = true;
    }
    return true;
}

}  // namespace

ConjugateResult conjugate(const SampledFunction& f, const Grid& p_grid) {
    const Grid& ug = f.grid();
    if (ug.dim() != p_grid.dim())
        throw TransformError("conjugate: u-grid and p-grid dimension mismatch");
    if (!f.has_finite_value()) throw AllInfinite();

    const std::size_t d = ug.dim();
    bool boundary = false;

    // Work array morphs axis by axis from u-axes to p-axes. After stage a
    // the array holds g_a(p_0..p_a, u_{a+1}..u_{d-1}); each next stage
    // conjugates -g along its axis (sup_u (p u + g) = conj(-g)(p)).
    std::vector<Axis> axes = ug.axes();
    std::vector<double> work(f.values());

    for (std::size_t a = 0; a < d; ++a) {
        if (a > 0) {
            for (double& v : work) {
                if (!excluded(v)) v = -v;
                else v = kPlusInfinity;  // empty slice marker: excluded from sup
            }
        }
        std::vector<Axis> out_axes = axes;
        out_axes[a] = p_grid.axis(a);
        Grid in_grid{axes}, out_grid{out_axes};
        std::vector<double> next(out_grid.size(), kMinusInfinity);

        // stride of axis a in row-major (last axis fastest) layout
        std::size_t in_stride = 1, out_stride = 1;
        for (std::size_t b = a + 1; b < d; ++b) {
            in_stride *= axes[b].count;
            out_stride *= out_axes[b].count;
        }
        const std::size_t n_lines = in_grid.size() / axes[a].count;
        for (std::size_t line = 0; line < n_lines; ++line) {
            // decompose line index into (outer, inner) around axis a
            std::size_t inner = line % in_stride;
            std::size_t outer = line / in_stride;
            const double* src = work.data() + outer * in_stride * axes[a].count + inner;
            double* dst = next.data() + outer * out_stride * out_axes[a].count + inner;
            transform_1d(axes[a], src, in_stride, out_axes[a], dst, out_stride,
                         a + 1 == d || d == 1 ? &boundary : &boundary);
        }
        axes = std::move(out_axes);
        work = std::move(next);
    }

    ConjugateResult r{SampledFunction(Grid{axes}, std::move(work)), boundary};
    return r;
}

namespace {

// 1D lower convex envelope evaluated back at the nodes.
SampledFunction hull_envelope_1d(const SampledFunction& f) {
    const Axis& ax = f.grid().axis(0);
    std::vector<HullPoint> pts;
    for (std::size_t i = 0; i < ax.count; ++i)
        if (!is_infinite(f[i])) pts.push_back({ax.node(i), f[i], i});
    if (pts.empty()) throw AllInfinite();
    std::vector<HullPoint> hull = lower_hull(pts);

    SampledFunction out(f.grid(), kPlusInfinity);
    std::size_t seg = 0;
    for (std::size_t i = pts.front().node; i <= pts.back().node; ++i) {
        double u = ax.node(i);
        while (seg + 1 < hull.size() && hull[seg + 1].u < u) ++seg;
        if (seg + 1 == hull.size()) {
            out[i] = hull[seg].f;
            continue;
        }
        const HullPoint& A = hull[seg];
        const HullPoint& B = hull[seg + 1];
        double t = (u - A.u) / (B.u - A.u);
        out[i] = (t <= 0.0) ? A.f : (t >= 1.0 ? B.f : A.f + t * (B.f - A.f));
    }
    // vertices are exact by construction
    for (const HullPoint& h : hull) out[h.node] = h.f;
    return out;
}

}  // namespace

SampledFunction biconjugate(const SampledFunction& f) {
    if (!f.has_finite_value()) throw AllInfinite();
    if (f.grid().dim() == 1) return hull_envelope_1d(f);

    // N-D: evaluate f**(u) = max_p <p,u> - f*(p) over the finite set of
    // per-axis sample slopes (the discrete subdifferentials), computing
    // f*(p) by direct max. Desk-scale sizes only.
    const Grid& g = f.grid();
    const std::size_t d = g.dim();
    std::vector<std::vector<double>> slopes(d);
    for (std::size_t a = 0; a < d; ++a) {
        std::vector<double> s;
        const double h = g.axis(a).step();
        const std::size_t stride = [&] {
            std::size_t st = 1;
            for (std::size_t b = a + 1; b < d; ++b) st *= g.axis(b).count;
            return st;
        }();
        const std::size_t lines = g.size() / g.axis(a).count;
        for (std::size_t line = 0; line < lines; ++line) {
            std::size_t inner = line % stride, outer = line / stride;
            const double* col = f.values().data() + outer * stride * g.axis(a).count + inner;
            for (std::size_t i = 0; i + 1 < g.axis(a).count; ++i) {
                double fa = col[i * stride], fb = col[(i + 1) * stride];
                if (is_infinite(fa) || is_infinite(fb)) continue;
                s.push_back((fb - fa) / h);
            }
        }
        if (s.empty()) s.push_back(0.0);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        slopes[a] = std::move(s);
    }
    // tensor set of slope vectors
    std::vector<Vec> pset;
    std::vector<std::size_t> cursor(d, 0);
    while (true) {
        Vec p(d);
        for (std::size_t a = 0; a < d; ++a) p[a] = slopes[a][cursor[a]];
        pset.push_back(p);
        std::size_t a = d;
        while (a-- > 0) {
            if (++cursor[a] < slopes[a].size()) break;
            cursor[a] = 0;
            if (a == 0) goto done;
        }
    }
done:
    std::vector<double> fstar(pset.size(), kPlusInfinity);
    parallel_for(pset.size(), [&](std::size_t k) {
        double best = -kPlusInfinity;
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (is_infinite(f[i])) continue;
            best = std::max(best, dot(pset[k], g.point_flat(i)) - f[i]);
        }
        fstar[k] = best;
    });
    SampledFunction out(g, kPlusInfinity);
    parallel_for(f.size(), [&](std::size_t i) {
        if (is_infinite(f[i])) return;  // outside the finite hull support
        Vec u = g.point_flat(i);
        double best = -kPlusInfinity;
        for (std::size_t k = 0; k < pset.size(); ++k)
            best = std::max(best, dot(pset[k], u) - fstar[k]);
        out[i] = best;
    });
    return out;
}

bool midpoint_convex(const SampledFunction& f, double tol) {
    const Grid& g = f.grid();
    const std::size_t d = g.dim();
    for (std::size_t a = 0; a < d; ++a) {
        std::size_t stride = 1;
        for (std::size_t b = a + 1; b < d; ++b) stride *= g.axis(b).count;
        const std::size_t lines = g.size() / g.axis(a).count;
        for (std::size_t line = 0; line < lines; ++line) {
            std::size_t inner = line % stride, outer = line / stride;
            const double* col = f.values().data() + outer * stride * g.axis(a).count + inner;
            for (std::size_t i = 0; i + 2 < g.axis(a).count; ++i) {
                double fa = col[i * stride], fm = col[(i + 1) * stride], fb = col[(i + 2) * stride];
                if (is_infinite(fa) || is_infinite(fb)) continue;  // saturating: inf dominates
                if (is_infinite(fm)) return false;                 // inf strictly inside a finite pair
                if (fm > 0.5 * (fa + fb) + tol) return false;
            }
        }
    }
    return true;
}

double CoercivityWitness::conjugate_at(double p_norm) const {
    const Axis& ax = theta.grid().axis(0);
    double best = -kPlusInfinity;
    for (std::size_t i = 0; i < ax.count; ++i) {
        if (is_infinite(theta[i])) continue;
        best = std::max(best, p_norm * ax.node(i) - theta[i]);
    }
    return best;
}

CoercivityReport check_coercivity(const LagrangianEval& L, const Grid& x_grid,
                                  const Grid& u_grid, const CoercivityWitness& theta) {
    CoercivityReport rep;
    rep.pointwise_ok = true;
    for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
        Vec x = x_grid.point_flat(xi);
        for (std::size_t ui = 0; ui < u_grid.size(); ++ui) {
            Vec u = u_grid.point_flat(ui);
            double lv = L(x, u);
            if (is_infinite(lv)) continue;
            // floor-node evaluation: a lower bound for nondecreasing Theta,
            // so chord interpolation overshoot cannot flag false violations
            double tv = theta.eval_floor(norm(u));
            if (is_infinite(tv) || lv >= tv - 1e-12) continue;
            rep.pointwise_ok = false;
            if (rep.violations.size() < 32) rep.violations.push_back({x, u, lv, tv});
        }
    }
    // Theta(r)/r sampled beyond the horizon must be nondecreasing.
    const Axis& rax = theta.theta.grid().axis(0);
    rep.tail_ratio_increasing = true;
    double prev = -kPlusInfinity;
    for (std::size_t i = 0; i < rax.count; ++i) {
        double r = rax.node(i);
        if (r < theta.superlinearity_horizon || r <= 0.0) continue;
        if (is_infinite(theta.theta[i])) break;
        double ratio = theta.theta[i] / r;
        rep.tail_radii.push_back(r);
        rep.tail_ratios.push_back(ratio);
        if (ratio < prev - 1e-12) rep.tail_ratio_increasing = false;
        prev = ratio;
    }
    // A flat tail ratio means linear growth: not superlinear.
    if (rep.tail_ratios.size() >= 2 &&
        rep.tail_ratios.back() <= rep.tail_ratios.front() + 1e-9)
        rep.tail_ratio_increasing = false;
    rep.pass = rep.pointwise_ok && rep.tail_ratio_increasing;
    return rep;
}

HamiltonianTable::HamiltonianTable(Grid x_grid, Grid p_grid, std::vector<double> values,
                                   std::vector<double> lipschitz_p)
    : x_grid_(std::move(x_grid)), p_grid_(std::move(p_grid)), lipschitz_p_(std::move(lipschitz_p)) {
    std::vector<Axis> axes = x_grid_.axes();
    for (const Axis& a : p_grid_.axes()) axes.push_back(a);
    joint_ = SampledFunction(Grid{axes}, std::move(values));
}

double HamiltonianTable::query(const Vec& x, const Vec& p) const {
    Vec q(x.size() + p.size());
    for (std::size_t i = 0; i < x.size(); ++i) q[i] = x[i];
    for (std::size_t i = 0; i < p.size(); ++i) q[x.size() + i] = p[i];
    return joint_.interp(q);
}

HamiltonianTable hamiltonian_table(const LagrangianEval& L, const Grid& x_grid,
                                   const Grid& u_grid, const Grid& p_grid,
                                   const CoercivityWitness* theta, double conv_tol,
                                   double bound_tol) {
    const std::size_t nx = x_grid.size();
    const std::size_t np = p_grid.size();
    std::vector<double> values(nx * np, 0.0);
    std::vector<double> lip(nx, 0.0);
    std::vector<char> slice_boundary(nx, 0);
    std::vector<std::string> slice_error(nx);

    parallel_for(nx, [&](std::size_t xi) {
        Vec x = x_grid.point_flat(xi);
        SampledFunction slice = SampledFunction::from_callable(
            u_grid, [&](const Vec& u) { return L(x, u); });
        if (!slice.has_finite_value()) {
            slice_error[xi] = "L(x,.) identically +inf";
            return;
        }
        SampledFunction env = biconjugate(slice);
        for (std::size_t i = 0; i < slice.size(); ++i) {
            if (is_infinite(slice[i]) != is_infinite(env[i]) ||
                (!is_infinite(slice[i]) && std::abs(slice[i] - env[i]) > conv_tol)) {
                slice_error[xi] = "L(x,.) fails biconjugate equality (not convex in u)";
                return;
            }
        }
        ConjugateResult c = conjugate(slice, p_grid);
        if (c.boundary_attained) slice_boundary[xi] = 1;
        for (std::size_t pi = 0; pi < np; ++pi) values[xi * np + pi] = c.value[pi];

        // per-x Lipschitz-in-p estimate: largest nodewise slope along p axes
        double m = 0.0;
        const std::size_t d = p_grid.dim();
        for (std::size_t a = 0; a < d; ++a) {
            std::size_t stride = 1;
            for (std::size_t b = a + 1; b < d; ++b) stride *= p_grid.axis(b).count;
            const double h = p_grid.axis(a).step();
            for (std::size_t pi = 0; pi < np; ++pi) {
                std::size_t ia = (pi / stride) % p_grid.axis(a).count;
                if (ia + 1 >= p_grid.axis(a).count) continue;
                m = std::max(m, std::abs(values[xi * np + pi + stride] - values[xi * np + pi]) / h);
            }
        }
        lip[xi] = m;

        // bound chain: -L(x,0) <= H(x,p) <= Theta*(p). The upper side is
        // only node-exact: H and Theta* take their sups over different node
        // sets, so allow the curvature quantization gap (~ Theta'' dr^2 / 8)
        // estimated from the witness's own second differences.
        double quant = 0.0;
        if (theta) {
            const SampledFunction& th = theta->theta;
            for (std::size_t i = 1; i + 1 < th.size(); ++i) {
                if (is_infinite(th[i - 1]) || is_infinite(th[i]) || is_infinite(th[i + 1]))
                    continue;
                quant = std::max(quant, std::abs(th[i + 1] - 2.0 * th[i] + th[i - 1]));
            }
            quant *= 0.5;
        }
        Vec zero(u_grid.dim());
        double l0 = L(x, zero);
        for (std::size_t pi = 0; pi < np; ++pi) {
            double H = values[xi * np + pi];
            if (!is_infinite(l0) && H < -l0 - bound_tol) {
                slice_error[xi] = "H(x,p) < -L(x,0)";
                return;
            }
            if (theta) {
                double up = theta->conjugate_at(norm(p_grid.point_flat(pi)));
                if (H > up + bound_tol + quant) {
                    slice_error[xi] = "H(x,p) > Theta*(p)";
                    return;
                }
            }
        }
    });

    for (std::size_t xi = 0; xi < nx; ++xi)
        if (!slice_error[xi].empty()) throw NotConvexInU("hamiltonian_table: " + slice_error[xi]);

    HamiltonianTable t(x_grid, p_grid, std::move(values), std::move(lip));
    bool any_boundary = false;
    for (char b : slice_boundary) any_boundary |= (b != 0);
    t.set_boundary_attained(any_boundary);

    // convexity of H(x,.) along each p axis, slice by slice
    for (std::size_t xi = 0; xi < nx; ++xi) {
        std::vector<double> sl(t.table().values().begin() + xi * np,
                               t.table().values().begin() + (xi + 1) * np);
        if (!midpoint_convex(SampledFunction(p_grid, std::move(sl)), 1e-9))
            throw TransformError("hamiltonian_table: H(x,.) not midpoint convex");
    }
    return t;
}

}  // namespace hjb
