#include "hjb/nonsmooth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hjb {

namespace {

double min_step(const Grid& g) {
    double s = kPlusInfinity;
    for (std::size_t a = 0; a < g.dim(); ++a) s = std::min(s, g.axis(a).step());
    return s;
}

}  // namespace

DiscreteSet DiscreteSet::from_points(std::vector<Vec> pts) {
    if (pts.empty()) throw std::invalid_argument("DiscreteSet: empty point cloud");
    DiscreteSet s;
    s.dim_ = pts[0].size();
    s.points_ = std::move(pts);
    s.resolution_ = 1e-12;
    return s;
}

DiscreteSet DiscreteSet::implicit(Predicate member, Grid box, double resolution) {
    if (!member) throw std::invalid_argument("DiscreteSet: null predicate");
    if (resolution <= 0.0) throw std::invalid_argument("DiscreteSet: resolution must be > 0");
    DiscreteSet s;
    s.dim_ = box.dim();
    s.member_ = std::move(member);
    s.box_ = std::move(box);
    s.resolution_ = resolution;
    return s;
}

bool DiscreteSet::member(const Vec& z) const {
    if (member_) return member_(z);
    for (const Vec& p : points_)
        if (dist(p, z) <= resolution_) return true;
    return false;
}

DiscreteSet::Projection DiscreteSet::project(const Vec& z) const {
    if (!member_) {
        // point cloud: linear scan, ties toward the lowest index
        Projection best{points_[0], dist(points_[0], z)};
        for (std::size_t i = 1; i < points_.size(); ++i) {
            double d = dist(points_[i], z);
            if (d < best.distance) best = {points_[i], d};
        }
        return best;
    }
    if (member_(z)) return {z, 0.0};

    const std::size_t d = dim_;
    // index steps per shell so that consecutive shells advance by roughly
    // the scan resolution on every axis
    long stride[Vec::kMaxDim];
    long center[Vec::kMaxDim];
    long hi_idx[Vec::kMaxDim];
    std::size_t max_shell = 0;
    for (std::size_t a = 0; a < d; ++a) {
        const Axis& ax = box_.axis(a);
        stride[a] = std::max(1L, std::lround(resolution_ / ax.step()));
        long c = std::lround((z[a] - ax.lo) / ax.step());
        center[a] = std::clamp(c, 0L, static_cast<long>(ax.count - 1));
        hi_idx[a] = static_cast<long>(ax.count - 1);
        max_shell = std::max(max_shell,
                             static_cast<std::size_t>(ax.count / static_cast<std::size_t>(stride[a])) + 2);
    }

    Projection best{z, kPlusInfinity};
    auto visit = [&](const long* off) {
        Vec y(d);
        for (std::size_t a = 0; a < d; ++a) {
            long i = center[a] + off[a] * stride[a];
            if (i < 0 || i > hi_idx[a]) return;
            y[a] = box_.axis(a).node(static_cast<std::size_t>(i));
        }
        if (!member_(y)) return;
        double dd = dist(y, z);
        if (dd < best.distance) best = {y, dd};
    };

    // expanding Chebyshev shells around the snapped query point
    for (std::size_t k = 0; k <= max_shell; ++k) {
        if (!is_infinite(best.distance) &&
            (static_cast<double>(k) - 1.0) * resolution_ > best.distance)
            break;
        long off[Vec::kMaxDim] = {0, 0, 0, 0};
        if (k == 0) {
            visit(off);
            continue;
        }
        const long kk = static_cast<long>(k);
        // enumerate faces: one axis pinned at +-k, earlier axes restricted
        // to |.| < k so each shell point appears once
        for (std::size_t pin = 0; pin < d; ++pin) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                off[pin] = sgn * kk;
                // iterate remaining axes
                std::size_t free_axes[Vec::kMaxDim];
                std::size_t nf = 0;
                for (std::size_t a = 0; a < d; ++a)
                    if (a != pin) free_axes[nf++] = a;
                long lim[Vec::kMaxDim];
                long cur[Vec::kMaxDim];
                for (std::size_t f = 0; f < nf; ++f) {
                    lim[f] = free_axes[f] < pin ? kk - 1 : kk;
                    cur[f] = -lim[f];
                    off[free_axes[f]] = cur[f];
                }
                while (true) {
                    visit(off);
                    std::size_t f = 0;
                    while (f < nf) {
                        if (++cur[f] <= lim[f]) {
                            off[free_axes[f]] = cur[f];
                            break;
                        }
                        cur[f] = -lim[f];
                        off[free_axes[f]] = cur[f];
                        ++f;
                    }
                    if (f == nf) break;
                }
            }
            off[pin] = 0;
        }
    }
    if (is_infinite(best.distance))
        throw NotInSet("DiscreteSet::project: no member point found in the bounding box");

    // local pattern-search refinement toward the true boundary
    double step = resolution_;
    for (int iter = 0; iter < 60 && step > resolution_ * 1e-10; ++iter) {
        bool improved = false;
        // 3^d neighborhood of the current best point
        std::size_t total = 1;
        for (std::size_t a = 0; a < d; ++a) total *= 3;
        for (std::size_t c = 0; c < total; ++c) {
            std::size_t t = c;
            Vec y = best.point;
            bool same = true;
            for (std::size_t a = 0; a < d; ++a) {
                int o = static_cast<int>(t % 3) - 1;
                t /= 3;
                if (o != 0) same = false;
                y[a] += o * step;
            }
            if (same) continue;
            if (!member_(y)) continue;
            double dd = dist(y, z);
            if (dd < best.distance - 1e-15) {
                best = {y, dd};
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

std::vector<double> scale_sequence(double h0, double floor) {
    std::vector<double> hs;
    double h = h0;
    for (int j = 0; j < 64 && h >= floor; ++j) {
        hs.push_back(h);
        h *= 0.5;
    }
    if (hs.empty()) hs.push_back(h0);
    return hs;
}

std::vector<Vec> unit_directions(std::size_t dim, std::size_t count) {
    std::vector<Vec> ds;
    if (dim == 1) {
        ds.push_back(Vec{1.0});
        ds.push_back(Vec{-1.0});
        return ds;
    }
    if (dim == 2) {
        for (std::size_t i = 0; i < count; ++i) {
            double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(count);
            ds.push_back(Vec{std::cos(th), std::sin(th)});
        }
        return ds;
    }
    if (dim == 3) {
        // Fibonacci sphere
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < count; ++i) {
            double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
            double r = std::sqrt(std::max(0.0, 1.0 - y * y));
            double th = golden * static_cast<double>(i);
            Vec v(3);
            v[0] = r * std::cos(th);
            v[1] = y;
            v[2] = r * std::sin(th);
            ds.push_back(v);
        }
        return ds;
    }
    std::mt19937 rng(9001);
    std::normal_distribution<double> g(0.0, 1.0);
    while (ds.size() < count) {
        Vec v(dim);
        for (std::size_t a = 0; a < dim; ++a) v[a] = g(rng);
        double n = norm(v);
        if (n < 1e-6) continue;
        v *= 1.0 / n;
        ds.push_back(v);
    }
    return ds;
}

ContingentEstimate contingent_derivative(const SampledFunction& W, const Vec& x, const Vec& u,
                                         const std::vector<double>& h_sequence) {
    const double wx = W.interp(x);
    if (is_infinite(wx)) throw OutOfDomain("contingent_derivative: base point outside dom(W)");
    const Grid& g = W.grid();
    const std::size_t d = g.dim();

    std::vector<double> hs = h_sequence;
    if (hs.empty()) hs = scale_sequence(0.1, 2.0 * min_step(g));

    ContingentEstimate out;
    out.h_sequence = hs;
    out.profile.assign(hs.size(), kPlusInfinity);

    // quotient along u itself; the windowed profile below exists to expose
    // dives to -infinity and to rescue directions that are only feasible
    // through nearby v, but for finite u-probes the finest scale is the
    // faithful liminf surrogate
    double u_estimate = kPlusInfinity;
    for (double h : hs) {
        double wy = W.interp(x + h * u);
        if (!is_infinite(wy)) u_estimate = (wy - wx) / h;
    }

    for (std::size_t j = 0; j < hs.size(); ++j) {
        const double h = hs[j];
        const double rho = std::sqrt(h);
        double best = kPlusInfinity;
        auto try_v = [&](const Vec& v) {
            if (dist(v, u) > rho * (1.0 + 1e-12)) return;
            double wy = W.interp(x + h * v);
            double q = is_infinite(wy) ? kPlusInfinity : (wy - wx) / h;
            best = std::min(best, q);
        };

        // interpolated probes on a small offset lattice around u
        const int half = 2;
        std::size_t total = 1;
        for (std::size_t a = 0; a < d; ++a) total *= 2 * half + 1;
        for (std::size_t c = 0; c < total; ++c) {
            std::size_t t = c;
            Vec v = u;
            for (std::size_t a = 0; a < d; ++a) {
                int o = static_cast<int>(t % (2 * half + 1)) - half;
                t /= 2 * half + 1;
                v[a] += rho * static_cast<double>(o) / static_cast<double>(half);
            }
            try_v(v);
        }

        // exact grid-node probes near x + h*u (carry indicator-style fields)
        Vec target = x + h * u;
        long lo_idx[Vec::kMaxDim], hi_idx[Vec::kMaxDim];
        bool any = true;
        for (std::size_t a = 0; a < d; ++a) {
            const Axis& ax = g.axis(a);
            double r = h * rho;
            long lo = static_cast<long>(std::ceil((target[a] - r - ax.lo) / ax.step() - 1e-9));
            long hi = static_cast<long>(std::floor((target[a] + r - ax.lo) / ax.step() + 1e-9));
            lo = std::max(lo, 0L);
            hi = std::min(hi, static_cast<long>(ax.count - 1));
            if (lo > hi) any = false;
            lo_idx[a] = lo;
            hi_idx[a] = hi;
        }
        if (any) {
            long cur[Vec::kMaxDim];
            for (std::size_t a = 0; a < d; ++a) cur[a] = lo_idx[a];
            bool done = false;
            while (!done) {
                std::vector<std::size_t> idx(d);
                Vec y(d);
                for (std::size_t a = 0; a < d; ++a) {
                    idx[a] = static_cast<std::size_t>(cur[a]);
                    y[a] = g.axis(a).node(idx[a]);
                }
                Vec v = (1.0 / h) * (y - x);
                if (dist(v, u) <= rho * (1.0 + 1e-12)) {
                    double wy = W.at(idx);
                    double q = is_infinite(wy) ? kPlusInfinity : (wy - wx) / h;
                    best = std::min(best, q);
                }
                done = true;
                for (std::size_t a = d; a-- > 0;) {
                    if (++cur[a] <= hi_idx[a]) {
                        done = false;
                        break;
                    }
                    cur[a] = lo_idx[a];
                }
            }
        }
        out.profile[j] = best;
    }
    out.estimate = is_infinite(u_estimate) ? out.profile.back() : u_estimate;
    return out;
}

DifferentialSample differential_sample(const SampledFunction& W, const Vec& x,
                                       DifferentialSign sign, double radius, double delta,
                                       const Grid& p_grid) {
    const double wx = W.interp(x);
    if (is_infinite(wx)) throw OutOfDomain("differential_sample: base point outside dom(W)");
    const Grid& g = W.grid();
    const std::size_t d = g.dim();

    // collect sample nodes in the test ball once
    struct Probe {
        Vec dy;
        double ndy;
        double w;
        bool inf;
    };
    std::vector<Probe> probes;
    long lo_idx[Vec::kMaxDim], hi_idx[Vec::kMaxDim];
    for (std::size_t a = 0; a < d; ++a) {
        const Axis& ax = g.axis(a);
        long lo = static_cast<long>(std::ceil((x[a] - radius - ax.lo) / ax.step() - 1e-9));
        long hi = static_cast<long>(std::floor((x[a] + radius - ax.lo) / ax.step() + 1e-9));
        lo_idx[a] = std::max(lo, 0L);
        hi_idx[a] = std::min(hi, static_cast<long>(ax.count - 1));
        if (lo_idx[a] > hi_idx[a]) return {x, {}, radius, delta};
    }
    long cur[Vec::kMaxDim];
    for (std::size_t a = 0; a < d; ++a) cur[a] = lo_idx[a];
    while (true) {
        std::vector<std::size_t> idx(d);
        Vec y(d);
        for (std::size_t a = 0; a < d; ++a) {
            idx[a] = static_cast<std::size_t>(cur[a]);
            y[a] = g.axis(a).node(idx[a]);
        }
        double nd = dist(y, x);
        if (nd > 1e-12 && nd <= radius) {
            double w = W.at(idx);
            probes.push_back({y - x, nd, w, is_infinite(w)});
        }
        std::size_t a = d;
        bool done = true;
        while (a-- > 0) {
            if (++cur[a] <= hi_idx[a]) {
                done = false;
                break;
            }
            cur[a] = lo_idx[a];
        }
        if (done) break;
    }

    DifferentialSample out{x, {}, radius, delta};
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
        Vec p = p_grid.point_flat(pi);
        bool ok = true;
        for (const Probe& pr : probes) {
            if (pr.inf) {
                // +inf values satisfy the sub inequality vacuously and
                // defeat the super inequality outright
                if (sign == DifferentialSign::Super) {
                    ok = false;
                    break;
                }
                continue;
            }
            double lhs = pr.w - wx - dot(p, pr.dy);
            if (sign == DifferentialSign::Sub ? lhs < -delta * pr.ndy : lhs > delta * pr.ndy) {
                ok = false;
                break;
            }
        }
        if (ok) out.accepted.push_back(p);
    }
    return out;
}

ConeSample contingent_cone(const DiscreteSet& K, const Vec& x,
                           const std::vector<double>& h_sequence,
                           const std::vector<Vec>& directions, double tol) {
    if (K.distance(x) > tol)
        throw NotInSet("contingent_cone: base point is not within tol of the set");
    std::vector<double> hs = h_sequence;
    if (hs.empty()) hs = scale_sequence(0.1, 2.0 * K.resolution());

    ConeSample c;
    c.base = x;
    c.h_sequence = hs;
    c.tol = tol;
    for (const Vec& dir : directions) {
        double n = norm(dir);
        Vec v = dir;
        if (n > 0.0) v *= 1.0 / n;
        c.directions.push_back(v);
        double best = kPlusInfinity;
        for (double h : hs) best = std::min(best, K.distance(x + h * v) / h);
        c.in.push_back(best <= tol);
    }
    return c;
}

ConeSample polar_cone(const ConeSample& c, const std::vector<Vec>& p_sample, double tol) {
    ConeSample out;
    out.base = c.base;
    out.h_sequence = c.h_sequence;
    out.tol = tol;
    for (const Vec& p : p_sample) {
        double n = norm(p);
        Vec q = p;
        if (n > 0.0) q *= 1.0 / n;
        out.directions.push_back(q);
        bool ok = true;
        for (std::size_t i = 0; i < c.directions.size(); ++i) {
            if (!c.in[i]) continue;
            if (dot(q, c.directions[i]) > tol) {
                ok = false;
                break;
            }
        }
        out.in.push_back(ok);
    }
    return out;
}

DiscreteSet epigraph(const SampledFunction& W, GraphSide side, double pad) {
    if (!W.has_finite_value()) throw AllInfinite("epigraph: no finite node");
    const Grid& g = W.grid();
    double r_lo = W.min_finite() - pad;
    double r_hi = W.max_finite() + pad;
    double res = min_step(g);
    auto r_count = static_cast<std::size_t>(std::llround((r_hi - r_lo) / res)) + 1;
    r_count = std::clamp<std::size_t>(r_count, 2, 4096);

    std::vector<Axis> axes = g.axes();
    axes.push_back(Axis{r_lo, r_hi, r_count});
    Grid box(axes);
    const std::size_t d = g.dim();

    auto member = [W, side, d](const Vec& z) {
        Vec x(d);
        for (std::size_t a = 0; a < d; ++a) x[a] = z[a];
        double v = W.interp(x);
        if (side == GraphSide::Epi)
            return !is_infinite(v) && z[d] >= v - 1e-12;
        // hypograph: +inf values swallow the whole r-window
        if (!W.grid().contains(x, 1e-12)) return false;
        return is_infinite(v) || z[d] <= v + 1e-12;
    };
    return DiscreteSet::implicit(member, box, std::min(res, box.axis(d).step()));
}

}  // namespace hjb
