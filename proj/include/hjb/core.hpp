#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjb {

// Extended-real sentinel. Any value >= kInfThreshold is treated as +infinity.
constexpr double kPlusInfinity = 1e30;
constexpr double kInfThreshold = 1e29;

inline bool is_infinite(double v) { return v >= kInfThreshold; }

inline double sat_add(double a, double b) {
    if (is_infinite(a) || is_infinite(b)) return kPlusInfinity;
    return a + b;
}

inline double sat_min(double a, double b) { return std::min(a, b); }

// Small fixed-capacity point type; dimensions here never exceed 4
// (space-time epigraph points are 1 + n + 1 with n <= 2).
class Vec {
public:
    static constexpr std::size_t kMaxDim = 4;

    Vec() : n_(0) { d_.fill(0.0); }
    explicit Vec(std::size_t n) : n_(n) {
        assert(n <= kMaxDim);
        d_.fill(0.0);
    }
    Vec(std::initializer_list<double> xs) : n_(xs.size()) {
        assert(xs.size() <= kMaxDim);
        d_.fill(0.0);
        std::size_t i = 0;
        for (double x : xs) d_[i++] = x;
    }

    std::size_t size() const { return n_; }
    double& operator[](std::size_t i) { return d_[i]; }
    double operator[](std::size_t i) const { return d_[i]; }

    Vec& operator+=(const Vec& o) {
        for (std::size_t i = 0; i < n_; ++i) d_[i] += o.d_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (std::size_t i = 0; i < n_; ++i) d_[i] -= o.d_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (std::size_t i = 0; i < n_; ++i) d_[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }

    friend double dot(const Vec& a, const Vec& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
    friend double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
    friend double dist(const Vec& a, const Vec& b) { return norm(a - b); }

private:
    std::array<double, kMaxDim> d_;
    std::size_t n_;
};

// One axis of a uniform rectangular grid.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t count = 2;  // node count, >= 2

    double step() const { return (hi - lo) / static_cast<double>(count - 1); }
    double node(std::size_t i) const { return lo + static_cast<double>(i) * step(); }
};

// Uniform rectangular grid over a bounded box, row-major flat indexing
// with the last axis fastest.
class Grid {
public:
    Grid() = default;
    explicit Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
        for (const Axis& a : axes_) {
            if (a.count < 2) throw std::invalid_argument("Grid: node count must be >= 2");
            if (!(a.hi > a.lo)) throw std::invalid_argument("Grid: empty axis range");
        }
        if (axes_.size() > Vec::kMaxDim) throw std::invalid_argument("Grid: dimension > 4 unsupported");
    }

    std::size_t dim() const { return axes_.size(); }
    const Axis& axis(std::size_t a) const { return axes_[a]; }
    const std::vector<Axis>& axes() const { return axes_; }

    std::size_t size() const {
        std::size_t s = 1;
        for (const Axis& a : axes_) s *= a.count;
        return s;
    }

    std::size_t flat(const std::vector<std::size_t>& idx) const {
        std::size_t f = 0;
        for (std::size_t a = 0; a < axes_.size(); ++a) f = f * axes_[a].count + idx[a];
        return f;
    }

    std::vector<std::size_t> unflat(std::size_t f) const {
        std::vector<std::size_t> idx(axes_.size());
        for (std::size_t a = axes_.size(); a-- > 0;) {
            idx[a] = f % axes_[a].count;
            f /= axes_[a].count;
        }
        return idx;
    }

    Vec point(const std::vector<std::size_t>& idx) const {
        Vec p(axes_.size());
        for (std::size_t a = 0; a < axes_.size(); ++a) p[a] = axes_[a].node(idx[a]);
        return p;
    }

    Vec point_flat(std::size_t f) const { return point(unflat(f)); }

    bool contains(const Vec& x, double slack = 0.0) const {
        for (std::size_t a = 0; a < axes_.size(); ++a)
            if (x[a] < axes_[a].lo - slack || x[a] > axes_[a].hi + slack) return false;
        return true;
    }

    // Nearest grid node; ties resolve toward the lower index.
    std::vector<std::size_t> nearest(const Vec& x) const {
        std::vector<std::size_t> idx(axes_.size());
        for (std::size_t a = 0; a < axes_.size(); ++a) {
            double t = (x[a] - axes_[a].lo) / axes_[a].step();
            double f = std::floor(t);
            double frac = t - f;
            long i = static_cast<long>(f) + (frac > 0.5 ? 1 : 0);
            i = std::clamp(i, 0L, static_cast<long>(axes_[a].count - 1));
            idx[a] = static_cast<std::size_t>(i);
        }
        return idx;
    }

private:
    std::vector<Axis> axes_;
};

inline Axis make_axis(double lo, double hi, std::size_t count) { return Axis{lo, hi, count}; }

}  // namespace hjb
