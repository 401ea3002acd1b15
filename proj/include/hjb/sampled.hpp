#pragma once

#include <functional>
#include <vector>

#include "hjb/core.hpp"

namespace hjb {

// Extended-real function sampled on a uniform grid. Values are finite
// reals or the +infinity sentinel; arithmetic on them saturates.
class SampledFunction {
public:
    SampledFunction() = default;
    SampledFunction(Grid grid, double fill = 0.0)
        : grid_(std::move(grid)), values_(grid_.size(), fill) {}
    SampledFunction(Grid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("SampledFunction: value count mismatch");
    }

    static SampledFunction from_callable(Grid grid, const std::function<double(const Vec&)>& f) {
        SampledFunction s(grid);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = f(s.grid().point_flat(i));
        return s;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t f) { return values_[f]; }
    double operator[](std::size_t f) const { return values_[f]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double at(const std::vector<std::size_t>& idx) const { return values_[grid_.flat(idx)]; }

    bool has_finite_value() const {
        for (double v : values_)
            if (!is_infinite(v)) return true;
        return false;
    }

    double min_finite() const {
        double m = kPlusInfinity;
        for (double v : values_)
            if (!is_infinite(v)) m = std::min(m, v);
        return m;
    }

    double max_finite() const {
        double m = -kPlusInfinity;
        bool any = false;
        for (double v : values_)
            if (!is_infinite(v)) { m = std::max(m, v); any = true; }
        return any ? m : kPlusInfinity;
    }

    // Multilinear interpolation with +infinity propagation: a corner with
    // nonzero weight that holds the sentinel makes the result +infinity.
    // Queries outside the box return +infinity.
    double interp(const Vec& x) const {
        const std::size_t d = grid_.dim();
        std::size_t base[Vec::kMaxDim];
        double frac[Vec::kMaxDim];
        constexpr double kSnap = 1e-9;  // relative cell fraction treated as exact hit
        for (std::size_t a = 0; a < d; ++a) {
            const Axis& ax = grid_.axis(a);
            double t = (x[a] - ax.lo) / ax.step();
            if (t < -kSnap || t > static_cast<double>(ax.count - 1) + kSnap) return kPlusInfinity;
            t = std::clamp(t, 0.0, static_cast<double>(ax.count - 1));
            double fl = std::floor(t);
            std::size_t i = static_cast<std::size_t>(fl);
            double fr = t - fl;
            if (fr < kSnap) fr = 0.0;
            if (fr > 1.0 - kSnap) { fr = 0.0; i += 1; }
            if (i >= ax.count - 1 && fr == 0.0 && i == ax.count - 1) {
                // exact upper node
            } else if (i >= ax.count - 1) {
                i = ax.count - 2;
                fr = 1.0;
            }
            base[a] = i;
            frac[a] = fr;
        }
        double acc = 0.0;
        const std::size_t corners = std::size_t{1} << d;
        for (std::size_t c = 0; c < corners; ++c) {
            double w = 1.0;
            std::size_t fidx = 0;
            for (std::size_t a = 0; a < d; ++a) {
                const bool hi = (c >> a) & 1u;
                const double fr = frac[a];
                w *= hi ? fr : (1.0 - fr);
                std::size_t ia = base[a] + (hi ? 1 : 0);
                if (ia >= grid_.axis(a).count) ia = grid_.axis(a).count - 1;  // weight is 0 here
                fidx = fidx * grid_.axis(a).count + ia;
            }
            if (w == 0.0) continue;
            double v = values_[fidx];
            if (is_infinite(v)) return kPlusInfinity;
            acc += w * v;
        }
        return acc;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

}  // namespace hjb
