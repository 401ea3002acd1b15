#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjb/sampled.hpp"

namespace hjb {

struct TransformError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AllInfinite : TransformError {
    AllInfinite() : TransformError("conjugate: input is identically +inf") {}
    explicit AllInfinite(const std::string& what) : TransformError(what) {}
};
struct NotConvexInU : TransformError {
    explicit NotConvexInU(const std::string& what) : TransformError(what) {}
};

struct ConjugateResult {
    SampledFunction value;
    // Set when the defining max was attained on the u-grid boundary for
    // some p node: the u-box truncates the sup and should be enlarged.
    bool boundary_attained = false;
};

// Discrete Legendre-Fenchel conjugate: output(p) = max over grid nodes u
// of <p,u> - f(u). 1D runs the linear-time transform over the lower
// convex hull of the finite samples; N-D iterates the 1D transform one
// axis at a time (an exact factorization of the nested sup).
ConjugateResult conjugate(const SampledFunction& f, const Grid& p_grid);

// Lower convex envelope of the sampled points, evaluated back on f's own
// grid. Coincides with conjugate(conjugate(f)) and equals f at nodes when
// f is convex.
SampledFunction biconjugate(const SampledFunction& f);

// Discrete midpoint convexity along every axis:
// f(u_i) + f(u_{i+2}) >= 2 f(u_{i+1}) - tol, with saturating +inf rules.
bool midpoint_convex(const SampledFunction& f, double tol = 1e-9);

// Coercivity witness Theta of the Tonelli growth condition: a sampled
// scalar convex function of the velocity magnitude.
struct CoercivityWitness {
    SampledFunction theta;               // 1D over radii [0, r_max]
    double superlinearity_horizon = 1.0; // ratio must grow beyond this radius

    double eval(double r) const {
        Vec q(1);
        q[0] = r;
        return theta.interp(q);
    }
    // Value at the sampled radius just below r; a lower bound when Theta
    // is nondecreasing, immune to interpolation overshoot.
    double eval_floor(double r) const {
        const Axis& ax = theta.grid().axis(0);
        if (r <= ax.lo) return theta[0];
        if (r >= ax.hi) return theta[ax.count - 1];
        auto idx = static_cast<std::size_t>((r - ax.lo) / ax.step());
        if (idx >= ax.count) idx = ax.count - 1;
        return theta[idx];
    }
    // Conjugate of the radial extension: sup_u <p,u> - Theta(|u|).
    double conjugate_at(double p_norm) const;
};

struct CoercivityViolation {
    Vec x;
    Vec u;
    double lagrangian;
    double theta;
};

struct CoercivityReport {
    bool pass = false;
    bool pointwise_ok = false;
    bool tail_ratio_increasing = false;
    std::vector<CoercivityViolation> violations;
    std::vector<double> tail_radii;
    std::vector<double> tail_ratios;  // Theta(r)/r at the sampled tail radii
};

using LagrangianEval = std::function<double(const Vec& x, const Vec& u)>;

CoercivityReport check_coercivity(const LagrangianEval& L, const Grid& x_grid,
                                  const Grid& u_grid, const CoercivityWitness& theta);

// Sampled Hamiltonian H(x,p) = sup_u <p,u> - L(x,u), tabulated on the
// product of an x-grid and a p-grid with multilinear query interpolation.
class HamiltonianTable {
public:
    HamiltonianTable() = default;
    HamiltonianTable(Grid x_grid, Grid p_grid, std::vector<double> values,
                     std::vector<double> lipschitz_p);

    const Grid& x_grid() const { return x_grid_; }
    const Grid& p_grid() const { return p_grid_; }
    const SampledFunction& table() const { return joint_; }
    const std::vector<double>& lipschitz_p() const { return lipschitz_p_; }
    bool boundary_attained() const { return boundary_attained_; }
    void set_boundary_attained(bool b) { boundary_attained_ = b; }

    double query(const Vec& x, const Vec& p) const;
    double at(std::size_t x_flat, std::size_t p_flat) const {
        return joint_[x_flat * p_grid_.size() + p_flat];
    }

private:
    Grid x_grid_;
    Grid p_grid_;
    SampledFunction joint_;  // axes: x..., p...
    std::vector<double> lipschitz_p_;
    bool boundary_attained_ = false;
};

// Builds the Hamiltonian table from per-x conjugation of L(x,.).
// Each slice must be convex (biconjugate equality within conv_tol),
// otherwise NotConvexInU is thrown. When a coercivity witness is given,
// the bound chain -L(x,0) <= H(x,p) <= Theta*(p) is enforced within tol.
HamiltonianTable hamiltonian_table(const LagrangianEval& L, const Grid& x_grid,
                                   const Grid& u_grid, const Grid& p_grid,
                                   const CoercivityWitness* theta = nullptr,
                                   double conv_tol = 1e-7, double bound_tol = 1e-6);

}  // namespace hjb
