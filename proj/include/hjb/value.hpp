#pragma once

#include <cstdint>
#include <string>

#include "hjb/problem.hpp"

namespace hjb {

struct EmptySearch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Stuck : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoFiniteCost : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncated velocity search box for the DP recursion: (2m+1) uniform
// samples per axis over [-u_max, u_max].
struct VelocitySearchBox {
    double u_max = 1.0;
    std::size_t m = 40;
    std::string derivation;  // how u_max was obtained (audit record)

    std::size_t samples_per_axis() const { return 2 * m + 1; }
    double sample(std::size_t i) const {
        return -u_max + static_cast<double>(i) * (u_max / static_cast<double>(m));
    }
};

// Default velocity bound from the coercivity witness: the largest sampled
// U with Theta(U) <= (sup of finite phi + 1)/h. Mirrors the boundedness
// argument for optimal velocities at step size h.
VelocitySearchBox derive_search_box(const BolzaProblem& problem, double h,
                                    std::size_t m = 40);

enum class Provenance { Dp, Oracle, Candidate };

// Extended-real field W(t_k, x) on a uniform space-time grid; time is
// axis 0 of the joint grid.
class ValueField {
public:
    ValueField() = default;
    ValueField(double h, std::size_t steps, Grid x_grid, Provenance provenance);

    double h() const { return h_; }
    std::size_t steps() const { return steps_; }  // M; time nodes are 0..M
    const Grid& x_grid() const { return x_grid_; }
    Provenance provenance() const { return provenance_; }
    void set_provenance(Provenance p) { provenance_ = p; }
    bool infeasible_everywhere() const { return infeasible_; }
    void set_infeasible(bool b) { infeasible_ = b; }

    double& at(std::size_t k, std::size_t x_flat) { return field_[k * x_grid_.size() + x_flat]; }
    double at(std::size_t k, std::size_t x_flat) const {
        return field_[k * x_grid_.size() + x_flat];
    }

    // space-only interpolation on a fixed time slice
    double interp_slice(std::size_t k, const Vec& x) const;
    // joint (t,x) interpolation
    double interp(double t, const Vec& x) const;

    const SampledFunction& field() const { return field_; }
    SampledFunction& field() { return field_; }

private:
    double h_ = 0.0;
    std::size_t steps_ = 0;
    Grid x_grid_;
    Provenance provenance_ = Provenance::Candidate;
    SampledFunction field_;  // axes: t, x...
    bool infeasible_ = false;
};

// Semi-Lagrangian dynamic programming:
//   V_0 = phi,  V_{k+1}(x) = min_v [ h L(x,v) + Interp(V_k)(x + h v) ]
// over the sampled velocity box, with +inf-propagating interpolation and
// lexicographic tie-breaking. Out-of-box queries count as +inf.
ValueField solve_dp(const BolzaProblem& problem, double h, std::size_t steps,
                    const Grid& x_grid, const VelocitySearchBox& search);

// Exact-consequence oracle for x-independent L: min over grid nodes y of
// t L((y-x)/t) + phi(y).
double hopf_lax_oracle(const BolzaProblem& problem, double t, const Vec& x);

struct DirectMinimizeResult {
    double cost = kPlusInfinity;
    TrajectoryPath path;
};

// Upper-bound minimization of the discrete action over piecewise-linear
// paths with N segments from x, by coordinate descent with R random
// restarts. Deterministic for a fixed seed.
DirectMinimizeResult direct_minimize(const BolzaProblem& problem, double t, const Vec& x,
                                     std::size_t segments, std::size_t restarts,
                                     std::uint32_t seed = 12345);

// Greedy rollout of the DP policy from (t, x); node j sits at elapsed
// time j h. Throws Stuck when every sampled velocity leads to +inf.
TrajectoryPath reconstruct_trajectory(const ValueField& field, const BolzaProblem& problem,
                                      const VelocitySearchBox& search, double t, const Vec& x);

}  // namespace hjb
