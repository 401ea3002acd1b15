#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hjb/problem.hpp"
#include "hjb/sampled.hpp"
#include "hjb/transform.hpp"

namespace hjb {

struct NotInSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed set given either as a finite point cloud or as an implicit
// membership predicate with a bounding box and a scan resolution.
// Distance queries on implicit sets do a shell scan on the resolution
// grid followed by a local pattern-search refinement, so the returned
// projection is much more accurate than the scan resolution when the
// boundary is locally smooth.
class DiscreteSet {
public:
    using Predicate = std::function<bool(const Vec&)>;

    struct Projection {
        Vec point;
        double distance = 0.0;
    };

    static DiscreteSet from_points(std::vector<Vec> pts);
    static DiscreteSet implicit(Predicate member, Grid box, double resolution);

    std::size_t dimension() const { return dim_; }
    double resolution() const { return resolution_; }
    const Grid& box() const { return box_; }
    bool is_implicit() const { return static_cast<bool>(member_); }

    bool member(const Vec& z) const;
    Projection project(const Vec& z) const;
    double distance(const Vec& z) const { return project(z).distance; }
    Vec nearest(const Vec& z) const { return project(z).point; }

private:
    DiscreteSet() = default;

    std::size_t dim_ = 0;
    double resolution_ = 0.0;
    std::vector<Vec> points_;  // point-cloud form
    Predicate member_;         // implicit form
    Grid box_;
};

// Directions on the unit sphere marked in/out of a cone, together with
// the scale sequence that produced the marking.
struct ConeSample {
    Vec base;
    std::vector<Vec> directions;  // unit vectors
    std::vector<bool> in;
    std::vector<double> h_sequence;
    double tol = 0.0;

    std::size_t in_count() const {
        std::size_t c = 0;
        for (bool b : in) c += b ? 1 : 0;
        return c;
    }
};

// Gradient candidates accepted by the finite-radius sub/superdifferential
// inequality at a base point.
struct DifferentialSample {
    Vec base;
    std::vector<Vec> accepted;
    double radius = 0.0;
    double delta = 0.0;
};

enum class DifferentialSign { Sub, Super };

// Contingent directional derivative estimate with the per-scale profile:
// profile[j] is the best difference quotient at scale h_sequence[j], and
// the estimate is the minimum over scales.
struct ContingentEstimate {
    double estimate = kPlusInfinity;
    std::vector<double> h_sequence;
    std::vector<double> profile;
};

// Geometric scale sequence h_j = h0 * 2^-j, stopping once h_j < floor.
std::vector<double> scale_sequence(double h0, double floor);

// Evenly spread unit directions: the two signs in 1D, equal angles in 2D,
// a Fibonacci sphere in 3D and above.
std::vector<Vec> unit_directions(std::size_t dim, std::size_t count);

ContingentEstimate contingent_derivative(const SampledFunction& W, const Vec& x, const Vec& u,
                                         const std::vector<double>& h_sequence = {});

DifferentialSample differential_sample(const SampledFunction& W, const Vec& x,
                                       DifferentialSign sign, double radius, double delta,
                                       const Grid& p_grid);

ConeSample contingent_cone(const DiscreteSet& K, const Vec& x,
                           const std::vector<double>& h_sequence,
                           const std::vector<Vec>& directions, double tol);

ConeSample polar_cone(const ConeSample& c, const std::vector<Vec>& p_sample, double tol = 1e-9);

enum class GraphSide { Epi, Hypo };

// Implicit epigraph/hypograph of a sampled function: membership of (x,r)
// is r >= Interp(W)(x) (resp. <=), with a bounded r-window for distance
// queries.
DiscreteSet epigraph(const SampledFunction& W, GraphSide side, double pad = 1.0);

}  // namespace hjb
