#pragma once

// The discontinuous finite element space on adaptive triangulations:
// displacements are affine per sub-triangle (3 corner values each) and may
// jump across a chosen set of broken edges. The elastic solve minimizes
// sum_K |K| |grad u_K|^2 subject to continuity on unbroken interior sub-edges
// and trace = g on non-released Dirichlet edges.

#include <functional>
#include <vector>

#include "fracsim/mesh.hpp"

namespace fracsim::fem {

using geom::Point2;
using geom::Segment;
using geom::SegmentSet;
using mesh::AdaptiveTriangulation;
using mesh::RegularTriangulation;

// Continuous piecewise-affine data on the regular triangulation (the space
// AF_eps). Values at adaptive knots follow by interpolation along the edge.
class BoundaryData {
public:
    BoundaryData() = default;
    BoundaryData(const RegularTriangulation& R, std::vector<double> nodal);
    BoundaryData(const RegularTriangulation& R,
                 const std::function<double(Point2)>& f);

    const RegularTriangulation& base() const { return *mesh_; }
    const std::vector<double>& nodal() const { return nodal_; }
    double sup_norm() const { return sup_; }

    double value_at_vertex(int v) const { return nodal_[v]; }
    // Value at any vertex id of an adaptive triangulation over the same base.
    double value_at(const AdaptiveTriangulation& T, int vertex) const;

    std::array<double, 2> gradient_on_triangle(int t) const { return grad_[t]; }
    double bulk() const;   // ||grad g||^2
    double l2_sq() const;  // integral of g^2
    double h1_norm() const;

private:
    const RegularTriangulation* mesh_ = nullptr;
    std::vector<double> nodal_;
    double sup_ = 0.0;
    std::vector<std::array<double, 2>> grad_;
};

struct BrokenEdgeSet {
    // Indexed by sub-edge id; meaningful only for interior sub-edges.
    std::vector<char> interior_broken;
    // Indexed by regular edge id; meaningful only for Dirichlet edges.
    std::vector<char> released;

    static BrokenEdgeSet none(const AdaptiveTriangulation& T);
    bool any() const;
};

struct DiscreteDisplacement {
    const AdaptiveTriangulation* tri = nullptr;
    std::vector<double> corner_values;  // 3 per sub-triangle
    BrokenEdgeSet broken;

    double value(int subtri, int vertex) const {
        return corner_values[3 * subtri + tri->local_corner(subtri, vertex)];
    }
    std::array<double, 2> gradient(int subtri) const;
    double sup_norm() const;
};

struct EnergyBreakdown {
    double bulk = 0.0;
    double surface_new = 0.0;    // H^1(S^g(u) \ Gamma_prev)
    double surface_total = 0.0;  // H^1(Gamma) after union
    double total = 0.0;          // bulk + surface_new
};

enum class DirichletGranularity {
    WholeEdge,  // violation counted over whole regular edges, as defined
    SubEdge,    // sensitivity-study variant: per Dirichlet sub-edge
};

DiscreteDisplacement solve_displacement(const AdaptiveTriangulation& T,
                                        const BrokenEdgeSet& broken,
                                        const BoundaryData& g);

// Sub-edges across which the solved traces actually differ; a subset of the
// broken interior set (zero-jump edges are pruned).
SegmentSet jump_set(const DiscreteDisplacement& u, double tol_jump);

SegmentSet boundary_violation_set(
    const DiscreteDisplacement& u, const BoundaryData& g, double tol_jump,
    DirichletGranularity granularity = DirichletGranularity::WholeEdge);

// S^g(u) = S_u ∪ S_D^g(u).
SegmentSet combined_jump_set(
    const DiscreteDisplacement& u, const BoundaryData& g, double tol_jump,
    DirichletGranularity granularity = DirichletGranularity::WholeEdge);

double bulk_energy(const DiscreteDisplacement& u);

// Corner values projected onto [-M, M], re-interpolated.
DiscreteDisplacement truncate(const DiscreteDisplacement& u, double M);

double default_tol_jump(const BoundaryData& g);

} // namespace fracsim::fem
