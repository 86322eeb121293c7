#pragma once

// Regular triangulations of a polygonal domain and their adaptive
// subdivisions: each regular triangle is split into four sub-triangles by a
// movable knot z = t*x + (1-t)*y, t in [a, 1-a], one per regular edge.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fracsim/geometry.hpp"

namespace fracsim::mesh {

using geom::Point2;
using geom::Segment;
using geom::SegmentSet;

struct PolygonalDomain {
    std::vector<Point2> vertices;      // simple, positively oriented loop
    std::vector<int> dirichlet_marks;  // indices of polygon edges on ∂_D Ω

    std::size_t n_edges() const { return vertices.size(); }
    Segment edge(int i) const;
    double area() const;       // signed shoelace; positive for CCW loops
    double diameter() const;
    bool contains(Point2 p) const;
    double shortest_edge() const;

    void validate() const;     // simple + CCW + marks in range
};

struct MeshParams {
    double eps = 0.25;
    // Shape-regularity constants: every triangle contains a ball of diameter
    // c1*eps and fits in a ball of diameter c2*eps. The source model never
    // fixes them numerically; these defaults are a config-exposed choice.
    double c1 = 0.5;
    double c2 = 2.0;
};

struct RegularTriangulation {
    struct Edge {
        int a = -1, b = -1;          // vertex ids, a < b
        std::array<int, 2> tri{-1, -1};
        int n_tri = 0;
        bool dirichlet = false;
    };

    std::vector<Point2> points;
    std::vector<std::array<int, 3>> triangles;  // CCW vertex ids
    std::vector<Edge> edges;
    std::vector<std::array<int, 3>> tri_edges;  // edge ids (v0v1, v1v2, v2v0)
    std::vector<int> dirichlet_edges;           // the set S_eps
    double eps = 0.0, c1 = 0.0, c2 = 0.0;
    PolygonalDomain domain;

    Point2 edge_first(int e) const { return points[edges[e].a]; }
    Point2 edge_second(int e) const { return points[edges[e].b]; }
    Segment edge_segment(int e) const { return {edge_first(e), edge_second(e)}; }
    double edge_length(int e) const;
    double triangle_area(int t) const;
    double total_area() const;
    bool edge_is_boundary(int e) const { return edges[e].n_tri == 1; }
    SegmentSet all_edges_set(double tol = geom::SegmentSet::kDefaultTol) const;
};

struct RegularityReport {
    double min_angle = 0.0, max_angle = 0.0;  // radians
    double min_edge = 0.0, max_edge = 0.0;
    double min_inball = 0.0, max_outball = 0.0;  // diameters, relative to eps
    bool pass = false;
};

// Structured grids for grid-aligned rectilinear polygons; ear-clipping plus
// uniform refinement as a fallback, post-checked against (c1, c2).
RegularTriangulation build_regular(const PolygonalDomain& domain,
                                   const MeshParams& params);

RegularityReport check_regularity(const RegularTriangulation& mesh);

struct AdaptiveParams {
    double a = 0.25;                 // in (0, 1/2)
    std::vector<double> t_per_edge;  // one t in [a, 1-a] per regular edge
};

enum class SubEdgeKind {
    Central,        // edge of the central sub-triangle, always interior
    InteriorHalf,   // half of an interior regular edge
    DirichletHalf,  // half of a Dirichlet boundary edge
    BoundaryHalf,   // half of a non-Dirichlet boundary edge
};

struct AdaptiveTriangulation {
    struct SubTri {
        std::array<int, 3> v;  // vertex ids into `points`, CCW
        int parent = -1;       // regular triangle id
    };
    struct SubEdge {
        int a = -1, b = -1;    // vertex ids
        SubEdgeKind kind = SubEdgeKind::Central;
        int parent_edge = -1;  // regular edge id; -1 for Central
        std::array<int, 2> tri{-1, -1};
        int n_tri = 0;
    };

    const RegularTriangulation* base = nullptr;
    AdaptiveParams params;
    std::vector<Point2> points;  // base points, then one knot per regular edge
    std::vector<SubTri> subtris;
    std::vector<SubEdge> subedges;
    std::vector<int> interior_subedges;  // Central + InteriorHalf ids

    int knot_vertex(int regular_edge) const {
        return static_cast<int>(base->points.size()) + regular_edge;
    }
    Segment subedge_segment(int e) const {
        return {points[subedges[e].a], points[subedges[e].b]};
    }
    double subtri_area(int k) const;
    std::array<Point2, 3> subtri_points(int k) const;
    bool subedge_is_interior(int e) const {
        const auto k = subedges[e].kind;
        return k == SubEdgeKind::Central || k == SubEdgeKind::InteriorHalf;
    }
    // Local corner index (0..2) of vertex `v` in sub-triangle `k`.
    int local_corner(int k, int v) const;
};

AdaptiveTriangulation subdivide(const RegularTriangulation& mesh,
                                const AdaptiveParams& params);

// Lower/upper sub-edge length factors implied by (c1, c2, a): every sub-edge
// length lies in [c1a*eps, c2a*eps].
double c1_adaptive(double c1, double c2, double a);
double c2_adaptive(double c2, double a);

} // namespace fracsim::mesh
