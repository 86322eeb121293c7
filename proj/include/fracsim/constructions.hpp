#pragma once

// Geometric constructions on triangulations: the polyhedral curve covering a
// segment along element boundaries, the shell of triangles met by a segment,
// the transfer of a crack onto adaptive mesh edges, and nodal interpolation.

#include <functional>

#include "fracsim/mesh.hpp"

namespace fracsim::mesh {

struct CurveCover {
    SegmentSet curve;  // connected polyhedral curve from p to q
    double ratio = 0.0;  // H^1(curve) / H^1(l)
};

// Shortest polyhedral curve from l.p to l.q running along boundaries of the
// sub-triangle pieces cut off by l (one piece per crossed sub-triangle, the
// smaller side).
CurveCover edge_curve_cover(const AdaptiveTriangulation& T, const Segment& l);

struct Shell {
    std::vector<int> triangles;   // all regular triangles meeting l
    double boundary_length = 0.0; // H^1 of the shell boundary
    double ratio = 0.0;           // boundary_length / H^1(l)
};

Shell shell(const RegularTriangulation& R, const Segment& l);

struct JumpTransfer {
    AdaptiveTriangulation tri;  // knots projected onto crossing points
    SegmentSet interp;          // interpolating polyhedral curves
    double inflation = 0.0;     // H^1(interp) / H^1(cracks)
};

// For each regular edge crossed by a crack at edge parameter s, places the
// knot at t = clamp(s, a, 1-a); the interpolating curve chains the knots and
// reconnects to the crack endpoints, so its length is never below H^1(cracks).
JumpTransfer transfer_jump(const RegularTriangulation& R, double a,
                           const SegmentSet& cracks);

// Nodal values of f at the vertices of the regular triangulation; the
// continuous piecewise-affine interpolant is determined by these.
std::vector<double> interpolate_affine(const RegularTriangulation& R,
                                       const std::function<double(Point2)>& f);

// W^{1,2} error of the nodal interpolant against a smooth field, by a
// degree-5 triangle quadrature.
double w12_interpolation_error(
    const RegularTriangulation& R, const std::vector<double>& nodal,
    const std::function<double(Point2)>& f,
    const std::function<std::array<double, 2>(Point2)>& grad_f);

} // namespace fracsim::mesh
