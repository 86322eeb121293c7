#include "fracsim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fracsim/errors.hpp"

namespace fracsim::mesh {

namespace {

constexpr double kPi = 3.14159265358979323846;

double tri_area(Point2 a, Point2 b, Point2 c) {
    return 0.5 * geom::cross(b - a, c - a);
}

} // namespace

Segment PolygonalDomain::edge(int i) const {
    const int n = static_cast<int>(vertices.size());
    return {vertices[i], vertices[(i + 1) % n]};
}

double PolygonalDomain::area() const {
    double s = 0.0;
    const int n = static_cast<int>(vertices.size());
    for (int i = 0; i < n; ++i)
        s += geom::cross(vertices[i], vertices[(i + 1) % n]);
    return 0.5 * s;
}

double PolygonalDomain::diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = i + 1; j < vertices.size(); ++j)
            d = std::max(d, geom::dist(vertices[i], vertices[j]));
    return d;
}

bool PolygonalDomain::contains(Point2 p) const {
    // Crossing number; boundary points are treated as inside within noise.
    bool inside = false;
    const int n = static_cast<int>(vertices.size());
    for (int i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = vertices[i], b = vertices[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

double PolygonalDomain::shortest_edge() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices.size(); ++i)
        m = std::min(m, edge(static_cast<int>(i)).length());
    return m;
}

void PolygonalDomain::validate() const {
    if (vertices.size() < 3) throw ConfigError("domain: fewer than 3 vertices");
    if (area() <= 0.0)
        throw ConfigError("domain: polygon must be positively oriented");
    const int n = static_cast<int>(vertices.size());
    for (int m : dirichlet_marks)
        if (m < 0 || m >= n)
            throw ConfigError("domain: dirichlet edge index out of range");
    // Simplicity: non-adjacent edges must not intersect.
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            const Segment si = edge(i), sj = edge(j);
            const Point2 r = si.q() - si.p(), s = sj.q() - sj.p();
            const double den = geom::cross(r, s);
            if (std::abs(den) < 1e-14) continue;
            const double t = geom::cross(sj.p() - si.p(), s) / den;
            const double u = geom::cross(sj.p() - si.p(), r) / den;
            if (t > 1e-12 && t < 1 - 1e-12 && u > 1e-12 && u < 1 - 1e-12)
                throw ConfigError("domain: polygon is not simple");
        }
}

double RegularTriangulation::edge_length(int e) const {
    return geom::dist(points[edges[e].a], points[edges[e].b]);
}

double RegularTriangulation::triangle_area(int t) const {
    const auto& v = triangles[t];
    return tri_area(points[v[0]], points[v[1]], points[v[2]]);
}

double RegularTriangulation::total_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        s += triangle_area(static_cast<int>(t));
    return s;
}

SegmentSet RegularTriangulation::all_edges_set(double tol) const {
    SegmentSet s(tol);
    for (std::size_t e = 0; e < edges.size(); ++e)
        s.add(edge_segment(static_cast<int>(e)));
    return s;
}

namespace {

// Build edge table with triangle adjacency from a vertex/triangle soup; marks
// boundary edges lying on flagged polygon edges as Dirichlet.
void finalize_mesh(RegularTriangulation& m) {
    std::map<std::pair<int, int>, int> edge_id;
    m.tri_edges.assign(m.triangles.size(), {-1, -1, -1});
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& v = m.triangles[t];
        for (int k = 0; k < 3; ++k) {
            int a = v[k], b = v[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            auto it = edge_id.find({a, b});
            int e;
            if (it == edge_id.end()) {
                e = static_cast<int>(m.edges.size());
                edge_id[{a, b}] = e;
                m.edges.push_back({a, b, {static_cast<int>(t), -1}, 1, false});
            } else {
                e = it->second;
                auto& E = m.edges[e];
                if (E.n_tri >= 2)
                    throw RegularityViolation("edge shared by >2 triangles");
                E.tri[E.n_tri++] = static_cast<int>(t);
            }
            m.tri_edges[t][k] = e;
        }
    }
    const double tol = 1e-9 * std::max(1.0, m.domain.diameter());
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
        if (m.edges[e].n_tri != 1) continue;
        const Segment es = m.edge_segment(static_cast<int>(e));
        const Point2 mid = es.at(0.5);
        for (int mark : m.domain.dirichlet_marks) {
            const Segment de = m.domain.edge(mark);
            if (geom::dist_point_segment(mid, de) <= tol &&
                geom::dist_point_segment(es.p(), de) <= tol &&
                geom::dist_point_segment(es.q(), de) <= tol) {
                m.edges[e].dirichlet = true;
                m.dirichlet_edges.push_back(static_cast<int>(e));
                break;
            }
        }
    }
    std::sort(m.dirichlet_edges.begin(), m.dirichlet_edges.end());
}

bool rectilinear_on_grid(const PolygonalDomain& d, double eps, double tol) {
    for (const Point2& v : d.vertices) {
        if (std::abs(v.x / eps - std::round(v.x / eps)) > tol) return false;
        if (std::abs(v.y / eps - std::round(v.y / eps)) > tol) return false;
    }
    for (std::size_t i = 0; i < d.vertices.size(); ++i) {
        const Segment e = d.edge(static_cast<int>(i));
        if (std::abs(e.p().x - e.q().x) > tol * eps &&
            std::abs(e.p().y - e.q().y) > tol * eps)
            return false;
    }
    return true;
}

RegularTriangulation build_structured(const PolygonalDomain& domain,
                                      const MeshParams& params) {
    RegularTriangulation m;
    m.domain = domain;
    m.eps = params.eps;
    m.c1 = params.c1;
    m.c2 = params.c2;

    double xmin = domain.vertices[0].x, xmax = xmin;
    double ymin = domain.vertices[0].y, ymax = ymin;
    for (const Point2& v : domain.vertices) {
        xmin = std::min(xmin, v.x); xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y); ymax = std::max(ymax, v.y);
    }
    const double h = params.eps;
    const int nx = static_cast<int>(std::round((xmax - xmin) / h));
    const int ny = static_cast<int>(std::round((ymax - ymin) / h));

    std::map<std::pair<int, int>, int> vid;
    auto vertex = [&](int i, int j) {
        auto it = vid.find({i, j});
        if (it != vid.end()) return it->second;
        const int id = static_cast<int>(m.points.size());
        vid[{i, j}] = id;
        m.points.push_back({xmin + i * h, ymin + j * h});
        return id;
    };

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Point2 center{xmin + (i + 0.5) * h, ymin + (j + 0.5) * h};
            if (!domain.contains(center)) continue;
            const int v00 = vertex(i, j), v10 = vertex(i + 1, j);
            const int v11 = vertex(i + 1, j + 1), v01 = vertex(i, j + 1);
            // split along the (i,j)->(i+1,j+1) diagonal, consistently
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }
    if (m.triangles.empty())
        throw DomainTooCoarse("no grid cell fits inside the domain");
    finalize_mesh(m);
    return m;
}

// Ear-clipping triangulation of a simple polygon (vertex indices).
std::vector<std::array<int, 3>> ear_clip(const std::vector<Point2>& pts) {
    std::vector<int> ring(pts.size());
    std::iota(ring.begin(), ring.end(), 0);
    std::vector<std::array<int, 3>> tris;
    while (ring.size() > 3) {
        bool clipped = false;
        const int n = static_cast<int>(ring.size());
        for (int k = 0; k < n; ++k) {
            const int ia = ring[(k + n - 1) % n], ib = ring[k], ic = ring[(k + 1) % n];
            const Point2 a = pts[ia], b = pts[ib], c = pts[ic];
            if (tri_area(a, b, c) <= 1e-14) continue;
            bool ok = true;
            for (int other : ring) {
                if (other == ia || other == ib || other == ic) continue;
                const Point2 p = pts[other];
                const double s1 = tri_area(a, b, p), s2 = tri_area(b, c, p),
                             s3 = tri_area(c, a, p);
                if (s1 >= 0 && s2 >= 0 && s3 >= 0) { ok = false; break; }
            }
            if (!ok) continue;
            tris.push_back({ia, ib, ic});
            ring.erase(ring.begin() + k);
            clipped = true;
            break;
        }
        if (!clipped) throw RegularityViolation("ear clipping failed");
    }
    tris.push_back({ring[0], ring[1], ring[2]});
    return tris;
}

RegularTriangulation build_fallback(const PolygonalDomain& domain,
                                    const MeshParams& params) {
    RegularTriangulation m;
    m.domain = domain;
    m.eps = params.eps;
    m.c1 = params.c1;
    m.c2 = params.c2;
    m.points = domain.vertices;
    m.triangles = ear_clip(m.points);

    // Uniform red refinement until every edge fits the size bound.
    auto longest = [&] {
        double L = 0.0;
        for (const auto& t : m.triangles)
            for (int k = 0; k < 3; ++k)
                L = std::max(L, geom::dist(m.points[t[k]], m.points[t[(k + 1) % 3]]));
        return L;
    };
    while (longest() > params.c2 * params.eps) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            if (a > b) std::swap(a, b);
            auto it = mid.find({a, b});
            if (it != mid.end()) return it->second;
            const int id = static_cast<int>(m.points.size());
            mid[{a, b}] = id;
            m.points.push_back(0.5 * (m.points[a] + m.points[b]));
            return id;
        };
        std::vector<std::array<int, 3>> next;
        for (const auto& t : m.triangles) {
            const int m01 = midpoint(t[0], t[1]), m12 = midpoint(t[1], t[2]),
                      m20 = midpoint(t[2], t[0]);
            next.push_back({t[0], m01, m20});
            next.push_back({t[1], m12, m01});
            next.push_back({t[2], m20, m12});
            next.push_back({m01, m12, m20});
        }
        m.triangles = std::move(next);
    }
    finalize_mesh(m);
    return m;
}

} // namespace

RegularTriangulation build_regular(const PolygonalDomain& domain,
                                   const MeshParams& params) {
    domain.validate();
    if (params.eps <= 0.0) throw ConfigError("mesh: eps must be positive");
    if (!(params.c1 > 0.0 && params.c1 < params.c2))
        throw ConfigError("mesh: need 0 < c1 < c2");
    if (params.eps > domain.shortest_edge() + 1e-12)
        throw DomainTooCoarse("eps exceeds the shortest polygon edge");

    RegularTriangulation m = rectilinear_on_grid(domain, params.eps, 1e-9)
                                 ? build_structured(domain, params)
                                 : build_fallback(domain, params);
    const RegularityReport rep = check_regularity(m);
    if (!rep.pass)
        throw RegularityViolation("generated mesh fails the (c1,c2) ball check");
    return m;
}

RegularityReport check_regularity(const RegularTriangulation& mesh) {
    RegularityReport rep;
    rep.min_angle = kPi;
    rep.max_angle = 0.0;
    rep.min_edge = std::numeric_limits<double>::infinity();
    rep.max_edge = 0.0;
    rep.min_inball = std::numeric_limits<double>::infinity();
    rep.max_outball = 0.0;
    rep.pass = true;

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& v = mesh.triangles[t];
        const Point2 p[3] = {mesh.points[v[0]], mesh.points[v[1]], mesh.points[v[2]]};
        const double a = geom::dist(p[1], p[2]);
        const double b = geom::dist(p[2], p[0]);
        const double c = geom::dist(p[0], p[1]);
        const double area = std::abs(tri_area(p[0], p[1], p[2]));
        const double lengths[3] = {a, b, c};
        double maxlen = 0.0;
        for (double L : lengths) {
            rep.min_edge = std::min(rep.min_edge, L);
            rep.max_edge = std::max(rep.max_edge, L);
            maxlen = std::max(maxlen, L);
        }
        double tri_max_angle = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Point2 u = p[(k + 1) % 3] - p[k], w = p[(k + 2) % 3] - p[k];
            const double ang = std::atan2(std::abs(geom::cross(u, w)), geom::dot(u, w));
            rep.min_angle = std::min(rep.min_angle, ang);
            rep.max_angle = std::max(rep.max_angle, ang);
            tri_max_angle = std::max(tri_max_angle, ang);
        }
        const double inball = 4.0 * area / (a + b + c);  // incircle diameter
        const double circum = a * b * c / (2.0 * area);  // circumdiameter
        // minimal enclosing ball: circumcircle if non-obtuse, longest edge else
        const double ball_out = (tri_max_angle > kPi / 2 + 1e-12) ? maxlen : circum;
        rep.min_inball = std::min(rep.min_inball, inball / mesh.eps);
        rep.max_outball = std::max(rep.max_outball, ball_out / mesh.eps);
        if (inball < mesh.c1 * mesh.eps - 1e-12 ||
            ball_out > mesh.c2 * mesh.eps + 1e-12)
            rep.pass = false;
    }
    return rep;
}

double AdaptiveTriangulation::subtri_area(int k) const {
    const auto& v = subtris[k].v;
    return tri_area(points[v[0]], points[v[1]], points[v[2]]);
}

std::array<Point2, 3> AdaptiveTriangulation::subtri_points(int k) const {
    const auto& v = subtris[k].v;
    return {points[v[0]], points[v[1]], points[v[2]]};
}

int AdaptiveTriangulation::local_corner(int k, int v) const {
    for (int c = 0; c < 3; ++c)
        if (subtris[k].v[c] == v) return c;
    return -1;
}

double c1_adaptive(double c1, double c2, double a) {
    // Knots sit at parameter >= a on edges of length >= c1*eps, and inner
    // angles are bounded below by asin(c1/c2).
    return a * c1 * (c1 / c2);
}

double c2_adaptive(double c2, double /*a*/) { return c2; }

AdaptiveTriangulation subdivide(const RegularTriangulation& mesh,
                                const AdaptiveParams& params) {
    if (!(params.a > 0.0 && params.a < 0.5))
        throw ParamOutOfRange("adaptive: a must lie in (0, 1/2)");
    if (params.t_per_edge.size() != mesh.edges.size())
        throw ParamOutOfRange("adaptive: one t per regular edge required");
    for (double t : params.t_per_edge)
        if (t < params.a - 1e-12 || t > 1.0 - params.a + 1e-12)
            throw ParamOutOfRange("adaptive: t outside [a, 1-a]");

    AdaptiveTriangulation T;
    T.base = &mesh;
    T.params = params;
    T.points = mesh.points;
    T.points.reserve(mesh.points.size() + mesh.edges.size());
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const double t = params.t_per_edge[e];
        T.points.push_back(t * mesh.edge_first(static_cast<int>(e)) +
                           (1.0 - t) * mesh.edge_second(static_cast<int>(e)));
    }

    // Four sub-triangles per regular triangle: three corners + one central.
    // Index layout: 4*t + corner (0..2), 4*t + 3 = central.
    std::vector<std::array<int, 3>> knots(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (int k = 0; k < 3; ++k)
            knots[t][k] = T.knot_vertex(mesh.tri_edges[t][k]);
        const auto& v = mesh.triangles[t];
        const int p = static_cast<int>(t);
        T.subtris.push_back({{v[0], knots[t][0], knots[t][2]}, p});
        T.subtris.push_back({{v[1], knots[t][1], knots[t][0]}, p});
        T.subtris.push_back({{v[2], knots[t][2], knots[t][1]}, p});
        T.subtris.push_back({{knots[t][0], knots[t][1], knots[t][2]}, p});
    }

    // Central edges: shared by the central sub-triangle and one corner.
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const int central = 4 * static_cast<int>(t) + 3;
        for (int k = 0; k < 3; ++k) {
            // edge (knot_k, knot_{k+1}) faces corner k+1
            AdaptiveTriangulation::SubEdge se;
            se.a = knots[t][k];
            se.b = knots[t][(k + 1) % 3];
            se.kind = SubEdgeKind::Central;
            se.tri = {central, 4 * static_cast<int>(t) + (k + 1) % 3};
            se.n_tri = 2;
            T.subedges.push_back(se);
        }
    }

    // Halves of regular edges: shared by one corner sub-triangle per
    // incident regular triangle.
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const auto& E = mesh.edges[e];
        const int z = T.knot_vertex(static_cast<int>(e));
        SubEdgeKind kind = SubEdgeKind::InteriorHalf;
        if (E.n_tri == 1)
            kind = E.dirichlet ? SubEdgeKind::DirichletHalf : SubEdgeKind::BoundaryHalf;
        for (int endpoint : {E.a, E.b}) {
            AdaptiveTriangulation::SubEdge se;
            se.a = endpoint;
            se.b = z;
            se.kind = kind;
            se.parent_edge = static_cast<int>(e);
            se.n_tri = 0;
            for (int ti = 0; ti < E.n_tri; ++ti) {
                const int t = E.tri[ti];
                for (int c = 0; c < 3; ++c)
                    if (mesh.triangles[t][c] == endpoint)
                        se.tri[se.n_tri++] = 4 * t + c;
            }
            T.subedges.push_back(se);
        }
    }

    for (std::size_t e = 0; e < T.subedges.size(); ++e)
        if (T.subedge_is_interior(static_cast<int>(e)))
            T.interior_subedges.push_back(static_cast<int>(e));
    return T;
}

} // namespace fracsim::mesh
