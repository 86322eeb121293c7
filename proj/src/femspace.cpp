#include "fracsim/femspace.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fracsim/constructions.hpp"
#include "fracsim/errors.hpp"

namespace fracsim::fem {

namespace {

// Element stiffness of the Dirichlet form on a triangle: S_ij = |K| gl_i.gl_j
// with gl_i the barycentric gradient of corner i.
std::array<std::array<double, 3>, 3> element_stiffness(const std::array<Point2, 3>& p,
                                                       double& area_out) {
    const double area = 0.5 * geom::cross(p[1] - p[0], p[2] - p[0]);
    area_out = area;
    const double inv2A = 1.0 / (2.0 * area);
    std::array<std::array<double, 2>, 3> gl;
    for (int i = 0; i < 3; ++i) {
        const Point2 a = p[(i + 1) % 3], b = p[(i + 2) % 3];
        gl[i] = {inv2A * (a.y - b.y), inv2A * (b.x - a.x)};
    }
    std::array<std::array<double, 3>, 3> S;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            S[i][j] = area * (gl[i][0] * gl[j][0] + gl[i][1] * gl[j][1]);
    return S;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int i) {
        while (parent[i] != i) { parent[i] = parent[parent[i]]; i = parent[i]; }
        return i;
    }
    void unite(int i, int j) { parent[find(i)] = find(j); }
};

} // namespace

BoundaryData::BoundaryData(const RegularTriangulation& R, std::vector<double> nodal)
    : mesh_(&R), nodal_(std::move(nodal)) {
    if (nodal_.size() != R.points.size())
        throw ConfigError("boundary data: one nodal value per mesh vertex");
    for (double v : nodal_) sup_ = std::max(sup_, std::abs(v));
    grad_.resize(R.triangles.size());
    for (std::size_t t = 0; t < R.triangles.size(); ++t) {
        const auto& v = R.triangles[t];
        const Point2 p0 = R.points[v[0]], p1 = R.points[v[1]], p2 = R.points[v[2]];
        const double inv2A = 1.0 / geom::cross(p1 - p0, p2 - p0);  // = 1/(2|T|)
        const double u0 = nodal_[v[0]], u1 = nodal_[v[1]], u2 = nodal_[v[2]];
        grad_[t] = {inv2A * (u0 * (p1.y - p2.y) + u1 * (p2.y - p0.y) + u2 * (p0.y - p1.y)),
                    inv2A * (u0 * (p2.x - p1.x) + u1 * (p0.x - p2.x) + u2 * (p1.x - p0.x))};
    }
}

BoundaryData::BoundaryData(const RegularTriangulation& R,
                           const std::function<double(Point2)>& f)
    : BoundaryData(R, mesh::interpolate_affine(R, f)) {}

double BoundaryData::value_at(const AdaptiveTriangulation& T, int vertex) const {
    const int nbase = static_cast<int>(mesh_->points.size());
    if (vertex < nbase) return nodal_[vertex];
    const int e = vertex - nbase;
    const double t = T.params.t_per_edge[e];
    return t * nodal_[mesh_->edges[e].a] + (1.0 - t) * nodal_[mesh_->edges[e].b];
}

double BoundaryData::bulk() const {
    double s = 0.0;
    for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
        const auto g = grad_[t];
        s += mesh_->triangle_area(static_cast<int>(t)) * (g[0] * g[0] + g[1] * g[1]);
    }
    return s;
}

double BoundaryData::l2_sq() const {
    // g^2 is quadratic per triangle; the edge-midpoint rule is exact.
    double s = 0.0;
    for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
        const auto& v = mesh_->triangles[t];
        const double area = mesh_->triangle_area(static_cast<int>(t));
        for (int k = 0; k < 3; ++k) {
            const double m = 0.5 * (nodal_[v[k]] + nodal_[v[(k + 1) % 3]]);
            s += area / 3.0 * m * m;
        }
    }
    return s;
}

double BoundaryData::h1_norm() const { return std::sqrt(bulk() + l2_sq()); }

BrokenEdgeSet BrokenEdgeSet::none(const AdaptiveTriangulation& T) {
    BrokenEdgeSet b;
    b.interior_broken.assign(T.subedges.size(), 0);
    b.released.assign(T.base->edges.size(), 0);
    return b;
}

bool BrokenEdgeSet::any() const {
    return std::any_of(interior_broken.begin(), interior_broken.end(),
                       [](char c) { return c != 0; }) ||
           std::any_of(released.begin(), released.end(),
                       [](char c) { return c != 0; });
}

std::array<double, 2> DiscreteDisplacement::gradient(int k) const {
    const auto p = tri->subtri_points(k);
    const double inv2A = 1.0 / (2.0 * tri->subtri_area(k));
    const double u0 = corner_values[3 * k], u1 = corner_values[3 * k + 1],
                 u2 = corner_values[3 * k + 2];
    return {inv2A * (u0 * (p[1].y - p[2].y) + u1 * (p[2].y - p[0].y) + u2 * (p[0].y - p[1].y)),
            inv2A * (u0 * (p[2].x - p[1].x) + u1 * (p[0].x - p[2].x) + u2 * (p[1].x - p[0].x))};
}

double DiscreteDisplacement::sup_norm() const {
    double s = 0.0;
    for (double v : corner_values) s = std::max(s, std::abs(v));
    return s;
}

double default_tol_jump(const BoundaryData& g) {
    return 1e-9 * std::max(1.0, g.sup_norm());
}

DiscreteDisplacement solve_displacement(const AdaptiveTriangulation& T,
                                        const BrokenEdgeSet& broken,
                                        const BoundaryData& g) {
    const int nsub = static_cast<int>(T.subtris.size());
    const int ndof = 3 * nsub;

    // Merge DOFs across unbroken interior sub-edges: affine traces agree on a
    // segment iff they agree at its endpoints.
    UnionFind uf(ndof);
    for (std::size_t e = 0; e < T.subedges.size(); ++e) {
        const auto& se = T.subedges[e];
        if (!T.subedge_is_interior(static_cast<int>(e))) continue;
        if (broken.interior_broken[e]) continue;
        const int k0 = se.tri[0], k1 = se.tri[1];
        for (int v : {se.a, se.b})
            uf.unite(3 * k0 + T.local_corner(k0, v), 3 * k1 + T.local_corner(k1, v));
    }

    // Trace constraints on non-released Dirichlet edges.
    const double fix_tol = 1e-9 * std::max(1.0, g.sup_norm());
    std::vector<char> is_fixed(ndof, 0);
    std::vector<double> fixed_val(ndof, 0.0);
    for (std::size_t e = 0; e < T.subedges.size(); ++e) {
        const auto& se = T.subedges[e];
        if (se.kind != mesh::SubEdgeKind::DirichletHalf) continue;
        if (broken.released[se.parent_edge]) continue;
        const int k = se.tri[0];
        for (int v : {se.a, se.b}) {
            const int dof = 3 * k + T.local_corner(k, v);
            is_fixed[dof] = 1;
            fixed_val[dof] = g.value_at(T, v);
        }
    }

    // Representative bookkeeping.
    std::vector<int> rep_of(ndof);
    std::vector<char> rep_fixed(ndof, 0);
    std::vector<double> rep_val(ndof, 0.0);
    for (int d = 0; d < ndof; ++d) rep_of[d] = uf.find(d);
    for (int d = 0; d < ndof; ++d) {
        if (!is_fixed[d]) continue;
        const int r = rep_of[d];
        if (rep_fixed[r] && std::abs(rep_val[r] - fixed_val[d]) > fix_tol)
            throw SingularSystem("inconsistent trace constraints after merge");
        rep_fixed[r] = 1;
        rep_val[r] = fixed_val[d];
    }

    // Connected components of representatives through sub-triangles; floating
    // components get their additive constant pinned to 0.
    {
        UnionFind comp(ndof);
        for (int k = 0; k < nsub; ++k) {
            comp.unite(rep_of[3 * k], rep_of[3 * k + 1]);
            comp.unite(rep_of[3 * k], rep_of[3 * k + 2]);
        }
        std::vector<char> comp_constrained(ndof, 0);
        for (int d = 0; d < ndof; ++d)
            if (rep_of[d] == d && rep_fixed[d]) comp_constrained[comp.find(d)] = 1;
        std::vector<int> pin(ndof, -1);
        for (int d = 0; d < ndof; ++d) {
            if (rep_of[d] != d || rep_fixed[d]) continue;
            const int c = comp.find(d);
            if (comp_constrained[c]) continue;
            if (pin[c] < 0) {
                pin[c] = d;
                rep_fixed[d] = 1;
                rep_val[d] = 0.0;
            }
        }
    }

    // Reduced numbering of free representatives.
    std::vector<int> free_idx(ndof, -1);
    int nfree = 0;
    for (int d = 0; d < ndof; ++d)
        if (rep_of[d] == d && !rep_fixed[d]) free_idx[d] = nfree++;

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(9) * nsub);
    for (int k = 0; k < nsub; ++k) {
        double area;
        const auto S = element_stiffness(T.subtri_points(k), area);
        int r[3];
        for (int i = 0; i < 3; ++i) r[i] = rep_of[3 * k + i];
        for (int i = 0; i < 3; ++i) {
            if (free_idx[r[i]] < 0) continue;
            for (int j = 0; j < 3; ++j) {
                if (free_idx[r[j]] >= 0)
                    trips.emplace_back(free_idx[r[i]], free_idx[r[j]], S[i][j]);
                else
                    rhs[free_idx[r[i]]] -= S[i][j] * rep_val[r[j]];
            }
        }
    }

    Eigen::VectorXd x(nfree);
    if (nfree > 0) {
        Eigen::SparseMatrix<double> A(nfree, nfree);
        A.setFromTriplets(trips.begin(), trips.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
        if (ldlt.info() != Eigen::Success)
            throw SingularSystem("sparse factorization failed");
        x = ldlt.solve(rhs);
        const double rnorm = (A * x - rhs).norm();
        const double scale = std::max(1.0, rhs.norm());
        if (rnorm > 1e-10 * scale) {
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                     Eigen::Lower | Eigen::Upper>
                cg(A);
            cg.setTolerance(1e-13);
            x = cg.solveWithGuess(rhs, x);
            if ((A * x - rhs).norm() > 1e-10 * scale)
                throw SingularSystem("solver residual above tolerance");
        }
    }

    DiscreteDisplacement u;
    u.tri = &T;
    u.broken = broken;
    u.corner_values.resize(ndof);
    for (int d = 0; d < ndof; ++d) {
        const int r = rep_of[d];
        u.corner_values[d] = rep_fixed[r] ? rep_val[r] : x[free_idx[r]];
    }
    return u;
}

SegmentSet jump_set(const DiscreteDisplacement& u, double tol_jump) {
    const AdaptiveTriangulation& T = *u.tri;
    const double tol_geom = 1e-9 * std::max(1.0, T.base->domain.diameter());
    SegmentSet out(tol_geom);
    for (std::size_t e = 0; e < T.subedges.size(); ++e) {
        if (!T.subedge_is_interior(static_cast<int>(e))) continue;
        if (!u.broken.interior_broken[e]) continue;
        const auto& se = T.subedges[e];
        const double ja = std::abs(u.value(se.tri[0], se.a) - u.value(se.tri[1], se.a));
        const double jb = std::abs(u.value(se.tri[0], se.b) - u.value(se.tri[1], se.b));
        if (std::max(ja, jb) > tol_jump)
            out.add(T.subedge_segment(static_cast<int>(e)));
    }
    return out;
}

SegmentSet boundary_violation_set(const DiscreteDisplacement& u,
                                  const BoundaryData& g, double tol_jump,
                                  DirichletGranularity granularity) {
    const AdaptiveTriangulation& T = *u.tri;
    const RegularTriangulation& R = *T.base;
    const double tol_geom = 1e-9 * std::max(1.0, R.domain.diameter());
    SegmentSet out(tol_geom);
    std::vector<char> edge_done(R.edges.size(), 0);
    for (std::size_t e = 0; e < T.subedges.size(); ++e) {
        const auto& se = T.subedges[e];
        if (se.kind != mesh::SubEdgeKind::DirichletHalf) continue;
        const int k = se.tri[0];
        const double va = std::abs(u.value(k, se.a) - g.value_at(T, se.a));
        const double vb = std::abs(u.value(k, se.b) - g.value_at(T, se.b));
        if (std::max(va, vb) <= tol_jump) continue;
        if (granularity == DirichletGranularity::SubEdge) {
            out.add(T.subedge_segment(static_cast<int>(e)));
        } else if (!edge_done[se.parent_edge]) {
            edge_done[se.parent_edge] = 1;
            out.add(R.edge_segment(se.parent_edge));
        }
    }
    return out;
}

SegmentSet combined_jump_set(const DiscreteDisplacement& u, const BoundaryData& g,
                             double tol_jump, DirichletGranularity granularity) {
    SegmentSet s = jump_set(u, tol_jump);
    s.add(boundary_violation_set(u, g, tol_jump, granularity));
    return s;
}

double bulk_energy(const DiscreteDisplacement& u) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.tri->subtris.size(); ++k) {
        const auto gr = u.gradient(static_cast<int>(k));
        s += u.tri->subtri_area(static_cast<int>(k)) * (gr[0] * gr[0] + gr[1] * gr[1]);
    }
    return s;
}

DiscreteDisplacement truncate(const DiscreteDisplacement& u, double M) {
    DiscreteDisplacement out = u;
    for (double& v : out.corner_values) v = std::clamp(v, -M, M);
    return out;
}

} // namespace fracsim::fem
