#include <doctest.h>

#include <numeric>
#include <random>

#include "fracsim/femspace.hpp"

using namespace fracsim;
using namespace fracsim::fem;

namespace {

mesh::PolygonalDomain tearing_square() {
    mesh::PolygonalDomain d;
    d.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    d.dirichlet_marks = {0, 2};
    return d;
}

mesh::AdaptiveTriangulation subdiv(const mesh::RegularTriangulation& R, double a,
                                   double t) {
    return mesh::subdivide(R, {a, std::vector<double>(R.edges.size(), t)});
}

// Element stiffness of the affine element on a triangle, derived from the
// rotated-edge gradient formula; written independently of the solver.
std::array<std::array<double, 3>, 3> element_stiffness(
    const std::array<geom::Point2, 3>& p) {
    const double area2 = geom::cross(p[1] - p[0], p[2] - p[0]);
    std::array<std::array<double, 2>, 3> g;
    for (int i = 0; i < 3; ++i) {
        const geom::Point2 a = p[(i + 1) % 3], b = p[(i + 2) % 3];
        g[i] = {(a.y - b.y) / area2, (b.x - a.x) / area2};
    }
    std::array<std::array<double, 3>, 3> S{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            S[i][j] = 0.5 * area2 * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
    return S;
}

struct UF {
    std::vector<int> p;
    explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int i) {
        while (p[i] != i) { p[i] = p[p[i]]; i = p[i]; }
        return i;
    }
    void join(int a, int b) { p[find(a)] = find(b); }
};

} // namespace

TEST_CASE("boundary data reproduces affine fields exactly") {
    const mesh::RegularTriangulation R =
        mesh::build_regular(tearing_square(), {0.25, 0.5, 2.0});
    const BoundaryData g(R, [](geom::Point2 p) { return 2 * p.x - 3 * p.y + 1; });
    CHECK(g.bulk() == doctest::Approx(4.0 + 9.0));  // |grad|^2 * area
    for (std::size_t t = 0; t < R.triangles.size(); ++t) {
        const auto gr = g.gradient_on_triangle(static_cast<int>(t));
        CHECK(gr[0] == doctest::Approx(2.0));
        CHECK(gr[1] == doctest::Approx(-3.0));
    }
    CHECK(g.sup_norm() == doctest::Approx(3.0));  // attained at (1, 0)

    const mesh::AdaptiveTriangulation T = subdiv(R, 0.25, 0.3);
    for (std::size_t e = 0; e < R.edges.size(); ++e) {
        const int knot = T.knot_vertex(static_cast<int>(e));
        const geom::Point2 z = T.points[knot];
        CHECK(g.value_at(T, knot) == doctest::Approx(2 * z.x - 3 * z.y + 1));
    }
}

TEST_CASE("unbroken solve reproduces affine boundary data") {
    const mesh::RegularTriangulation R =
        mesh::build_regular(tearing_square(), {0.25, 0.5, 2.0});
    const mesh::AdaptiveTriangulation T = subdiv(R, 0.25, 0.4);
    const BoundaryData g(R, [](geom::Point2 p) { return 0.7 * p.y; });
    const DiscreteDisplacement u =
        solve_displacement(T, BrokenEdgeSet::none(T), g);
    for (std::size_t k = 0; k < T.subtris.size(); ++k)
        for (int v : T.subtris[k].v)
            CHECK(u.value(static_cast<int>(k), v) ==
                  doctest::Approx(g.value_at(T, v)).epsilon(1e-9));
    CHECK(bulk_energy(u) == doctest::Approx(g.bulk()));
    CHECK(jump_set(u, default_tol_jump(g)).empty());
    CHECK(boundary_violation_set(u, g, default_tol_jump(g)).empty());
}

TEST_CASE("solver satisfies stationarity against an independent assembly") {
    const mesh::RegularTriangulation R =
        mesh::build_regular(tearing_square(), {0.25, 0.5, 2.0});
    const mesh::AdaptiveTriangulation T = subdiv(R, 0.25, 0.35);
    const BoundaryData g(R, [](geom::Point2 p) {
        return std::sin(3 * p.x) + p.y * p.y;
    });

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    BrokenEdgeSet B = BrokenEdgeSet::none(T);
    for (int e : T.interior_subedges)
        if (coin(rng) < 0.15) B.interior_broken[e] = 1;
    for (int e : R.dirichlet_edges)
        if (coin(rng) < 0.15) B.released[e] = 1;

    const DiscreteDisplacement u = solve_displacement(T, B, g);
    const int ndof = static_cast<int>(3 * T.subtris.size());

    // residual r = K u from an independent element assembly
    std::vector<double> r(ndof, 0.0);
    for (std::size_t k = 0; k < T.subtris.size(); ++k) {
        const auto S = element_stiffness(T.subtri_points(static_cast<int>(k)));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r[3 * k + i] += 2.0 * S[i][j] * u.corner_values[3 * k + j];
    }

    // admissible classes: continuity across unbroken interior sub-edges
    UF uf(ndof);
    for (int e : T.interior_subedges) {
        if (B.interior_broken[e]) continue;
        const auto& se = T.subedges[e];
        for (int v : {se.a, se.b})
            uf.join(3 * se.tri[0] + T.local_corner(se.tri[0], v),
                    3 * se.tri[1] + T.local_corner(se.tri[1], v));
    }
    std::vector<char> fixed(ndof, 0);
    for (std::size_t e = 0; e < T.subedges.size(); ++e) {
        const auto& se = T.subedges[e];
        if (se.kind != mesh::SubEdgeKind::DirichletHalf || B.released[se.parent_edge])
            continue;
        for (int v : {se.a, se.b}) {
            const int dof = 3 * se.tri[0] + T.local_corner(se.tri[0], v);
            fixed[uf.find(dof)] = 1;
            // constrained dofs carry the datum exactly
            CHECK(u.corner_values[dof] ==
                  doctest::Approx(g.value_at(T, v)).epsilon(1e-9));
        }
    }

    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> class_val(ndof, 0.0);
        for (int d = 0; d < ndof; ++d)
            if (uf.find(d) == d && !fixed[d]) class_val[d] = val(rng);
        double dir = 0.0, scale = 1.0;
        for (int d = 0; d < ndof; ++d) {
            dir += class_val[uf.find(d)] * r[d];
            scale += std::abs(r[d]);
        }
        CHECK(std::abs(dir) / scale < 1e-8);
    }
}

TEST_CASE("fully broken configuration relaxes to zero") {
    const mesh::RegularTriangulation R =
        mesh::build_regular(tearing_square(), {0.5, 0.5, 2.0});
    const mesh::AdaptiveTriangulation T = subdiv(R, 0.25, 0.5);
    const BoundaryData g(R, [](geom::Point2 p) { return 2 * p.y; });
    BrokenEdgeSet B = BrokenEdgeSet::none(T);
    for (int e : T.interior_subedges) B.interior_broken[e] = 1;
    for (int e : R.dirichlet_edges) B.released[e] = 1;
    const DiscreteDisplacement u = solve_displacement(T, B, g);
    CHECK(bulk_energy(u) == doctest::Approx(0.0));
    CHECK(u.sup_norm() == doctest::Approx(0.0));  // floating pieces pinned
}

TEST_CASE("zero-jump broken edges are pruned from the jump set") {
    // all sides Dirichlet so the affine field is the unique unbroken minimizer
    mesh::PolygonalDomain d = tearing_square();
    d.dirichlet_marks = {0, 1, 2, 3};
    const mesh::RegularTriangulation R = mesh::build_regular(d, {0.25, 0.5, 2.0});
    const mesh::AdaptiveTriangulation T = subdiv(R, 0.25, 0.5);
    const BoundaryData g(R, [](geom::Point2 p) { return p.x + p.y; });
    BrokenEdgeSet B = BrokenEdgeSet::none(T);
    B.interior_broken[T.interior_subedges[7]] = 1;
    const DiscreteDisplacement u = solve_displacement(T, B, g);
    // an affine datum transmits despite the allowed jump: no energy gain
    CHECK(jump_set(u, default_tol_jump(g)).empty());
    CHECK(bulk_energy(u) == doctest::Approx(g.bulk()));
}

TEST_CASE("truncation clamps and never enlarges the jump set") {
    const mesh::RegularTriangulation R =
        mesh::build_regular(tearing_square(), {0.25, 0.5, 2.0});
    const mesh::AdaptiveTriangulation T = subdiv(R, 0.25, 0.4);
    const BoundaryData g(R, [](geom::Point2 p) { return 2 * p.y - 1; });
    BrokenEdgeSet B = BrokenEdgeSet::none(T);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int e : T.interior_subedges)
        if (coin(rng) < 0.2) B.interior_broken[e] = 1;
    const DiscreteDisplacement u = solve_displacement(T, B, g);
    const DiscreteDisplacement v = truncate(u, g.sup_norm());
    CHECK(v.sup_norm() <= g.sup_norm() + 1e-15);
    const double tol = default_tol_jump(g);
    CHECK(geom::residual_measure(jump_set(v, tol), jump_set(u, tol)) ==
          doctest::Approx(0.0));
    // already-bounded fields are untouched
    for (std::size_t i = 0; i < u.corner_values.size(); ++i)
        if (std::abs(u.corner_values[i]) <= g.sup_norm())
            CHECK(v.corner_values[i] == u.corner_values[i]);
}
