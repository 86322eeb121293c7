#include <doctest.h>

#include <random>

#include "fracsim/geometry.hpp"

using namespace fracsim::geom;

namespace {
Segment seg(double x1, double y1, double x2, double y2) {
    return Segment{{x1, y1}, {x2, y2}};
}
} // namespace

TEST_CASE("segment basics") {
    const Segment s = seg(0, 0, 3, 4);
    CHECK(s.length() == doctest::Approx(5.0));
    CHECK(s.at(0.5).x == doctest::Approx(1.5));
    CHECK(s.at(0.5).y == doctest::Approx(2.0));
    CHECK_THROWS_AS(Segment({1, 1}, {1, 1}), std::invalid_argument);
}

TEST_CASE("measure counts collinear overlap once") {
    SegmentSet s;
    s.add(seg(0, 0, 1, 0));
    CHECK(measure(s) == doctest::Approx(1.0));

    s.add(seg(0, 0, 1, 0));  // exact duplicate
    CHECK(measure(s) == doctest::Approx(1.0));

    s.add(seg(0.5, 0, 2, 0));  // partial overlap, extends to x=2
    CHECK(measure(s) == doctest::Approx(2.0));

    s.add(seg(0, 1, 1, 1));  // parallel but disjoint line
    CHECK(measure(s) == doctest::Approx(3.0));

    s.add(seg(0.5, -1, 0.5, 1));  // transversal crossing: no shared length
    CHECK(measure(s) == doctest::Approx(5.0));
}

TEST_CASE("measure of disjoint pieces on one line") {
    SegmentSet s;
    s.add(seg(0, 0, 1, 0));
    s.add(seg(2, 0, 3.5, 0));
    CHECK(measure(s) == doctest::Approx(2.5));
    CHECK(s.normalized().size() == 2);
}

TEST_CASE("residual and intersection measures partition the total") {
    SegmentSet s;
    s.add(seg(0, 0, 2, 0));
    s.add(seg(0, 0, 0, 1));

    SegmentSet cover;
    cover.add(seg(1, 0, 3, 0));  // covers [1,2] of the horizontal piece

    CHECK(residual_measure(s, cover) == doctest::Approx(2.0));
    CHECK(intersection_measure(s, cover) == doctest::Approx(1.0));
    CHECK(residual_measure(s, cover) + intersection_measure(s, cover) ==
          doctest::Approx(measure(s)));

    SegmentSet empty;
    CHECK(residual_measure(s, empty) == doctest::Approx(measure(s)));
    CHECK(residual_measure(empty, s) == doctest::Approx(0.0));
}

TEST_CASE("subset has zero residual") {
    SegmentSet part, whole;
    part.add(seg(0.25, 0.5, 0.75, 0.5));
    whole.add(seg(0, 0.5, 1, 0.5));
    CHECK(residual_measure(part, whole) == doctest::Approx(0.0));
    CHECK(residual_measure(whole, part) == doctest::Approx(0.5));
}

TEST_CASE("transversal cover contributes no overlap length") {
    SegmentSet s;
    s.add(seg(0, 0, 1, 0));
    SegmentSet cover;
    cover.add(seg(0.5, -1, 0.5, 1));
    CHECK(residual_measure(s, cover) == doctest::Approx(1.0));
}

TEST_CASE("hausdorff distance conventions") {
    SegmentSet a, b, empty;
    a.add(seg(0, 0, 1, 0));
    b.add(seg(0, 0, 1, 0));
    CHECK(hausdorff_distance(a, b, 10.0) == doctest::Approx(0.0));
    CHECK(hausdorff_distance(empty, empty, 10.0) == doctest::Approx(0.0));
    CHECK(hausdorff_distance(a, empty, 10.0) == doctest::Approx(10.0));
    CHECK(hausdorff_distance(empty, a, 10.0) == doctest::Approx(10.0));
}

TEST_CASE("hausdorff distance of translated segments") {
    SegmentSet a, b;
    a.add(seg(0, 0, 1, 0));
    b.add(seg(0, 0.25, 1, 0.25));
    CHECK(hausdorff_distance(a, b, 10.0) == doctest::Approx(0.25).epsilon(1e-6));

    // one-sided extension: directed distances differ
    SegmentSet c;
    c.add(seg(0, 0, 2, 0));
    CHECK(hausdorff_distance(a, c, 10.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("hausdorff distance against a brute-force point sample") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        SegmentSet a, b;
        std::vector<Segment> sa, sb;
        for (int i = 0; i < 3; ++i) {
            sa.push_back(seg(u(rng), u(rng), 1 + u(rng), u(rng)));
            sb.push_back(seg(u(rng), u(rng), u(rng), 1 + u(rng)));
            a.add(sa.back());
            b.add(sb.back());
        }
        // dense sampling oracle
        const auto dist_to = [](Point2 p, const std::vector<Segment>& set) {
            double best = 1e300;
            for (const auto& s : set) best = std::min(best, dist_point_segment(p, s));
            return best;
        };
        double brute = 0.0;
        const int N = 400;
        for (int i = 0; i <= N; ++i) {
            const double t = static_cast<double>(i) / N;
            for (const auto& s : sa) brute = std::max(brute, dist_to(s.at(t), sb));
            for (const auto& s : sb) brute = std::max(brute, dist_to(s.at(t), sa));
        }
        const double d = hausdorff_distance(a, b, 100.0);
        CHECK(d >= brute - 1e-9);
        CHECK(d <= brute + 0.02);  // sampling gap
    }
}

TEST_CASE("normalized merges collinear chains") {
    SegmentSet s;
    s.add(seg(0, 0, 1, 1));
    s.add(seg(1, 1, 2, 2));
    s.add(seg(0.5, 0.5, 1.5, 1.5));
    const SegmentSet n = s.normalized();
    CHECK(n.size() == 1);
    CHECK(measure(n) == doctest::Approx(2.0 * std::sqrt(2.0)));
}
