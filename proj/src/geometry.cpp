#include "fracsim/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace fracsim::geom {

double dist_point_segment(Point2 x, const Segment& s) {
    const Point2 d = s.q() - s.p();
    const double len2 = dot(d, d);
    double t = dot(x - s.p(), d) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(x, s.p() + t * d);
}

double dist_point_line(Point2 x, const Segment& s) {
    return std::abs(cross(s.dir(), x - s.p()));
}

bool collinear(const Segment& a, const Segment& b, double tol) {
    return dist_point_line(b.p(), a) <= tol && dist_point_line(b.q(), a) <= tol &&
           dist_point_line(a.p(), b) <= tol && dist_point_line(a.q(), b) <= tol;
}

namespace {

using Interval = std::pair<double, double>;

std::vector<Interval> merge_intervals(std::vector<Interval> iv, double tol) {
    if (iv.empty()) return iv;
    std::sort(iv.begin(), iv.end());
    std::vector<Interval> out;
    out.push_back(iv[0]);
    for (std::size_t i = 1; i < iv.size(); ++i) {
        if (iv[i].first <= out.back().second + tol)
            out.back().second = std::max(out.back().second, iv[i].second);
        else
            out.push_back(iv[i]);
    }
    return out;
}

double total_length(const std::vector<Interval>& iv) {
    double s = 0.0;
    for (const auto& [a, b] : iv) s += b - a;
    return s;
}

// A \ B for merged interval lists.
std::vector<Interval> subtract_intervals(const std::vector<Interval>& a,
                                         const std::vector<Interval>& b) {
    std::vector<Interval> out;
    for (auto [lo, hi] : a) {
        double cur = lo;
        for (const auto& [blo, bhi] : b) {
            if (bhi <= cur) continue;
            if (blo >= hi) break;
            if (blo > cur) out.emplace_back(cur, std::min(blo, hi));
            cur = std::max(cur, bhi);
            if (cur >= hi) break;
        }
        if (cur < hi) out.emplace_back(cur, hi);
    }
    return out;
}

std::vector<Interval> intersect_intervals(const std::vector<Interval>& a,
                                          const std::vector<Interval>& b) {
    std::vector<Interval> out;
    for (auto [lo, hi] : a)
        for (const auto& [blo, bhi] : b) {
            const double l = std::max(lo, blo), h = std::min(hi, bhi);
            if (h > l) out.emplace_back(l, h);
        }
    return out;
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

// Groups of mutually collinear segments; each group carries a representative
// line (longest member).
struct CollinearClass {
    int rep;                       // index of longest segment
    std::vector<int> members;
};

std::vector<CollinearClass> collinear_classes(const std::vector<Segment>& segs,
                                              double tol) {
    const int n = static_cast<int>(segs.size());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (collinear(segs[i], segs[j], tol)) uf.unite(i, j);

    std::vector<CollinearClass> classes;
    std::vector<int> class_of(n, -1);
    for (int i = 0; i < n; ++i) {
        const int r = uf.find(i);
        if (class_of[r] < 0) {
            class_of[r] = static_cast<int>(classes.size());
            classes.push_back({i, {}});
        }
        auto& c = classes[class_of[r]];
        c.members.push_back(i);
        if (segs[i].length() > segs[c.rep].length()) c.rep = i;
    }
    return classes;
}

// Projection of a segment onto the representative's supporting line, as a
// 1D interval in arclength coordinates.
Interval project_onto(const Segment& rep, const Segment& s) {
    const Point2 d = rep.dir();
    double a = dot(s.p() - rep.p(), d);
    double b = dot(s.q() - rep.p(), d);
    if (a > b) std::swap(a, b);
    return {a, b};
}

} // namespace

SegmentSet SegmentSet::normalized() const {
    SegmentSet out(tol_);
    const auto classes = collinear_classes(segs_, tol_);
    for (const auto& c : classes) {
        const Segment& rep = segs_[c.rep];
        std::vector<Interval> iv;
        iv.reserve(c.members.size());
        for (int m : c.members) iv.push_back(project_onto(rep, segs_[m]));
        const Point2 d = rep.dir();
        for (const auto& [a, b] : merge_intervals(std::move(iv), tol_))
            out.add(Segment(rep.p() + a * d, rep.p() + b * d));
    }
    return out;
}

double measure(const SegmentSet& s) {
    double total = 0.0;
    const auto classes = collinear_classes(s.segments(), s.tol());
    for (const auto& c : classes) {
        const Segment& rep = s.segments()[c.rep];
        std::vector<Interval> iv;
        iv.reserve(c.members.size());
        for (int m : c.members) iv.push_back(project_onto(rep, s.segments()[m]));
        total += total_length(merge_intervals(std::move(iv), s.tol()));
    }
    return total;
}

namespace {

// Shared core of residual/intersection: per collinear class of S, the merged
// S-intervals and the merged intervals of cover segments on the same line.
double overlap_split(const SegmentSet& s, const SegmentSet& cover, bool residual) {
    const double tol = s.tol();
    double total = 0.0;
    const auto classes = collinear_classes(s.segments(), tol);
    for (const auto& c : classes) {
        const Segment& rep = s.segments()[c.rep];
        std::vector<Interval> siv, civ;
        for (int m : c.members) siv.push_back(project_onto(rep, s.segments()[m]));
        for (const Segment& cs : cover.segments())
            if (collinear(rep, cs, tol)) civ.push_back(project_onto(rep, cs));
        auto sm = merge_intervals(std::move(siv), tol);
        auto cm = merge_intervals(std::move(civ), tol);
        total += total_length(residual ? subtract_intervals(sm, cm)
                                       : intersect_intervals(sm, cm));
    }
    return total;
}

double dist_point_set(Point2 x, const SegmentSet& k) {
    double best = std::numeric_limits<double>::infinity();
    for (const Segment& s : k.segments())
        best = std::min(best, dist_point_segment(x, s));
    return best;
}

// sup over x in [a,b] of dist(x, K). The distance to any single segment is
// convex along the line through a-b, so on a subsegment the min over K is
// bounded by min_c max(d_c(pa), d_c(pb)); branch-and-bound on that bound.
// It is exact wherever one segment stays closest, so only envelope crossings
// get subdivided.
double sup_dist_on_segment(Point2 a, Point2 b, const SegmentSet& k, double tol) {
    auto upper_bound = [&](Point2 pa, Point2 pb) {
        double bd = std::numeric_limits<double>::infinity();
        for (const Segment& s : k.segments())
            bd = std::min(bd, std::max(dist_point_segment(pa, s),
                                       dist_point_segment(pb, s)));
        return bd;
    };
    double best = std::max(dist_point_set(a, k), dist_point_set(b, k));
    struct Node { Point2 a, b; int depth; };
    std::vector<Node> stack{{a, b, 0}};
    while (!stack.empty()) {
        const auto [pa, pb, depth] = stack.back();
        stack.pop_back();
        const Point2 m = 0.5 * (pa + pb);
        best = std::max(best, dist_point_set(m, k));
        if (depth < 60 && upper_bound(pa, pb) > best + tol) {
            stack.push_back({pa, m, depth + 1});
            stack.push_back({m, pb, depth + 1});
        }
    }
    return best;
}

double directed_hausdorff(const SegmentSet& from, const SegmentSet& to,
                          double domain_diam, double tol) {
    if (from.empty()) return 0.0; // sup over empty set
    if (to.empty()) return domain_diam;
    double best = 0.0;
    for (const Segment& s : from.segments())
        best = std::max(best, sup_dist_on_segment(s.p(), s.q(), to, tol));
    return best;
}

} // namespace

double residual_measure(const SegmentSet& s, const SegmentSet& cover) {
    return overlap_split(s, cover, /*residual=*/true);
}

double intersection_measure(const SegmentSet& s, const SegmentSet& cover) {
    return overlap_split(s, cover, /*residual=*/false);
}

double hausdorff_distance(const SegmentSet& k1, const SegmentSet& k2,
                          double domain_diam) {
    const double tol = 1e-12 * std::max(1.0, domain_diam);
    return std::max(directed_hausdorff(k1, k2, domain_diam, tol),
                    directed_hausdorff(k2, k1, domain_diam, tol));
}

} // namespace fracsim::geom
