#pragma once

// Exact planar primitives for crack bookkeeping: segments, 1D measure of
// segment unions, set-difference measure and Hausdorff distance.
//
// Only finite unions of straight segments are handled. Positive H^1 mass of
// an intersection can only come from collinear overlap, so all measures are
// computed by merging 1D intervals on supporting lines; transversal
// intersections (isolated points) carry measure zero.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fracsim::geom {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }

class Segment {
public:
    Segment(Point2 p, Point2 q) : p_(p), q_(q) {
        if (!(std::isfinite(p.x) && std::isfinite(p.y) &&
              std::isfinite(q.x) && std::isfinite(q.y)))
            throw std::invalid_argument("Segment: non-finite endpoint");
        if (dist(p, q) == 0.0)
            throw std::invalid_argument("Segment: degenerate (zero length)");
    }

    Point2 p() const { return p_; }
    Point2 q() const { return q_; }
    double length() const { return dist(p_, q_); }
    Point2 dir() const { return (1.0 / length()) * (q_ - p_); }
    Point2 at(double s) const { return p_ + s * (q_ - p_); } // s in [0,1]

private:
    Point2 p_, q_;
};

double dist_point_segment(Point2 x, const Segment& s);

// Distance of a point from the supporting line of a segment.
double dist_point_line(Point2 x, const Segment& s);

// Mutual collinearity within a coincidence tolerance.
bool collinear(const Segment& a, const Segment& b, double tol);

class SegmentSet {
public:
    static constexpr double kDefaultTol = 1e-9;

    explicit SegmentSet(double tol = kDefaultTol) : tol_(tol) {}
    SegmentSet(std::vector<Segment> segs, double tol = kDefaultTol)
        : segs_(std::move(segs)), tol_(tol) {}

    void add(const Segment& s) { segs_.push_back(s); }
    void add(const SegmentSet& other) {
        segs_.insert(segs_.end(), other.segs_.begin(), other.segs_.end());
    }

    bool empty() const { return segs_.empty(); }
    std::size_t size() const { return segs_.size(); }
    const std::vector<Segment>& segments() const { return segs_; }
    double tol() const { return tol_; }

    // Canonical form: collinear overlapping pieces merged into maximal
    // segments. Same planar set, fewer segments.
    SegmentSet normalized() const;

private:
    std::vector<Segment> segs_;
    double tol_;
};

// H^1 of the union; collinear overlaps counted once.
double measure(const SegmentSet& s);

// H^1(S \ C): for every collinear class of S, the part not covered by
// segments of C lying on the same supporting line.
double residual_measure(const SegmentSet& s, const SegmentSet& cover);

// H^1(S ∩ C) by the same collinear-overlap routine, so that
// residual_measure + intersection_measure = measure within tolerance.
double intersection_measure(const SegmentSet& s, const SegmentSet& cover);

// Hausdorff distance between two compact unions of segments, with the
// conventions dist(x, ∅) = domain_diam and d_H(∅, ∅) = 0.
double hausdorff_distance(const SegmentSet& k1, const SegmentSet& k2,
                          double domain_diam);

} // namespace fracsim::geom
