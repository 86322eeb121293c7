#pragma once

// Quasi-static evolution: uniform time discretization of the loading,
// sequential incremental minimization with irreversible crack accumulation,
// and the discrete energy-balance and refinement-study checks.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "fracsim/minimizer.hpp"

namespace fracsim::evo {

using fem::BoundaryData;
using geom::Point2;
using geom::SegmentSet;
using mesh::PolygonalDomain;
using mesh::RegularTriangulation;

// Boundary-data families g(t, x). Ramps are linear in t with an affine
// spatial shape; time series are piecewise linear in t between knot shapes.
class LoadingFamily {
public:
    LoadingFamily();  // g == 0

    static LoadingFamily ramp(double ax, double by, double c);
    static LoadingFamily time_series(
        std::vector<double> knots,
        std::vector<std::function<double(Point2)>> shapes);

    double value(double t, Point2 p) const;
    BoundaryData at(const RegularTriangulation& R, double t) const;

    // Integral of ||g_dot(tau)||_{H^1} over [t0, t1], with g realized by
    // nodal interpolation on R. Exact for both families (rates are piecewise
    // constant in time).
    double gdot_h1_integral(const RegularTriangulation& R, double t0,
                            double t1) const;

private:
    enum class Kind { Ramp, TimeSeries };
    Kind kind_;
    double ax_ = 0, by_ = 0, c_ = 0;
    std::vector<double> knots_;
    std::vector<std::function<double(Point2)>> shapes_;
};

struct Schedule {
    double delta = 0.05;
    LoadingFamily family;

    // Largest integer with delta*(N-1) < 1; the grid is t_i = i*delta for
    // i < N plus the forced final node t_N = 1.
    int n_delta() const;
    std::vector<double> times() const;
};

// Accumulated crack with per-step provenance; union is the only mutation.
class CrackSet {
public:
    explicit CrackSet(double tol = geom::SegmentSet::kDefaultTol) : gamma_(tol) {}

    const SegmentSet& gamma() const { return gamma_; }
    double measure() const { return geom::measure(gamma_); }
    void add(const SegmentSet& s, int step) {
        gamma_.add(s);
        gamma_ = gamma_.normalized();
        if (!s.empty()) provenance_.push_back({step, s});
    }
    const std::vector<std::pair<int, SegmentSet>>& provenance() const {
        return provenance_;
    }

private:
    SegmentSet gamma_;
    std::vector<std::pair<int, SegmentSet>> provenance_;
};

struct Step {
    double t = 0.0;
    minimize::MinimizeResult result;
    SegmentSet new_jumps;        // S^g(u_i)
    double gamma_measure = 0.0;  // H^1(Gamma_i)
    fem::EnergyBreakdown energy; // surface_total = H^1(Gamma_i), total = E_i
    double u_sup = 0.0, g_sup = 0.0;
};

struct History {
    std::vector<Step> steps;
    CrackSet gamma;
    double o_delta = 0.0;
    bool completed = true;  // false when strict mode aborted early
};

struct EvolveOptions {
    minimize::MinimizeOptions minimize;
    bool strict = false;  // stop at the first non-converged step
};

History evolve(const RegularTriangulation& R, double a,
               const Schedule& schedule, const EvolveOptions& opts);

double compute_o_delta(const RegularTriangulation& R, const Schedule& schedule);

struct BalanceReport {
    double max_residual = 0.0;  // max over pairs of E_i - E_j - 2*sum W - o_delta
    int n_pairs = 0;
    std::vector<std::pair<int, int>> offending;  // residual > tol
    double o_delta = 0.0;
};

BalanceReport check_energy_balance(const RegularTriangulation& R,
                                   const Schedule& schedule,
                                   const History& history, double tol = 1e-9);

struct StudyLevel {
    double eps = 0.0, a = 0.0, delta = 0.0;
};

struct StudyRow {
    StudyLevel level;
    std::vector<double> sample_times;  // {0, .25, .5, .75, 1} + initiation
    std::vector<double> energy, bulk, crack_len;
    double final_energy = 0.0;
    double hausdorff_to_finest = 0.0;  // final cracks, finest row = 0
};

std::vector<StudyRow> convergence_study(const PolygonalDomain& domain,
                                        const LoadingFamily& family,
                                        const std::vector<StudyLevel>& levels,
                                        const mesh::MeshParams& base_params,
                                        const EvolveOptions& opts);

} // namespace fracsim::evo
