#include "fracsim/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "fracsim/errors.hpp"

namespace fracsim::evo {

LoadingFamily::LoadingFamily() : kind_(Kind::Ramp) {}

LoadingFamily LoadingFamily::ramp(double ax, double by, double c) {
    LoadingFamily f;
    f.kind_ = Kind::Ramp;
    f.ax_ = ax;
    f.by_ = by;
    f.c_ = c;
    return f;
}

LoadingFamily LoadingFamily::time_series(
    std::vector<double> knots, std::vector<std::function<double(Point2)>> shapes) {
    if (knots.size() != shapes.size() || knots.size() < 2)
        throw ConfigError("time_series: need matching knots and shapes, >= 2");
    for (std::size_t k = 1; k < knots.size(); ++k)
        if (!(knots[k] > knots[k - 1]))
            throw ConfigError("time_series: knots must be strictly increasing");
    LoadingFamily f;
    f.kind_ = Kind::TimeSeries;
    f.knots_ = std::move(knots);
    f.shapes_ = std::move(shapes);
    return f;
}

double LoadingFamily::value(double t, Point2 p) const {
    if (kind_ == Kind::Ramp) return t * (ax_ * p.x + by_ * p.y + c_);
    if (t <= knots_.front()) return shapes_.front()(p);
    if (t >= knots_.back()) return shapes_.back()(p);
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double s = (t - knots_[k]) / (knots_[k + 1] - knots_[k]);
    return (1.0 - s) * shapes_[k](p) + s * shapes_[k + 1](p);
}

BoundaryData LoadingFamily::at(const RegularTriangulation& R, double t) const {
    return BoundaryData(R, [&](Point2 p) { return value(t, p); });
}

double LoadingFamily::gdot_h1_integral(const RegularTriangulation& R, double t0,
                                       double t1) const {
    if (t1 <= t0) return 0.0;
    if (kind_ == Kind::Ramp) {
        const BoundaryData shape(
            R, [&](Point2 p) { return ax_ * p.x + by_ * p.y + c_; });
        return (t1 - t0) * shape.h1_norm();
    }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
        const double lo = std::max(t0, knots_[k]);
        const double hi = std::min(t1, knots_[k + 1]);
        if (hi <= lo) continue;
        const BoundaryData diff(R, [&](Point2 p) {
            return shapes_[k + 1](p) - shapes_[k](p);
        });
        total += diff.h1_norm() * (hi - lo) / (knots_[k + 1] - knots_[k]);
    }
    return total;
}

int Schedule::n_delta() const {
    if (!(delta > 0.0)) throw ParamOutOfRange("schedule: delta must be > 0");
    int n = 1;
    while (delta * static_cast<double>(n) < 1.0 - 1e-12) ++n;
    return n;  // largest with delta*(n-1) < 1
}

std::vector<double> Schedule::times() const {
    const int n = n_delta();
    std::vector<double> t;
    t.reserve(n + 1);
    for (int i = 0; i < n; ++i) t.push_back(delta * i);
    t.push_back(1.0);
    return t;
}

double compute_o_delta(const RegularTriangulation& R, const Schedule& schedule) {
    const std::vector<double> t = schedule.times();
    double max_step = 0.0, total = 0.0;
    for (std::size_t r = 0; r + 1 < t.size(); ++r) {
        const double part = schedule.family.gdot_h1_integral(R, t[r], t[r + 1]);
        max_step = std::max(max_step, part);
        total += part;
    }
    return max_step * total;
}

History evolve(const RegularTriangulation& R, double a, const Schedule& schedule,
               const EvolveOptions& opts) {
    const double tol_geom = 1e-9 * std::max(1.0, R.domain.diameter());
    History h;
    h.gamma = CrackSet(tol_geom);
    h.o_delta = compute_o_delta(R, schedule);

    std::optional<minimize::SearchConfig> warm;
    const std::vector<double> times = schedule.times();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const BoundaryData g = schedule.family.at(R, t);
        minimize::MinimizeResult res = minimize::incremental_minimize(
            R, a, g, h.gamma.gamma(), opts.minimize, warm);
        if (!res.converged && opts.strict) {
            h.completed = false;
            break;
        }
        warm = res.config;
        h.gamma.add(res.new_jump_set, static_cast<int>(i));

        Step step;
        step.t = t;
        step.new_jumps = res.new_jump_set;
        step.gamma_measure = h.gamma.measure();
        step.energy.bulk = res.energy.bulk;
        step.energy.surface_new = res.energy.surface_new;
        step.energy.surface_total = step.gamma_measure;
        step.energy.total = res.energy.bulk + step.gamma_measure;
        step.u_sup = res.u.sup_norm();
        step.g_sup = g.sup_norm();
        step.result = std::move(res);
        h.steps.push_back(std::move(step));
    }
    return h;
}

BalanceReport check_energy_balance(const RegularTriangulation& R,
                                   const Schedule& schedule,
                                   const History& history, double tol) {
    BalanceReport rep;
    rep.o_delta = history.o_delta;
    const int n = static_cast<int>(history.steps.size());
    if (n == 0) return rep;

    // W_r = integral of grad u_r . grad(g_{r+1} - g_r); the boundary data are
    // affine per regular triangle, the displacement affine per sub-triangle.
    std::vector<double> prefix(n, 0.0);  // prefix[i] = sum_{r<i} W_r
    for (int r = 0; r + 1 < n; ++r) {
        const Step& s = history.steps[r];
        const double tr = s.t, tn = history.steps[r + 1].t;
        std::vector<double> dg(R.points.size());
        for (std::size_t v = 0; v < R.points.size(); ++v)
            dg[v] = schedule.family.value(tn, R.points[v]) -
                    schedule.family.value(tr, R.points[v]);
        const BoundaryData diff(R, dg);
        const auto& T = *s.result.tri;
        double W = 0.0;
        for (std::size_t k = 0; k < T.subtris.size(); ++k) {
            const auto gu = s.result.u.gradient(static_cast<int>(k));
            const auto gd = diff.gradient_on_triangle(T.subtris[k].parent);
            W += T.subtri_area(static_cast<int>(k)) *
                 (gu[0] * gd[0] + gu[1] * gd[1]);
        }
        prefix[r + 1] = prefix[r] + W;
    }

    rep.max_residual = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i) {
            const double Ei = history.steps[i].energy.total;
            const double Ej = history.steps[j].energy.total;
            const double residual =
                Ei - Ej - 2.0 * (prefix[i] - prefix[j]) - history.o_delta;
            rep.max_residual = std::max(rep.max_residual, residual);
            if (residual > tol) rep.offending.push_back({j, i});
            ++rep.n_pairs;
        }
    return rep;
}

namespace {

double value_at_time(const std::vector<Step>& steps, double t,
                     const std::function<double(const Step&)>& f) {
    // piecewise-constant-in-time interpolation: latest step with t_i <= t
    const Step* chosen = &steps.front();
    for (const Step& s : steps)
        if (s.t <= t + 1e-12) chosen = &s;
    return f(*chosen);
}

} // namespace

std::vector<StudyRow> convergence_study(const PolygonalDomain& domain,
                                        const LoadingFamily& family,
                                        const std::vector<StudyLevel>& levels,
                                        const mesh::MeshParams& base_params,
                                        const EvolveOptions& opts) {
    std::vector<StudyRow> rows;
    std::vector<SegmentSet> final_cracks;
    for (const StudyLevel& lv : levels) {
        mesh::MeshParams mp = base_params;
        mp.eps = lv.eps;
        const RegularTriangulation R = mesh::build_regular(domain, mp);
        Schedule sched;
        sched.delta = lv.delta;
        sched.family = family;
        const History h = evolve(R, lv.a, sched, opts);

        StudyRow row;
        row.level = lv;
        std::vector<double> samples{0.0, 0.25, 0.5, 0.75, 1.0};
        for (const Step& s : h.steps)  // detected initiation time
            if (s.gamma_measure > 1e-12) {
                samples.push_back(s.t);
                break;
            }
        std::sort(samples.begin(), samples.end());
        samples.erase(std::unique(samples.begin(), samples.end(),
                                  [](double x, double y) {
                                      return std::abs(x - y) < 1e-12;
                                  }),
                      samples.end());
        row.sample_times = samples;
        for (double t : samples) {
            row.energy.push_back(value_at_time(
                h.steps, t, [](const Step& s) { return s.energy.total; }));
            row.bulk.push_back(value_at_time(
                h.steps, t, [](const Step& s) { return s.energy.bulk; }));
            row.crack_len.push_back(value_at_time(
                h.steps, t, [](const Step& s) { return s.gamma_measure; }));
        }
        row.final_energy = h.steps.back().energy.total;
        final_cracks.push_back(h.gamma.gamma());
        rows.push_back(std::move(row));
    }
    if (!rows.empty()) {
        const double diam = domain.diameter();
        for (std::size_t i = 0; i < rows.size(); ++i)
            rows[i].hausdorff_to_finest = geom::hausdorff_distance(
                final_cracks[i], final_cracks.back(), diam);
    }
    return rows;
}

} // namespace fracsim::evo
