#include "fracsim/minimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "fracsim/errors.hpp"

namespace fracsim::minimize {

std::vector<double> default_t_grid(double a) {
    std::vector<double> grid;
    for (double t : {a, 0.25, 0.5, 0.75, 1.0 - a})
        if (t >= a - 1e-12 && t <= 1.0 - a + 1e-12) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-12; }),
               grid.end());
    return grid;
}

namespace {

int default_t_index(const std::vector<double>& grid) {
    int best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - 0.5) < std::abs(grid[best] - 0.5))
            best = static_cast<int>(i);
    return best;
}

struct Eval {
    double total = 0.0, bulk = 0.0, surface_new = 0.0;
    DiscreteDisplacement u;
    SegmentSet sg;
    std::shared_ptr<const AdaptiveTriangulation> tri;
    std::vector<int> jumped;    // interior sub-edge ids with a realized jump
    std::vector<int> violated;  // Dirichlet regular-edge ids with a violation
};

// Strict "is A better than B" order: energy first (within tol), then fewer
// broken edges, then lexicographically smaller id sets. Deterministic.
struct Better {
    double tol;
    bool operator()(const Eval& A, const SearchConfig& ca, const Eval& B,
                    const SearchConfig& cb) const {
        if (A.total < B.total - tol) return true;
        if (A.total > B.total + tol) return false;
        const auto count = [](const SearchConfig& c) {
            return std::count(c.broken.begin(), c.broken.end(), char(1)) +
                   std::count(c.released.begin(), c.released.end(), char(1));
        };
        const auto na = count(ca), nb = count(cb);
        if (na != nb) return na < nb;
        if (ca.broken != cb.broken)
            return std::lexicographical_compare(ca.broken.begin(), ca.broken.end(),
                                                cb.broken.begin(), cb.broken.end(),
                                                [](char x, char y) { return x > y; });
        if (ca.released != cb.released)
            return std::lexicographical_compare(
                ca.released.begin(), ca.released.end(), cb.released.begin(),
                cb.released.end(), [](char x, char y) { return x > y; });
        return ca.t_idx < cb.t_idx;
    }
};

class Evaluator {
public:
    Evaluator(const RegularTriangulation& R, double a, const BoundaryData& g,
              const SegmentSet& gamma, std::vector<double> t_grid,
              fem::DirichletGranularity gran)
        : R_(R), a_(a), g_(g), gamma_(gamma), t_grid_(std::move(t_grid)), gran_(gran) {
        tol_jump_ = fem::default_tol_jump(g);
    }

    const RegularTriangulation& base() const { return R_; }
    const std::vector<double>& t_grid() const { return t_grid_; }
    const SegmentSet& gamma() const { return gamma_; }
    const BoundaryData& g() const { return g_; }
    double tol_jump() const { return tol_jump_; }
    long n_solves() const { return n_solves_; }

    SearchConfig empty_config() const {
        SearchConfig c;
        const auto& T = tri_for(std::vector<int>(R_.edges.size(),
                                                 default_t_index(t_grid_)));
        c.broken.assign(T.subedges.size(), 0);
        c.released.assign(R_.edges.size(), 0);
        c.t_idx.assign(R_.edges.size(), default_t_index(t_grid_));
        return c;
    }

    const AdaptiveTriangulation& tri_for(const std::vector<int>& t_idx) const {
        if (!cache_ || cached_idx_ != t_idx) {
            std::vector<double> t(t_idx.size());
            for (std::size_t e = 0; e < t_idx.size(); ++e) t[e] = t_grid_[t_idx[e]];
            cache_ = std::make_shared<AdaptiveTriangulation>(
                subdivide(R_, mesh::AdaptiveParams{a_, std::move(t)}));
            cached_idx_ = t_idx;
        }
        return *cache_;
    }

    std::shared_ptr<const AdaptiveTriangulation> tri_ptr(
        const std::vector<int>& t_idx) const {
        tri_for(t_idx);
        return cache_;
    }

    Eval evaluate(const SearchConfig& c) const {
        const auto tri = tri_ptr(c.t_idx);
        fem::BrokenEdgeSet B;
        B.interior_broken = c.broken;
        B.released = c.released;
        ++n_solves_;
        DiscreteDisplacement u = fem::solve_displacement(*tri, B, g_);
        return evaluate_displacement(std::move(u), tri);
    }

    // Energies and realized jump sets of a given displacement (used both for
    // solver output and for truncated fields).
    Eval evaluate_displacement(DiscreteDisplacement u,
                               std::shared_ptr<const AdaptiveTriangulation> tri) const {
        Eval ev;
        ev.tri = std::move(tri);
        const AdaptiveTriangulation& T = *ev.tri;
        const double tol_geom = 1e-9 * std::max(1.0, R_.domain.diameter());
        ev.sg = SegmentSet(tol_geom);
        for (int e : T.interior_subedges) {
            if (!u.broken.interior_broken[e]) continue;
            const auto& se = T.subedges[e];
            const double ja = std::abs(u.value(se.tri[0], se.a) - u.value(se.tri[1], se.a));
            const double jb = std::abs(u.value(se.tri[0], se.b) - u.value(se.tri[1], se.b));
            if (std::max(ja, jb) > tol_jump_) {
                ev.jumped.push_back(e);
                ev.sg.add(T.subedge_segment(e));
            }
        }
        std::vector<char> edge_violated(R_.edges.size(), 0);
        for (std::size_t se_id = 0; se_id < T.subedges.size(); ++se_id) {
            const auto& se = T.subedges[se_id];
            if (se.kind != mesh::SubEdgeKind::DirichletHalf) continue;
            if (!u.broken.released[se.parent_edge]) continue;
            const double da =
                std::abs(u.value(se.tri[0], se.a) - g_.value_at(T, se.a));
            const double db =
                std::abs(u.value(se.tri[0], se.b) - g_.value_at(T, se.b));
            if (std::max(da, db) <= tol_jump_) continue;
            edge_violated[se.parent_edge] = 1;
            if (gran_ == fem::DirichletGranularity::SubEdge)
                ev.sg.add(T.subedge_segment(static_cast<int>(se_id)));
        }
        for (std::size_t e = 0; e < R_.edges.size(); ++e)
            if (edge_violated[e]) {
                ev.violated.push_back(static_cast<int>(e));
                if (gran_ == fem::DirichletGranularity::WholeEdge)
                    ev.sg.add(R_.edge_segment(static_cast<int>(e)));
            }
        ev.bulk = fem::bulk_energy(u);
        ev.surface_new = geom::residual_measure(ev.sg, gamma_);
        ev.total = ev.bulk + ev.surface_new;
        ev.u = std::move(u);
        return ev;
    }

    SearchConfig healed_config(const SearchConfig& c, const Eval& ev) const {
        SearchConfig h = c;
        std::fill(h.broken.begin(), h.broken.end(), 0);
        std::fill(h.released.begin(), h.released.end(), 0);
        for (int e : ev.jumped) h.broken[e] = 1;
        for (int e : ev.violated) h.released[e] = 1;
        return h;
    }

private:
    const RegularTriangulation& R_;
    double a_;
    const BoundaryData& g_;
    const SegmentSet& gamma_;
    std::vector<double> t_grid_;
    fem::DirichletGranularity gran_;
    double tol_jump_;
    mutable std::shared_ptr<AdaptiveTriangulation> cache_;
    mutable std::vector<int> cached_idx_;
    mutable long n_solves_ = 0;
};

// Maximal runs of interior sub-edges aligned within 15 degrees along a
// straight line; the move that lets straight cracks nucleate in one step.
std::vector<std::vector<int>> collinear_runs(const AdaptiveTriangulation& T) {
    constexpr double kSin15 = 0.25881904510252074;
    const double off_tol = 0.3 * T.base->eps;
    const int n = static_cast<int>(T.interior_subedges.size());

    std::map<std::vector<int>, int> seen;
    std::vector<std::vector<int>> runs;
    for (int si = 0; si < n; ++si) {
        const int seed = T.interior_subedges[si];
        const Segment s = T.subedge_segment(seed);
        const geom::Point2 d = s.dir();
        // candidates near the seed's supporting line
        std::vector<int> cand;
        for (int e : T.interior_subedges) {
            const Segment t = T.subedge_segment(e);
            if (std::abs(geom::cross(d, t.dir())) > kSin15) continue;
            if (std::abs(geom::cross(d, t.p() - s.p())) > off_tol) continue;
            if (std::abs(geom::cross(d, t.q() - s.p())) > off_tol) continue;
            cand.push_back(e);
        }
        // connected component of the seed through shared endpoints
        std::map<int, std::vector<int>> by_vertex;
        for (int e : cand) {
            by_vertex[T.subedges[e].a].push_back(e);
            by_vertex[T.subedges[e].b].push_back(e);
        }
        std::vector<int> comp;
        std::vector<int> stack{seed};
        std::map<int, char> visited{{seed, 1}};
        while (!stack.empty()) {
            const int e = stack.back();
            stack.pop_back();
            comp.push_back(e);
            for (int v : {T.subedges[e].a, T.subedges[e].b})
                for (int f : by_vertex[v])
                    if (!visited.count(f)) {
                        visited[f] = 1;
                        stack.push_back(f);
                    }
        }
        if (comp.size() < 2) continue;
        std::sort(comp.begin(), comp.end());
        if (seen.emplace(comp, 1).second) runs.push_back(std::move(comp));
    }
    std::sort(runs.begin(), runs.end(), [](const auto& x, const auto& y) {
        if (x.size() != y.size()) return x.size() > y.size();
        return x < y;
    });
    if (runs.size() > 64) runs.resize(64);
    return runs;
}

struct DescentOutcome {
    SearchConfig config;
    Eval eval;
    int iterations = 0;
    bool converged = false;
};

DescentOutcome local_descent(const Evaluator& ev, SearchConfig config,
                             const MinimizeOptions& opts, std::mt19937_64& rng) {
    const Better better{opts.energy_tol};
    Eval cur = ev.evaluate(config);
    const auto& R = ev.base();

    auto accept = [&](SearchConfig&& c, Eval&& e) {
        config = std::move(c);
        cur = std::move(e);
    };

    int iters = 0;
    bool converged = false;
    std::vector<int> tidx_of_runs;  // invalidate runs when geometry changes
    std::vector<std::vector<int>> runs;

    while (iters < opts.max_iters) {
        ++iters;
        bool improved = false;

        // Heal: drop broken flags that carry no actual jump. Never worse
        // (the constraint was already inactive) and strictly better by the
        // fewer-edges tie-break.
        {
            SearchConfig healed = ev.healed_config(config, cur);
            if (!(healed == config)) {
                Eval e = ev.evaluate(healed);
                if (better(e, healed, cur, config)) {
                    accept(std::move(healed), std::move(e));
                    improved = true;
                }
            }
        }

        // Collinear-run breaks.
        if (opts.move_set.collinear_run_break) {
            if (runs.empty() || tidx_of_runs != config.t_idx) {
                runs = collinear_runs(ev.tri_for(config.t_idx));
                tidx_of_runs = config.t_idx;
            }
            for (const auto& run : runs) {
                bool all = true;
                for (int e : run) all = all && config.broken[e];
                if (all) continue;
                SearchConfig c = config;
                for (int e : run) c.broken[e] = 1;
                Eval e = ev.evaluate(c);
                if (better(e, c, cur, config)) {
                    accept(std::move(c), std::move(e));
                    improved = true;
                }
            }
        }

        // Single edge flips (break/heal) and Dirichlet release toggles,
        // first-improvement in a seeded shuffled order.
        if (opts.move_set.edge_flip) {
            const auto& T = ev.tri_for(config.t_idx);
            std::vector<std::pair<char, int>> moves;  // (0=interior,1=release, id)
            for (int e : T.interior_subedges) moves.push_back({0, e});
            for (int e : R.dirichlet_edges) moves.push_back({1, e});
            std::shuffle(moves.begin(), moves.end(), rng);
            int cap = opts.flip_cap;
            if (cap <= 0)
                cap = static_cast<int>(moves.size()) <= 128
                          ? static_cast<int>(moves.size())
                          : 160;
            int tried = 0;
            for (const auto& [kind, e] : moves) {
                if (tried >= cap) break;
                ++tried;
                SearchConfig c = config;
                if (kind == 0) c.broken[e] ^= 1;
                else c.released[e] ^= 1;
                Eval ee = ev.evaluate(c);
                if (better(ee, c, cur, config)) {
                    accept(std::move(c), std::move(ee));
                    improved = true;
                }
            }
        }

        // Knot moves on regular edges incident to the current jump set.
        if (opts.move_set.vertex_move && ev.t_grid().size() > 1) {
            const auto& T = ev.tri_for(config.t_idx);
            // every knot shifts the discrete energy a little; on small meshes
            // sweep them all, on large ones only those carrying a jump
            std::vector<char> active(R.edges.size(), R.edges.size() <= 64 ? 1 : 0);
            for (int e : cur.jumped) {
                const auto& se = T.subedges[e];
                const int nbase = static_cast<int>(R.points.size());
                for (int v : {se.a, se.b})
                    if (v >= nbase) active[v - nbase] = 1;
                if (se.parent_edge >= 0) active[se.parent_edge] = 1;
            }
            for (std::size_t e = 0; e < R.edges.size(); ++e) {
                if (!active[e]) continue;
                for (int dir : {-1, +1}) {
                    const int ni = config.t_idx[e] + dir;
                    if (ni < 0 || ni >= static_cast<int>(ev.t_grid().size())) continue;
                    SearchConfig c = config;
                    c.t_idx[e] = ni;
                    Eval ee = ev.evaluate(c);
                    if (better(ee, c, cur, config)) {
                        accept(std::move(c), std::move(ee));
                        improved = true;
                        break;
                    }
                }
            }
        }

        // Pair flips cross plateaus that single flips cannot; only worth the
        // quadratic candidate set once the cheaper moves have stalled.
        if (!improved && opts.move_set.edge_flip) {
            const auto& T = ev.tri_for(config.t_idx);
            std::vector<std::pair<char, int>> singles;
            for (int e : T.interior_subedges) singles.push_back({0, e});
            for (int e : R.dirichlet_edges) singles.push_back({1, e});
            std::vector<std::pair<int, int>> pairs;
            for (std::size_t i = 0; i < singles.size(); ++i)
                for (std::size_t j = i + 1; j < singles.size(); ++j)
                    pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
            std::shuffle(pairs.begin(), pairs.end(), rng);
            const int cap = std::min<int>(static_cast<int>(pairs.size()),
                                          opts.flip_cap > 0 ? 4 * opts.flip_cap : 400);
            for (int n = 0; n < cap; ++n) {
                SearchConfig c = config;
                for (int idx : {pairs[n].first, pairs[n].second}) {
                    const auto& [kind, e] = singles[idx];
                    if (kind == 0) c.broken[e] ^= 1;
                    else c.released[e] ^= 1;
                }
                Eval ee = ev.evaluate(c);
                if (better(ee, c, cur, config)) {
                    accept(std::move(c), std::move(ee));
                    improved = true;
                    break;
                }
            }
        }

        if (!improved) {
            converged = true;
            break;
        }
    }
    return {std::move(config), std::move(cur), iters, converged};
}

SearchConfig prebroken_config(const Evaluator& ev, const SearchConfig& base_cfg) {
    // Interior sub-edges fully covered by the accumulated crack are broken
    // for free; covered Dirichlet edges are released for free.
    SearchConfig c = base_cfg;
    if (ev.gamma().empty()) return c;
    const auto& T = ev.tri_for(c.t_idx);
    const double tol = ev.gamma().tol();
    for (int e : T.interior_subedges) {
        SegmentSet one(tol);
        one.add(T.subedge_segment(e));
        if (geom::residual_measure(one, ev.gamma()) <= 10 * tol) c.broken[e] = 1;
    }
    for (int e : ev.base().dirichlet_edges) {
        SegmentSet one(tol);
        one.add(ev.base().edge_segment(e));
        if (geom::residual_measure(one, ev.gamma()) <= 10 * tol) c.released[e] = 1;
    }
    return c;
}

MinimizeResult finalize_result(const Evaluator& ev, const SearchConfig& config,
                               Eval best, int iterations, int restarts_used,
                               bool converged, bool certified) {
    // Truncation pass: project onto [-||g||_inf, ||g||_inf]. Keeps the
    // sup-norm bound and never enlarges the jump set.
    const double M = ev.g().sup_norm();
    DiscreteDisplacement trunc = fem::truncate(best.u, M);
    Eval final_ev = ev.evaluate_displacement(std::move(trunc), best.tri);

    MinimizeResult res;
    res.tri = final_ev.tri;
    res.config = ev.healed_config(config, final_ev);
    res.energy.bulk = final_ev.bulk;
    res.energy.surface_new = final_ev.surface_new;
    res.energy.total = final_ev.total;
    res.new_jump_set = final_ev.sg;
    res.u = std::move(final_ev.u);
    res.iterations = iterations;
    res.restarts_used = restarts_used;
    res.is_certified_global = certified;
    res.converged = converged;
    return res;
}

} // namespace

MinimizeResult incremental_minimize(const RegularTriangulation& R, double a,
                                    const BoundaryData& g,
                                    const SegmentSet& gamma_prev,
                                    const MinimizeOptions& opts,
                                    const std::optional<SearchConfig>& warm_start) {
    std::vector<double> grid = opts.t_grid.empty() ? default_t_grid(a) : opts.t_grid;
    for (double t : grid)
        if (t < a - 1e-12 || t > 1 - a + 1e-12)
            throw ParamOutOfRange("t_grid value outside [a, 1-a]");
    Evaluator ev(R, a, g, gamma_prev, grid, opts.granularity);
    const Better better{opts.energy_tol};

    const SearchConfig empty = ev.empty_config();
    SearchConfig best_cfg = empty;
    Eval best = ev.evaluate(empty);  // the unbroken elastic candidate
    int total_iters = 0;
    int restarts_used = 0;
    bool best_converged = true;

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int restarts = std::max(1, opts.restarts);
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(opts.rng_seed * 0x9E3779B97F4A7C15ULL + r + 1);
        SearchConfig init = empty;
        if (r == 1 && warm_start) {
            init = *warm_start;
        } else if (r == 1 || r == 2) {
            init = prebroken_config(ev, empty);
        } else if (r >= 3) {
            const double density = 0.1 + 0.15 * ((r - 3) % 4);
            for (auto& b : init.broken)
                if (unif(rng) < density) b = 1;
            for (int e : R.dirichlet_edges)
                if (unif(rng) < density) init.released[e] = 1;
            if (r % 2 == 0 && grid.size() > 1) {
                std::uniform_int_distribution<int> pick(0, static_cast<int>(grid.size()) - 1);
                for (auto& ti : init.t_idx) ti = pick(rng);
            }
        }
        DescentOutcome out = local_descent(ev, std::move(init), opts, rng);
        total_iters += out.iterations;
        ++restarts_used;
        if (better(out.eval, out.config, best, best_cfg)) {
            best = std::move(out.eval);
            best_cfg = std::move(out.config);
            best_converged = out.converged;
        }
        if (best.total <= opts.energy_tol) break;  // can't beat zero
    }
    return finalize_result(ev, best_cfg, std::move(best), total_iters, restarts_used,
                           best_converged, false);
}

namespace {

// Dense workspace solver for tiny instances: the enumeration cost is
// dominated by this path, so it avoids any allocation per configuration.
struct FastInstance {
    const AdaptiveTriangulation* T;
    const BoundaryData* g;
    double tol_jump;
    int ndof;

    std::vector<std::array<std::array<double, 3>, 3>> S;  // per sub-triangle
    struct EdgeBits {
        int id;  // sub-edge id
        int dofA0, dofA1, dofB0, dofB1;  // side A / side B at endpoints 0,1
        double residual_len;
    };
    std::vector<EdgeBits> interior;
    struct DirichletBits {
        int edge;  // regular edge id
        std::vector<std::pair<int, double>> fixed;  // (dof, g value)
        double residual_len;
    };
    std::vector<DirichletBits> dirichlet;

    // scratch
    std::vector<int> parent, redidx, comp;
    std::vector<char> fixed_flag, has_fixed, pinned;
    std::vector<double> fixed_val, u;
    std::vector<double> A, rhs, x;

    FastInstance(const AdaptiveTriangulation& tri, const BoundaryData& bd,
                 const SegmentSet& gamma, double tj)
        : T(&tri), g(&bd), tol_jump(tj), ndof(3 * static_cast<int>(tri.subtris.size())) {
        S.resize(tri.subtris.size());
        for (std::size_t k = 0; k < tri.subtris.size(); ++k) {
            const auto p = tri.subtri_points(static_cast<int>(k));
            const double area = 0.5 * geom::cross(p[1] - p[0], p[2] - p[0]);
            const double inv2A = 1.0 / (2.0 * area);
            std::array<std::array<double, 2>, 3> gl;
            for (int i = 0; i < 3; ++i) {
                const geom::Point2 a = p[(i + 1) % 3], b = p[(i + 2) % 3];
                gl[i] = {inv2A * (a.y - b.y), inv2A * (b.x - a.x)};
            }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    S[k][i][j] = area * (gl[i][0] * gl[j][0] + gl[i][1] * gl[j][1]);
        }
        const double gtol = gamma.tol();
        for (int e : tri.interior_subedges) {
            const auto& se = tri.subedges[e];
            EdgeBits eb;
            eb.id = e;
            eb.dofA0 = 3 * se.tri[0] + tri.local_corner(se.tri[0], se.a);
            eb.dofA1 = 3 * se.tri[0] + tri.local_corner(se.tri[0], se.b);
            eb.dofB0 = 3 * se.tri[1] + tri.local_corner(se.tri[1], se.a);
            eb.dofB1 = 3 * se.tri[1] + tri.local_corner(se.tri[1], se.b);
            SegmentSet one(gtol);
            one.add(tri.subedge_segment(e));
            eb.residual_len = geom::residual_measure(one, gamma);
            interior.push_back(eb);
        }
        for (int e : tri.base->dirichlet_edges) {
            DirichletBits db;
            db.edge = e;
            for (std::size_t se_id = 0; se_id < tri.subedges.size(); ++se_id) {
                const auto& se = tri.subedges[se_id];
                if (se.kind != mesh::SubEdgeKind::DirichletHalf || se.parent_edge != e)
                    continue;
                const int k = se.tri[0];
                for (int v : {se.a, se.b})
                    db.fixed.push_back({3 * k + tri.local_corner(k, v),
                                        bd.value_at(tri, v)});
            }
            SegmentSet one(gtol);
            one.add(tri.base->edge_segment(e));
            db.residual_len = geom::residual_measure(one, gamma);
            dirichlet.push_back(db);
        }
        parent.resize(ndof);
        redidx.resize(ndof);
        comp.resize(ndof);
        fixed_flag.resize(ndof);
        has_fixed.resize(ndof);
        pinned.resize(ndof);
        fixed_val.resize(ndof);
        u.resize(ndof);
        A.resize(static_cast<std::size_t>(ndof) * ndof);
        rhs.resize(ndof);
        x.resize(ndof);
    }

    int find(int i) {
        while (parent[i] != i) { parent[i] = parent[parent[i]]; i = parent[i]; }
        return i;
    }

    // Solves the configuration encoded by `mask` (low bits: interior edges
    // broken, high bits: Dirichlet edges released). Returns total energy.
    double solve_mask(std::uint64_t mask, double* bulk_out = nullptr) {
        const int ni = static_cast<int>(interior.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::fill(fixed_flag.begin(), fixed_flag.end(), char(0));

        for (int i = 0; i < ni; ++i) {
            if (mask & (1ULL << i)) continue;
            const auto& eb = interior[i];
            parent[find(eb.dofA0)] = find(eb.dofB0);
            parent[find(eb.dofA1)] = find(eb.dofB1);
        }
        for (std::size_t d = 0; d < dirichlet.size(); ++d) {
            if (mask & (1ULL << (ni + d))) continue;
            for (const auto& [dof, val] : dirichlet[d].fixed) {
                const int r = find(dof);
                fixed_flag[r] = 1;
                fixed_val[r] = val;
            }
        }
        // pin one dof to zero in each component without Dirichlet data
        const int nsub = ndof / 3;
        std::iota(comp.begin(), comp.end(), 0);
        auto cfind = [&](int i) {
            while (comp[i] != i) { comp[i] = comp[comp[i]]; i = comp[i]; }
            return i;
        };
        for (int k = 0; k < nsub; ++k) {
            const int r0 = find(3 * k), r1 = find(3 * k + 1), r2 = find(3 * k + 2);
            comp[cfind(r0)] = cfind(r1);
            comp[cfind(r1)] = cfind(r2);
        }
        std::fill(has_fixed.begin(), has_fixed.end(), char(0));
        std::fill(pinned.begin(), pinned.end(), char(0));
        for (int d = 0; d < ndof; ++d)
            if (find(d) == d && fixed_flag[d]) has_fixed[cfind(d)] = 1;
        for (int d = 0; d < ndof; ++d) {
            if (find(d) != d || fixed_flag[d]) continue;
            const int c = cfind(d);
            if (has_fixed[c] || pinned[c]) continue;
            pinned[c] = 1;
            fixed_flag[d] = 1;
            fixed_val[d] = 0.0;
        }

        int nfree = 0;
        for (int d = 0; d < ndof; ++d)
            if (find(d) == d && !fixed_flag[d]) redidx[d] = nfree++;

        std::fill(A.begin(), A.begin() + static_cast<std::size_t>(nfree) * nfree, 0.0);
        std::fill(rhs.begin(), rhs.begin() + nfree, 0.0);
        for (int k = 0; k < nsub; ++k) {
            int r[3], fi[3];
            double fv[3];
            for (int i = 0; i < 3; ++i) {
                r[i] = find(3 * k + i);
                fi[i] = fixed_flag[r[i]] ? -1 : redidx[r[i]];
                fv[i] = fixed_flag[r[i]] ? fixed_val[r[i]] : 0.0;
            }
            for (int i = 0; i < 3; ++i) {
                if (fi[i] < 0) continue;
                for (int j = 0; j < 3; ++j) {
                    if (fi[j] >= 0)
                        A[static_cast<std::size_t>(fi[i]) * nfree + fi[j]] += S[k][i][j];
                    else
                        rhs[fi[i]] -= S[k][i][j] * fv[j];
                }
            }
        }

        // in-place LDL^T (no pivoting; the pinned system is SPD)
        for (int j = 0; j < nfree; ++j) {
            double* col_j = &A[static_cast<std::size_t>(j) * nfree];
            for (int kcol = 0; kcol < j; ++kcol) {
                const double f = A[static_cast<std::size_t>(kcol) * nfree + j];
                if (f == 0.0) continue;
                const double* col_k = &A[static_cast<std::size_t>(kcol) * nfree];
                for (int i = j; i < nfree; ++i) col_j[i] -= f * col_k[i] * col_k[kcol];
            }
            const double d = col_j[j];
            for (int i = j + 1; i < nfree; ++i) col_j[i] /= d;
        }
        // solve L D L^T x = rhs
        for (int i = 0; i < nfree; ++i) {
            double s = rhs[i];
            for (int j = 0; j < i; ++j)
                s -= A[static_cast<std::size_t>(j) * nfree + i] * x[j];
            x[i] = s;
        }
        for (int i = 0; i < nfree; ++i) x[i] /= A[static_cast<std::size_t>(i) * nfree + i];
        for (int i = nfree - 1; i >= 0; --i) {
            double s = x[i];
            const double* col_i = &A[static_cast<std::size_t>(i) * nfree];
            for (int j = i + 1; j < nfree; ++j) s -= col_i[j] * x[j];
            x[i] = s;
        }

        for (int d = 0; d < ndof; ++d) {
            const int r = find(d);
            u[d] = fixed_flag[r] ? fixed_val[r] : x[redidx[r]];
        }

        double bulk = 0.0;
        for (int k = 0; k < nsub; ++k) {
            const double* uk = &u[3 * k];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) bulk += uk[i] * S[k][i][j] * uk[j];
        }
        double surface = 0.0;
        for (int i = 0; i < ni; ++i) {
            if (!(mask & (1ULL << i))) continue;
            const auto& eb = interior[i];
            if (std::abs(u[eb.dofA0] - u[eb.dofB0]) > tol_jump ||
                std::abs(u[eb.dofA1] - u[eb.dofB1]) > tol_jump)
                surface += eb.residual_len;
        }
        for (std::size_t d = 0; d < dirichlet.size(); ++d) {
            if (!(mask & (1ULL << (ni + d)))) continue;
            for (const auto& [dof, val] : dirichlet[d].fixed)
                if (std::abs(u[dof] - val) > tol_jump) {
                    surface += dirichlet[d].residual_len;
                    break;
                }
        }
        if (bulk_out) *bulk_out = bulk;
        return bulk + surface;
    }
};

} // namespace

MinimizeResult brute_force_oracle(const RegularTriangulation& R, double a,
                                  const std::vector<double>& t_grid,
                                  const BoundaryData& g,
                                  const SegmentSet& gamma_prev, int max_dofs,
                                  std::uint64_t max_configs) {
    if (t_grid.empty()) throw ParamOutOfRange("oracle: empty t_grid");
    Evaluator ev(R, a, g, gamma_prev, t_grid,
                 fem::DirichletGranularity::WholeEdge);

    const int ndof = 3 * 4 * static_cast<int>(R.triangles.size());
    if (ndof > max_dofs)
        throw InstanceTooLarge("oracle: too many degrees of freedom");

    // probe bit count on any triangulation (combinatorics are t-independent)
    const SearchConfig probe = ev.empty_config();
    const AdaptiveTriangulation& T0 = ev.tri_for(probe.t_idx);
    const int nbits = static_cast<int>(T0.interior_subedges.size()) +
                      static_cast<int>(R.dirichlet_edges.size());
    if (nbits > 22) throw InstanceTooLarge("oracle: too many edge choices");

    const std::uint64_t n_subsets = 1ULL << nbits;
    double n_tassign = 1.0;
    for (std::size_t e = 0; e < R.edges.size(); ++e) n_tassign *= t_grid.size();
    if (n_tassign * static_cast<double>(n_subsets) > static_cast<double>(max_configs))
        throw InstanceTooLarge("oracle: enumeration above the configured cap");

    const double tol_jump = fem::default_tol_jump(g);
    const double tol = 1e-9;

    double best_total = std::numeric_limits<double>::infinity();
    int best_pop = std::numeric_limits<int>::max();
    std::uint64_t best_mask = 0;
    std::vector<int> best_tidx;

    std::vector<int> tidx(R.edges.size(), 0);
    const int G = static_cast<int>(t_grid.size());
    while (true) {
        const auto tri = ev.tri_ptr(tidx);
        FastInstance inst(*tri, g, gamma_prev, tol_jump);
        for (std::uint64_t mask = 0; mask < n_subsets; ++mask) {
            const double total = inst.solve_mask(mask);
            const int pop = static_cast<int>(__builtin_popcountll(mask));
            bool take = false;
            if (total < best_total - tol) take = true;
            else if (total <= best_total + tol) {
                if (pop < best_pop) take = true;
                else if (pop == best_pop && mask < best_mask) take = true;
                else if (pop == best_pop && mask == best_mask && best_tidx.empty())
                    take = true;
            }
            if (take) {
                best_total = std::min(best_total, total);
                best_pop = pop;
                best_mask = mask;
                best_tidx = tidx;
            }
        }
        // next t assignment (mixed radix)
        std::size_t e = 0;
        for (; e < tidx.size(); ++e) {
            if (++tidx[e] < G) break;
            tidx[e] = 0;
        }
        if (e == tidx.size()) break;
    }

    // Re-solve the winner through the reference path.
    SearchConfig best_cfg = probe;
    best_cfg.t_idx = best_tidx;
    const AdaptiveTriangulation& Tb = ev.tri_for(best_tidx);
    const int ni = static_cast<int>(Tb.interior_subedges.size());
    for (int i = 0; i < ni; ++i)
        if (best_mask & (1ULL << i)) best_cfg.broken[Tb.interior_subedges[i]] = 1;
    for (std::size_t d = 0; d < R.dirichlet_edges.size(); ++d)
        if (best_mask & (1ULL << (ni + d)))
            best_cfg.released[R.dirichlet_edges[d]] = 1;

    Eval final_ev = ev.evaluate(best_cfg);
    MinimizeResult res = finalize_result(ev, best_cfg, std::move(final_ev), 0, 0,
                                         true, true);
    res.is_certified_global = true;
    return res;
}

MinimalityReport verify_unilateral_minimality(
    const RegularTriangulation& R, double a, const MinimizeResult& result,
    const BoundaryData& g, const SegmentSet& gamma_prev, int trials,
    std::uint64_t rng_seed, double energy_tol, const std::vector<double>& t_grid) {
    std::vector<double> grid = t_grid.empty() ? default_t_grid(a) : t_grid;
    Evaluator ev(R, a, g, gamma_prev, grid, fem::DirichletGranularity::WholeEdge);
    const double lhs = fem::bulk_energy(result.u);

    MinimalityReport rep;
    rep.worst_gap = -std::numeric_limits<double>::infinity();
    auto check = [&](double rhs) {
        const double gap = lhs - rhs;
        rep.worst_gap = std::max(rep.worst_gap, gap);
        if (gap > energy_tol) ++rep.violations;
        ++rep.trials;
    };

    // deterministic competitors: u itself and the boundary datum g
    check(result.energy.total);
    check(g.bulk());

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double densities[4] = {0.05, 0.1, 0.2, 0.4};
    for (int tr = 0; tr < trials; ++tr) {
        SearchConfig c = ev.empty_config();
        const double dens = densities[tr % 4];
        for (auto& b : c.broken)
            if (unif(rng) < dens) b = 1;
        for (int e : R.dirichlet_edges)
            if (unif(rng) < dens) c.released[e] = 1;
        if (grid.size() > 1 && tr % 3 == 0) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(grid.size()) - 1);
            for (auto& ti : c.t_idx) ti = pick(rng);
        }
        const Eval e = ev.evaluate(c);
        check(e.total);
    }
    return rep;
}

} // namespace fracsim::minimize
