#include "fracsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fracsim/errors.hpp"

namespace fracsim::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing required field");
    return *it;
}

double need_num(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

double opt_num(const json& j, const char* key, double def) {
    if (!j.is_object() || !j.contains(key)) return def;
    return j.at(key).get<double>();
}

std::string dump_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

evo::LoadingFamily parse_family(const json& j, const std::string& path) {
    const std::string kind = need(j, "kind", path).get<std::string>();
    if (kind == "ramp") {
        return evo::LoadingFamily::ramp(opt_num(j, "ax", 0.0),
                                        opt_num(j, "by", 0.0),
                                        opt_num(j, "c", 0.0));
    }
    if (kind == "time_series") {
        const json& jk = need(j, "knots", path);
        const json& js = need(j, "shapes", path);
        if (!jk.is_array() || !js.is_array() || jk.size() != js.size())
            fail(path, "knots and shapes must be arrays of equal length");
        std::vector<double> knots;
        std::vector<std::function<double(geom::Point2)>> shapes;
        for (std::size_t i = 0; i < jk.size(); ++i) {
            knots.push_back(jk[i].get<double>());
            const auto& sh = js[i];
            if (!sh.is_array() || sh.size() != 3)
                fail(path + ".shapes", "each shape is [ax, by, c]");
            const double ax = sh[0].get<double>(), by = sh[1].get<double>(),
                         c = sh[2].get<double>();
            shapes.push_back([ax, by, c](geom::Point2 p) {
                return ax * p.x + by * p.y + c;
            });
        }
        return evo::LoadingFamily::time_series(std::move(knots), std::move(shapes));
    }
    fail(path + ".kind", "unknown family kind '" + kind +
                             "' (want ramp or time_series)");
}

mesh::PolygonalDomain parse_domain(const json& j, const std::string& path) {
    mesh::PolygonalDomain dom;
    const json& jv = need(j, "vertices", path);
    if (!jv.is_array() || jv.size() < 3)
        fail(path + ".vertices", "need at least 3 [x, y] pairs");
    for (const auto& v : jv) {
        if (!v.is_array() || v.size() != 2)
            fail(path + ".vertices", "each vertex is [x, y]");
        dom.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    if (j.contains("dirichlet_edges"))
        for (const auto& e : j.at("dirichlet_edges"))
            dom.dirichlet_marks.push_back(e.get<int>());
    try {
        dom.validate();
    } catch (const std::exception& ex) {
        fail(path, ex.what());
    }
    return dom;
}

} // namespace

Config parse_config(const json& j) {
    Config cfg;
    cfg.domain = parse_domain(need(j, "domain", "config"), "config.domain");

    const json& jm = need(j, "mesh", "config");
    cfg.mesh_params.eps = need_num(jm, "eps", "config.mesh");
    cfg.mesh_params.c1 = opt_num(jm, "c1", cfg.mesh_params.c1);
    cfg.mesh_params.c2 = opt_num(jm, "c2", cfg.mesh_params.c2);
    if (!(cfg.mesh_params.eps > 0)) fail("config.mesh.eps", "must be > 0");
    if (!(cfg.mesh_params.c1 > 0) || !(cfg.mesh_params.c2 >= cfg.mesh_params.c1))
        fail("config.mesh", "need 0 < c1 <= c2");

    const json& ja = need(j, "adaptive", "config");
    cfg.a = need_num(ja, "a", "config.adaptive");
    if (!(cfg.a > 0.0 && cfg.a < 0.5))
        fail("config.adaptive.a", "a must lie in (0, 0.5)");
    if (ja.contains("t_grid"))
        for (const auto& t : ja.at("t_grid")) {
            const double tv = t.get<double>();
            if (tv < cfg.a || tv > 1.0 - cfg.a)
                fail("config.adaptive.t_grid", "values must lie in [a, 1-a]");
            cfg.t_grid.push_back(tv);
        }

    const json& js = need(j, "schedule", "config");
    cfg.schedule.delta = need_num(js, "delta", "config.schedule");
    if (!(cfg.schedule.delta > 0)) fail("config.schedule.delta", "must be > 0");
    cfg.family_json = need(js, "family", "config.schedule");
    cfg.schedule.family = parse_family(cfg.family_json, "config.schedule.family");

    if (j.contains("minimizer")) {
        const json& jo = j.at("minimizer");
        cfg.minimize.restarts = static_cast<int>(opt_num(jo, "restarts", 8));
        cfg.minimize.max_iters = static_cast<int>(opt_num(jo, "max_iters", 40));
        cfg.minimize.flip_cap = static_cast<int>(opt_num(jo, "flip_cap", 0));
        cfg.minimize.energy_tol = opt_num(jo, "energy_tol", 1e-9);
        if (jo.contains("granularity")) {
            const std::string gr = jo.at("granularity").get<std::string>();
            if (gr == "whole_edge")
                cfg.minimize.granularity = fem::DirichletGranularity::WholeEdge;
            else if (gr == "sub_edge")
                cfg.minimize.granularity = fem::DirichletGranularity::SubEdge;
            else
                fail("config.minimizer.granularity",
                     "expected whole_edge or sub_edge");
        }
    }
    cfg.minimize.t_grid = cfg.t_grid;

    if (j.contains("output")) {
        const json& jo = j.at("output");
        if (jo.contains("dir")) cfg.out_dir = jo.at("dir").get<std::string>();
        if (jo.contains("svg")) cfg.svg = jo.at("svg").get<bool>();
        if (jo.contains("csv")) cfg.csv = jo.at("csv").get<bool>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("strict")) cfg.strict = j.at("strict").get<bool>();
    cfg.minimize.rng_seed = cfg.seed;
    return cfg;
}

Config load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("config parse error: ") + ex.what());
    }
    return parse_config(j);
}

json mesh_to_json(const mesh::RegularTriangulation& R) {
    json j;
    j["eps"] = R.eps;
    j["c1"] = R.c1;
    j["c2"] = R.c2;
    json dom;
    dom["vertices"] = json::array();
    for (const auto& v : R.domain.vertices)
        dom["vertices"].push_back({v.x, v.y});
    dom["dirichlet_edges"] = R.domain.dirichlet_marks;
    j["domain"] = std::move(dom);
    j["points"] = json::array();
    for (const auto& p : R.points) j["points"].push_back({p.x, p.y});
    j["triangles"] = json::array();
    for (const auto& t : R.triangles) j["triangles"].push_back({t[0], t[1], t[2]});
    j["edges"] = json::array();
    for (const auto& e : R.edges) {
        json je;
        je["a"] = e.a;
        je["b"] = e.b;
        je["n_tri"] = e.n_tri;
        je["dirichlet"] = e.dirichlet;
        j["edges"].push_back(std::move(je));
    }
    return j;
}

mesh::RegularTriangulation mesh_from_json(const json& j) {
    mesh::PolygonalDomain dom = parse_domain(j.at("domain"), "mesh.domain");
    mesh::MeshParams mp{j.at("eps").get<double>(), j.at("c1").get<double>(),
                        j.at("c2").get<double>()};
    mesh::RegularTriangulation R = mesh::build_regular(dom, mp);
    // sanity: the deterministic builder must reproduce the stored mesh
    if (R.points.size() != j.at("points").size() ||
        R.triangles.size() != j.at("triangles").size())
        throw ConfigError("mesh.json does not match the deterministic build");
    return R;
}

json displacement_to_json(const fem::DiscreteDisplacement& u) {
    json j;
    j["corner_values"] = u.corner_values;
    return j;
}

json result_to_json(const minimize::MinimizeResult& r, std::uint64_t seed) {
    json j;
    json je;
    je["bulk"] = r.energy.bulk;
    je["surface_new"] = r.energy.surface_new;
    je["total"] = r.energy.total;
    j["energy"] = std::move(je);
    json broken = json::array(), released = json::array();
    for (std::size_t e = 0; e < r.config.broken.size(); ++e)
        if (r.config.broken[e]) broken.push_back(static_cast<int>(e));
    for (std::size_t e = 0; e < r.config.released.size(); ++e)
        if (r.config.released[e]) released.push_back(static_cast<int>(e));
    j["broken_edges"] = std::move(broken);
    j["released_edges"] = std::move(released);
    j["t_map"] = r.tri->params.t_per_edge;
    j["certified_global"] = r.is_certified_global;
    j["converged"] = r.converged;
    j["seed"] = seed;
    return j;
}

json history_to_json(const evo::History& h, const Config& cfg) {
    json j;
    json meta;
    meta["eps"] = cfg.mesh_params.eps;
    meta["a"] = cfg.a;
    meta["delta"] = cfg.schedule.delta;
    meta["seed"] = cfg.seed;
    json dom;
    dom["vertices"] = json::array();
    for (const auto& v : cfg.domain.vertices) dom["vertices"].push_back({v.x, v.y});
    dom["dirichlet_edges"] = cfg.domain.dirichlet_marks;
    meta["domain"] = std::move(dom);
    meta["c1"] = cfg.mesh_params.c1;
    meta["c2"] = cfg.mesh_params.c2;
    meta["family"] = cfg.family_json;
    meta["t_grid"] = cfg.t_grid;
    meta["completed"] = h.completed;
    j["meta"] = std::move(meta);

    j["steps"] = json::array();
    geom::SegmentSet gamma(geom::SegmentSet::kDefaultTol);
    for (const auto& s : h.steps) {
        gamma.add(s.new_jumps);
        gamma = gamma.normalized();
        json st;
        st["t"] = s.t;
        json en;
        en["bulk"] = s.energy.bulk;
        en["surface"] = s.energy.surface_total;
        en["total"] = s.energy.total;
        st["energies"] = std::move(en);
        json segs = json::array();
        for (const auto& seg : gamma.segments())
            segs.push_back({seg.p().x, seg.p().y, seg.q().x, seg.q().y});
        st["crack_segments"] = std::move(segs);
        json broken = json::array(), released = json::array();
        for (std::size_t e = 0; e < s.result.config.broken.size(); ++e)
            if (s.result.config.broken[e]) broken.push_back(static_cast<int>(e));
        for (std::size_t e = 0; e < s.result.config.released.size(); ++e)
            if (s.result.config.released[e]) released.push_back(static_cast<int>(e));
        st["broken_edges"] = std::move(broken);
        st["released_edges"] = std::move(released);
        st["t_map"] = s.result.tri->params.t_per_edge;
        st["displacement"] = s.result.u.corner_values;
        st["u_sup"] = s.u_sup;
        st["g_sup"] = s.g_sup;
        st["converged"] = s.result.converged;
        j["steps"].push_back(std::move(st));
    }
    j["o_delta"] = h.o_delta;
    return j;
}

std::string energies_csv(const evo::History& h) {
    std::string out = "t,bulk,surface,total\n";
    for (const auto& s : h.steps) {
        out += dump_double(s.t) + "," + dump_double(s.energy.bulk) + "," +
               dump_double(s.energy.surface_total) + "," +
               dump_double(s.energy.total) + "\n";
    }
    return out;
}

LoadedHistory history_from_json(const json& j) {
    LoadedHistory lh;
    const json& meta = need(j, "meta", "history");
    lh.config.domain = parse_domain(need(meta, "domain", "history.meta"),
                                    "history.meta.domain");
    lh.config.mesh_params.eps = need_num(meta, "eps", "history.meta");
    lh.config.mesh_params.c1 = opt_num(meta, "c1", 0.5);
    lh.config.mesh_params.c2 = opt_num(meta, "c2", 2.0);
    lh.config.a = need_num(meta, "a", "history.meta");
    lh.config.schedule.delta = need_num(meta, "delta", "history.meta");
    lh.config.seed = meta.contains("seed") ? meta.at("seed").get<std::uint64_t>() : 0;
    lh.config.family_json = need(meta, "family", "history.meta");
    lh.config.schedule.family =
        parse_family(lh.config.family_json, "history.meta.family");
    if (meta.contains("t_grid"))
        for (const auto& t : meta.at("t_grid"))
            lh.config.t_grid.push_back(t.get<double>());
    lh.config.minimize.t_grid = lh.config.t_grid;

    lh.R = std::make_shared<mesh::RegularTriangulation>(
        mesh::build_regular(lh.config.domain, lh.config.mesh_params));
    lh.history.o_delta = j.contains("o_delta") ? j.at("o_delta").get<double>() : 0.0;
    lh.history.completed =
        !meta.contains("completed") || meta.at("completed").get<bool>();

    const double tol_geom = 1e-9 * std::max(1.0, lh.config.domain.diameter());
    lh.history.gamma = evo::CrackSet(tol_geom);
    int step_idx = 0;
    for (const json& st : need(j, "steps", "history")) {
        evo::Step s;
        s.t = need_num(st, "t", "history.steps");
        const json& en = need(st, "energies", "history.steps");
        s.energy.bulk = need_num(en, "bulk", "history.steps.energies");
        s.energy.surface_total = need_num(en, "surface", "history.steps.energies");
        s.energy.total = need_num(en, "total", "history.steps.energies");
        s.gamma_measure = s.energy.surface_total;

        mesh::AdaptiveParams ap;
        ap.a = lh.config.a;
        for (const auto& t : need(st, "t_map", "history.steps"))
            ap.t_per_edge.push_back(t.get<double>());
        auto tri = std::make_shared<mesh::AdaptiveTriangulation>(
            mesh::subdivide(*lh.R, ap));

        fem::BrokenEdgeSet B = fem::BrokenEdgeSet::none(*tri);
        for (const auto& e : need(st, "broken_edges", "history.steps"))
            B.interior_broken.at(e.get<int>()) = 1;
        if (st.contains("released_edges"))
            for (const auto& e : st.at("released_edges"))
                B.released.at(e.get<int>()) = 1;

        fem::DiscreteDisplacement u;
        u.tri = tri.get();
        u.broken = B;
        for (const auto& v : need(st, "displacement", "history.steps"))
            u.corner_values.push_back(v.get<double>());
        if (u.corner_values.size() != 3 * tri->subtris.size())
            fail("history.steps.displacement", "wrong corner value count");

        geom::SegmentSet crack(tol_geom);
        for (const auto& cs : need(st, "crack_segments", "history.steps")) {
            if (!cs.is_array() || cs.size() != 4)
                fail("history.steps.crack_segments", "each entry is [x1,y1,x2,y2]");
            crack.add(geom::Segment{{cs[0].get<double>(), cs[1].get<double>()},
                                    {cs[2].get<double>(), cs[3].get<double>()}});
        }
        // stored cracks are cumulative: the increment is the residual
        s.new_jumps = geom::SegmentSet(tol_geom);
        s.new_jumps.add(crack);  // superset; measures handled via residuals
        lh.history.gamma = evo::CrackSet(tol_geom);
        lh.history.gamma.add(crack, step_idx);

        s.result.tri = tri;
        s.result.u = std::move(u);
        s.result.energy.bulk = s.energy.bulk;
        s.result.energy.total = s.energy.total;
        s.result.converged =
            !st.contains("converged") || st.at("converged").get<bool>();
        s.u_sup = opt_num(st, "u_sup", 0.0);
        s.g_sup = opt_num(st, "g_sup", 0.0);
        lh.history.steps.push_back(std::move(s));
        ++step_idx;
    }
    return lh;
}

std::string crack_svg(const mesh::RegularTriangulation& R,
                      const geom::SegmentSet& crack) {
    double minx = R.points[0].x, maxx = minx, miny = R.points[0].y, maxy = miny;
    for (const auto& p : R.points) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double w = std::max(maxx - minx, 1e-12);
    const double hgt = std::max(maxy - miny, 1e-12);
    const double margin = 10.0;
    const double scale = (800.0 - 2 * margin) / w;
    const double H = hgt * scale + 2 * margin;
    const auto X = [&](double x) { return margin + (x - minx) * scale; };
    const auto Y = [&](double y) { return H - margin - (y - miny) * scale; };
    const auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };

    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"" +
           fmt(H) + "\" viewBox=\"0 0 800 " + fmt(H) + "\">\n";
    svg += "  <g stroke=\"#cccccc\" stroke-width=\"1\">\n";
    for (std::size_t e = 0; e < R.edges.size(); ++e) {
        const geom::Segment s = R.edge_segment(static_cast<int>(e));
        svg += "    <line x1=\"" + fmt(X(s.p().x)) + "\" y1=\"" + fmt(Y(s.p().y)) +
               "\" x2=\"" + fmt(X(s.q().x)) + "\" y2=\"" + fmt(Y(s.q().y)) +
               "\"/>\n";
    }
    svg += "  </g>\n";
    svg += "  <g stroke=\"#cc0000\" stroke-width=\"3\" fill=\"none\">\n";
    for (const auto& s : crack.normalized().segments()) {
        svg += "    <polyline points=\"" + fmt(X(s.p().x)) + "," + fmt(Y(s.p().y)) +
               " " + fmt(X(s.q().x)) + "," + fmt(Y(s.q().y)) + "\"/>\n";
    }
    svg += "  </g>\n</svg>\n";
    return svg;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fracsim::io
