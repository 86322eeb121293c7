#include <doctest.h>

#include <algorithm>

#include "fracsim/errors.hpp"
#include "fracsim/io.hpp"

using namespace fracsim;
using io::json;

namespace {

json tearing_config(double eps, double delta) {
    json j;
    j["domain"]["vertices"] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    j["domain"]["dirichlet_edges"] = {0, 2};
    j["mesh"]["eps"] = eps;
    j["adaptive"]["a"] = 0.25;
    j["schedule"]["delta"] = delta;
    j["schedule"]["family"] = {{"kind", "ramp"}, {"ax", 0}, {"by", 2}, {"c", 0}};
    j["seed"] = 3;
    return j;
}

evo::History run(const io::Config& cfg, const mesh::RegularTriangulation& R) {
    evo::EvolveOptions eo;
    eo.minimize = cfg.minimize;
    return evo::evolve(R, cfg.a, cfg.schedule, eo);
}

} // namespace

TEST_CASE("config validation reports field paths") {
    json j = tearing_config(0.5, 0.25);
    j["adaptive"]["a"] = 0.6;
    CHECK_THROWS_WITH_AS(io::parse_config(j),
                         "config.adaptive.a: a must lie in (0, 0.5)",
                         ConfigError);

    j = tearing_config(0.5, 0.25);
    j["mesh"].erase("eps");
    CHECK_THROWS_WITH_AS(io::parse_config(j),
                         "config.mesh.eps: missing required field", ConfigError);

    j = tearing_config(0.5, 0.25);
    j["schedule"]["delta"] = 0.0;
    CHECK_THROWS_WITH_AS(io::parse_config(j), "config.schedule.delta: must be > 0",
                         ConfigError);

    j = tearing_config(0.5, 0.25);
    j["schedule"]["family"]["kind"] = "sawtooth";
    CHECK_THROWS_AS(io::parse_config(j), ConfigError);

    j = tearing_config(0.5, 0.25);
    j["domain"]["vertices"] = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(io::parse_config(j), ConfigError);
}

TEST_CASE("identical config and seed produce identical history bytes") {
    const io::Config cfg = io::parse_config(tearing_config(0.5, 0.25));
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    const std::string d1 = io::history_to_json(run(cfg, R), cfg).dump(2);
    const std::string d2 = io::history_to_json(run(cfg, R), cfg).dump(2);
    CHECK(d1 == d2);
}

TEST_CASE("history json round trip preserves energies and displacements") {
    const io::Config cfg = io::parse_config(tearing_config(0.5, 0.25));
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    const evo::History h = run(cfg, R);
    const json j = json::parse(io::history_to_json(h, cfg).dump(2));
    const io::LoadedHistory lh = io::history_from_json(j);

    REQUIRE(lh.history.steps.size() == h.steps.size());
    CHECK(lh.history.o_delta == h.o_delta);
    for (std::size_t i = 0; i < h.steps.size(); ++i) {
        const auto& a = h.steps[i];
        const auto& b = lh.history.steps[i];
        CHECK(b.t == a.t);
        CHECK(b.energy.total == a.energy.total);
        CHECK(std::abs(fem::bulk_energy(b.result.u) - a.energy.bulk) <= 1e-12);
        CHECK(b.result.u.corner_values == a.result.u.corner_values);
    }

    const evo::BalanceReport rep =
        evo::check_energy_balance(*lh.R, lh.config.schedule, lh.history);
    CHECK(rep.offending.empty());
}

TEST_CASE("energies csv layout") {
    const io::Config cfg = io::parse_config(tearing_config(1.0, 0.5));
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    const std::string csv = io::energies_csv(run(cfg, R));
    CHECK(csv.rfind("t,bulk,surface,total\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 steps
}

TEST_CASE("mesh json round trips through the deterministic builder") {
    const io::Config cfg = io::parse_config(tearing_config(0.25, 0.25));
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    const mesh::RegularTriangulation R2 = io::mesh_from_json(io::mesh_to_json(R));
    CHECK(R2.points.size() == R.points.size());
    CHECK(R2.triangles == R.triangles);
    CHECK(R2.dirichlet_edges == R.dirichlet_edges);
}

TEST_CASE("svg output is well formed and draws every crack segment") {
    const io::Config cfg = io::parse_config(tearing_config(0.5, 0.25));
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    geom::SegmentSet crack;
    crack.add({{0, 0.5}, {1, 0.5}});
    crack.add({{0.5, 0.2}, {0.5, 0.8}});
    const std::string svg = io::crack_svg(R, crack);

    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    const auto count = [&](const std::string& needle) {
        std::size_t n = 0, pos = 0;
        while ((pos = svg.find(needle, pos)) != std::string::npos) {
            ++n;
            pos += needle.size();
        }
        return n;
    };
    CHECK(count("<polyline") == 2);
    CHECK(count("<line") == R.edges.size());
    CHECK(count("<g ") == count("</g>"));
    CHECK(svg.find('&') == std::string::npos);
}
