// Command line front end: mesh inspection, evolution runs, the brute-force
// oracle, the adaptive-transfer study, refinement tables and re-verification
// of saved histories.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "fracsim/constructions.hpp"
#include "fracsim/errors.hpp"
#include "fracsim/io.hpp"

using namespace fracsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoConverge = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool strict = false;
};

void add_common(CLI::App* sub, CommonArgs& args, bool config_required = true) {
    auto* c = sub->add_option("--config", args.config_path, "config JSON path");
    if (config_required) c->required();
    sub->add_option("--out", args.out_dir, "output directory override");
    sub->add_option("--seed", args.seed, "RNG seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
    sub->add_flag("--strict", args.strict, "abort on non-convergence");
}

io::Config load(const CommonArgs& args) {
    io::Config cfg = io::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set) {
        cfg.seed = args.seed;
        cfg.minimize.rng_seed = args.seed;
    }
    if (args.strict) cfg.strict = true;
    return cfg;
}

std::string outpath(const io::Config& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_mesh(const CommonArgs& args) {
    const io::Config cfg = load(args);
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    const mesh::RegularityReport rep = mesh::check_regularity(R);
    io::json j = io::mesh_to_json(R);
    io::json jr;
    jr["min_angle_deg"] = rep.min_angle * 180.0 / M_PI;
    jr["max_angle_deg"] = rep.max_angle * 180.0 / M_PI;
    jr["min_edge"] = rep.min_edge;
    jr["max_edge"] = rep.max_edge;
    jr["min_inball_over_eps"] = rep.min_inball;
    jr["max_outball_over_eps"] = rep.max_outball;
    jr["pass"] = rep.pass;
    j["regularity"] = std::move(jr);
    io::write_file(outpath(cfg, "mesh.json"), j.dump(2) + "\n");
    std::printf("mesh: %zu points, %zu triangles, %zu edges\n", R.points.size(),
                R.triangles.size(), R.edges.size());
    std::printf("regularity: min_angle=%.3f deg, inball/eps=%.4f, outball/eps=%.4f, %s\n",
                rep.min_angle * 180.0 / M_PI, rep.min_inball, rep.max_outball,
                rep.pass ? "pass" : "FAIL");
    return kExitOk;
}

int cmd_evolve(const CommonArgs& args) {
    const io::Config cfg = load(args);
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    evo::EvolveOptions eo;
    eo.minimize = cfg.minimize;
    eo.strict = cfg.strict;
    const evo::History h = evo::evolve(R, cfg.a, cfg.schedule, eo);

    io::write_file(outpath(cfg, "history.json"),
                   io::history_to_json(h, cfg).dump(2) + "\n");
    if (cfg.csv) io::write_file(outpath(cfg, "energies.csv"), io::energies_csv(h));
    if (cfg.svg) {
        const std::vector<double> samples{0.0, 0.25, 0.5, 0.75, 1.0};
        geom::SegmentSet gamma;
        std::size_t step = 0;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            while (step < h.steps.size() && h.steps[step].t <= samples[k] + 1e-12) {
                gamma.add(h.steps[step].new_jumps);
                ++step;
            }
            char name[32];
            std::snprintf(name, sizeof name, "crack_%04zu.svg", k);
            io::write_file(outpath(cfg, name),
                           io::crack_svg(R, gamma.normalized()));
        }
    }
    for (const auto& s : h.steps)
        std::printf("t=%.4f  bulk=%.6f  surface=%.6f  total=%.6f\n", s.t,
                    s.energy.bulk, s.energy.surface_total, s.energy.total);
    if (!h.completed) {
        std::fprintf(stderr, "evolve: aborted on non-convergence (strict)\n");
        return kExitNoConverge;
    }
    return kExitOk;
}

int cmd_oracle(const CommonArgs& args, double t_eval) {
    const io::Config cfg = load(args);
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    const fem::BoundaryData g = cfg.schedule.family.at(R, t_eval);
    const std::vector<double> grid =
        cfg.t_grid.empty() ? minimize::default_t_grid(cfg.a) : cfg.t_grid;
    const geom::SegmentSet empty_gamma;
    const minimize::MinimizeResult res =
        minimize::brute_force_oracle(R, cfg.a, grid, g, empty_gamma);
    const io::json j = io::result_to_json(res, cfg.seed);
    io::write_file(outpath(cfg, "oracle.json"), j.dump(2) + "\n");
    std::printf("oracle: t=%.4f certified total=%.12f (bulk=%.12f, surface=%.12f)\n",
                t_eval, res.energy.total, res.energy.bulk, res.energy.surface_new);
    return kExitOk;
}

int cmd_adapt(const CommonArgs& args, std::vector<double> sweep, int n_samples) {
    const io::Config cfg = load(args);
    const mesh::RegularTriangulation R =
        mesh::build_regular(cfg.domain, cfg.mesh_params);
    if (sweep.empty()) sweep = {0.05, 0.25, 0.45};

    std::string csv = "a,mean_inflation,max_inflation\n";
    for (double a : sweep) {
        std::mt19937_64 rng(cfg.seed + 17);
        std::uniform_real_distribution<double> ang(0.0, M_PI);
        std::uniform_real_distribution<double> unif(0.2, 0.8);
        double sum = 0.0, worst = 0.0;
        int done = 0;
        while (done < n_samples) {
            // random chords through the domain interior
            const double minx = cfg.domain.vertices[0].x;
            double maxx = minx, miny = cfg.domain.vertices[0].y, maxy = miny;
            double mnx = minx;
            for (const auto& v : cfg.domain.vertices) {
                mnx = std::min(mnx, v.x);
                maxx = std::max(maxx, v.x);
                miny = std::min(miny, v.y);
                maxy = std::max(maxy, v.y);
            }
            const geom::Point2 c{mnx + unif(rng) * (maxx - mnx),
                                 miny + unif(rng) * (maxy - miny)};
            const double th = ang(rng);
            const double len = 0.25 * std::min(maxx - mnx, maxy - miny) *
                               (0.5 + unif(rng));
            const geom::Point2 d{std::cos(th), std::sin(th)};
            const geom::Point2 p = c - len * d, q = c + len * d;
            if (!cfg.domain.contains(p) || !cfg.domain.contains(q)) continue;
            geom::SegmentSet crack;
            crack.add(geom::Segment{p, q});
            try {
                const mesh::JumpTransfer tr = mesh::transfer_jump(R, a, crack);
                sum += tr.inflation;
                worst = std::max(worst, tr.inflation);
                ++done;
            } catch (const CrackThroughVertex&) {
                continue;
            }
        }
        char row[128];
        std::snprintf(row, sizeof row, "%.6g,%.12g,%.12g\n", a, sum / n_samples,
                      worst);
        csv += row;
        std::printf("a=%.3f  mean inflation=%.6f  max=%.6f\n", a,
                    sum / n_samples, worst);
    }
    io::write_file(outpath(cfg, "adapt.csv"), csv);
    return kExitOk;
}

int cmd_converge(const CommonArgs& args) {
    const io::Config cfg = load(args);
    io::json raw = io::json::parse(io::read_file(args.config_path));
    std::vector<evo::StudyLevel> levels;
    if (raw.contains("converge") && raw["converge"].contains("levels")) {
        for (const auto& lv : raw["converge"]["levels"]) {
            if (!lv.is_array() || lv.size() != 3)
                throw ConfigError("config.converge.levels: entries are [eps, a, delta]");
            levels.push_back({lv[0].get<double>(), lv[1].get<double>(),
                              lv[2].get<double>()});
        }
    } else {
        levels = {{cfg.mesh_params.eps * 2, cfg.a, cfg.schedule.delta * 2},
                  {cfg.mesh_params.eps, cfg.a, cfg.schedule.delta},
                  {cfg.mesh_params.eps / 2, cfg.a, cfg.schedule.delta / 2}};
    }
    evo::EvolveOptions eo;
    eo.minimize = cfg.minimize;
    eo.strict = cfg.strict;
    const std::vector<evo::StudyRow> rows = evo::convergence_study(
        cfg.domain, cfg.schedule.family, levels, cfg.mesh_params, eo);

    std::string csv = "eps,a,delta,t,energy,bulk,crack_len,hausdorff_to_finest\n";
    for (const auto& r : rows)
        for (std::size_t k = 0; k < r.sample_times.size(); ++k) {
            char row[256];
            std::snprintf(row, sizeof row, "%.8g,%.8g,%.8g,%.8g,%.12g,%.12g,%.12g,%.12g\n",
                          r.level.eps, r.level.a, r.level.delta, r.sample_times[k],
                          r.energy[k], r.bulk[k], r.crack_len[k],
                          r.hausdorff_to_finest);
            csv += row;
        }
    io::write_file(outpath(cfg, "converge.csv"), csv);
    for (const auto& r : rows)
        std::printf("eps=%.5f a=%.3f delta=%.4f  E(1)=%.8f  d_H=%.6f\n",
                    r.level.eps, r.level.a, r.level.delta, r.final_energy,
                    r.hausdorff_to_finest);
    return kExitOk;
}

int cmd_check(const std::string& history_path, int trials) {
    const io::LoadedHistory lh =
        io::history_from_json(io::json::parse(io::read_file(history_path)));
    const auto& h = lh.history;
    bool ok = true;

    // stored energies must match the stored displacements
    double worst_roundtrip = 0.0;
    for (const auto& s : h.steps) {
        const double bulk = fem::bulk_energy(s.result.u);
        worst_roundtrip = std::max(worst_roundtrip, std::abs(bulk - s.energy.bulk));
    }
    std::printf("roundtrip: max |bulk(stored u) - stored bulk| = %.3g %s\n",
                worst_roundtrip, worst_roundtrip <= 1e-12 ? "(ok)" : "(FAIL)");
    ok = ok && worst_roundtrip <= 1e-12;

    const evo::BalanceReport rep =
        evo::check_energy_balance(*lh.R, lh.config.schedule, h);
    std::printf("energy balance: %d pairs, max residual %.3g, %zu violations %s\n",
                rep.n_pairs, rep.max_residual, rep.offending.size(),
                rep.offending.empty() ? "(ok)" : "(FAIL)");
    ok = ok && rep.offending.empty();

    geom::SegmentSet gamma_prev;
    int total_viol = 0;
    for (std::size_t i = 0; i < h.steps.size(); ++i) {
        const auto& s = h.steps[i];
        const fem::BoundaryData g = lh.config.schedule.family.at(*lh.R, s.t);
        const minimize::MinimalityReport mr = minimize::verify_unilateral_minimality(
            *lh.R, lh.config.a, s.result, g, gamma_prev, trials,
            lh.config.seed + i, 1e-8, lh.config.t_grid);
        total_viol += mr.violations;
        gamma_prev = s.new_jumps;  // cumulative crack snapshot
    }
    std::printf("minimality: %d violations over %zu steps x %d trials %s\n",
                total_viol, h.steps.size(), trials,
                total_viol == 0 ? "(ok)" : "(FAIL)");
    ok = ok && total_viol == 0;
    return ok ? kExitOk : kExitNoConverge;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-static brittle fracture on adaptive triangulations"};
    app.require_subcommand(1);

    CommonArgs mesh_args, evolve_args, oracle_args, adapt_args, conv_args;
    double oracle_t = 1.0;
    std::vector<double> sweep;
    int adapt_n = 50;
    std::string history_path;
    int check_trials = 20;

    auto* sc_mesh = app.add_subcommand("mesh", "build and inspect the mesh");
    add_common(sc_mesh, mesh_args);
    auto* sc_evolve = app.add_subcommand("evolve", "run the quasi-static evolution");
    add_common(sc_evolve, evolve_args);
    auto* sc_oracle = app.add_subcommand("oracle", "brute-force one step exactly");
    add_common(sc_oracle, oracle_args);
    sc_oracle->add_option("--t", oracle_t, "evaluation time (default 1)");
    auto* sc_adapt = app.add_subcommand("adapt", "crack transfer inflation study");
    add_common(sc_adapt, adapt_args);
    sc_adapt->add_option("--sweep", sweep, "a values to sweep");
    sc_adapt->add_option("--n", adapt_n, "samples per a");
    auto* sc_conv = app.add_subcommand("converge", "refinement trend table");
    add_common(sc_conv, conv_args);
    auto* sc_check = app.add_subcommand("check", "re-verify a saved history");
    sc_check->add_option("history", history_path, "history.json path")->required();
    sc_check->add_option("--trials", check_trials, "minimality trials per step");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sc_mesh->parsed()) return cmd_mesh(mesh_args);
        if (sc_evolve->parsed()) return cmd_evolve(evolve_args);
        if (sc_oracle->parsed()) return cmd_oracle(oracle_args, oracle_t);
        if (sc_adapt->parsed()) return cmd_adapt(adapt_args, sweep, adapt_n);
        if (sc_conv->parsed()) return cmd_converge(conv_args);
        if (sc_check->parsed()) return cmd_check(history_path, check_trials);
    } catch (const ConfigError& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return kExitConfig;
    } catch (const ParamOutOfRange& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return kExitConfig;
    } catch (const NonConvergence& ex) {
        std::fprintf(stderr, "non-convergence: %s\n", ex.what());
        return kExitNoConverge;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return kExitConfig;
    }
    return kExitOk;
}
