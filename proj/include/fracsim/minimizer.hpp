#pragma once

// The incremental nonconvex problems: minimize bulk energy plus new-crack
// length over broken edge sets, adaptive knot positions and displacements.
// A multi-start local search is paired with an exact brute-force oracle for
// tiny instances.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "fracsim/femspace.hpp"

namespace fracsim::minimize {

using fem::BoundaryData;
using fem::DiscreteDisplacement;
using fem::EnergyBreakdown;
using geom::Segment;
using geom::SegmentSet;
using mesh::AdaptiveTriangulation;
using mesh::RegularTriangulation;

// A point of the combinatorial search space. Sub-edge indexing does not
// depend on the knot positions, so t moves keep the broken flags meaningful.
struct SearchConfig {
    std::vector<char> broken;    // per sub-edge (interior ones meaningful)
    std::vector<char> released;  // per regular edge (Dirichlet ones meaningful)
    std::vector<int> t_idx;      // per regular edge, index into t_grid

    bool operator==(const SearchConfig&) const = default;
};

struct MoveSet {
    bool edge_flip = true;
    bool vertex_move = true;
    bool collinear_run_break = true;
    bool truncation_pass = true;
};

struct MinimizeOptions {
    int restarts = 8;
    std::vector<double> t_grid;  // defaulted from `a` when empty
    MoveSet move_set;
    std::uint64_t rng_seed = 0;
    double energy_tol = 1e-9;
    int max_iters = 40;
    int flip_cap = 0;  // per-pass cap on sampled edge flips; 0 = auto
    fem::DirichletGranularity granularity = fem::DirichletGranularity::WholeEdge;
};

std::vector<double> default_t_grid(double a);

struct MinimizeResult {
    std::shared_ptr<const AdaptiveTriangulation> tri;
    DiscreteDisplacement u;
    EnergyBreakdown energy;
    SegmentSet new_jump_set;  // S^g(u), pruned to actual jumps
    SearchConfig config;      // healed: broken = realized jumps
    int iterations = 0;
    int restarts_used = 0;
    bool is_certified_global = false;
    bool converged = true;
};

MinimizeResult incremental_minimize(
    const RegularTriangulation& R, double a, const BoundaryData& g,
    const SegmentSet& gamma_prev, const MinimizeOptions& opts,
    const std::optional<SearchConfig>& warm_start = std::nullopt);

// Exact global minimizer by enumeration of all broken subsets x t-grid
// assignments. Throws InstanceTooLarge above the cap.
MinimizeResult brute_force_oracle(const RegularTriangulation& R, double a,
                                  const std::vector<double>& t_grid,
                                  const BoundaryData& g,
                                  const SegmentSet& gamma_prev,
                                  int max_dofs = 64,
                                  std::uint64_t max_configs = 80'000'000);

struct MinimalityReport {
    int trials = 0;
    int violations = 0;
    double worst_gap = 0.0;  // max of ||grad u||^2 - competitor energy
};

// Spot check of unilateral minimality against random competitors plus the
// deterministic candidates g and u itself.
MinimalityReport verify_unilateral_minimality(
    const RegularTriangulation& R, double a, const MinimizeResult& result,
    const BoundaryData& g, const SegmentSet& gamma_prev, int trials,
    std::uint64_t rng_seed, double energy_tol = 1e-8,
    const std::vector<double>& t_grid = {});

} // namespace fracsim::minimize
