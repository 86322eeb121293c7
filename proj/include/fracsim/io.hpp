#pragma once

// JSON, CSV and SVG artifact emission, plus config ingestion for the CLI.
// All JSON uses ordered maps so identical runs produce identical bytes.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "fracsim/evolution.hpp"

namespace fracsim::io {

using json = nlohmann::ordered_json;

struct Config {
    mesh::PolygonalDomain domain;
    mesh::MeshParams mesh_params;
    double a = 0.25;
    std::vector<double> t_grid;  // empty = default grid for a
    evo::Schedule schedule;
    minimize::MinimizeOptions minimize;
    std::string out_dir = "out";
    bool svg = true;
    bool csv = true;
    bool strict = false;
    std::uint64_t seed = 0;
    json family_json;  // retained verbatim for history metadata
};

// Throws ConfigError naming the offending field path.
Config parse_config(const json& j);
Config load_config(const std::string& path);

json mesh_to_json(const mesh::RegularTriangulation& R);
mesh::RegularTriangulation mesh_from_json(const json& j);

json displacement_to_json(const fem::DiscreteDisplacement& u);
json result_to_json(const minimize::MinimizeResult& r, std::uint64_t seed);

json history_to_json(const evo::History& h, const Config& cfg);
std::string energies_csv(const evo::History& h);

// Rebuilt state sufficient to re-verify a saved run without re-simulating.
struct LoadedHistory {
    Config config;
    std::shared_ptr<mesh::RegularTriangulation> R;
    evo::History history;
};
LoadedHistory history_from_json(const json& j);

std::string crack_svg(const mesh::RegularTriangulation& R,
                      const geom::SegmentSet& crack);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace fracsim::io
