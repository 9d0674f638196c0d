#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "xfer/cauchy.hpp"

namespace xfer {

// {"kernel": {...}, "initial": {"atoms": [...]},
//  "growth": {"type": "constant", "c": -1} | {"type": "affine_capped", "a":, "b":, "xcap":}
//          | {"type": "table", "times": [...], "locations": [...], "values": [[...], ...]},
//  "source": {"pieces": [{"t_start":, "t_end":, "measure": {"atoms": [...]}}]},
//  "solver": {"mode": "atomic_euler", "dt": ..., ...},
//  "c_bar": 10}
// Missing optional members take the SolverSettings / Scenario defaults.
// Structural problems throw ConfigError.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

Scenario load_scenario(const std::string& path);

nlohmann::json growth_to_json(const GrowthSpec& h);
GrowthSpec growth_from_json(const nlohmann::json& j);

/// Header row t,mass,mean,variance,mass_at_zero,tv_rate,n_atoms.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace xfer
