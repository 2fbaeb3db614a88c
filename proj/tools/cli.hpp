#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "collision_spin/central_config.hpp"
#include "collision_spin/collision_dynamics.hpp"
#include "collision_spin/gradient_flow.hpp"
#include "collision_spin/mass_system.hpp"
#include "collision_spin/spin_demo.hpp"

namespace cspin::cli {

/// Runs the collision-spin command line. Exit codes: 0 success, 1 domain
/// error (JSON report on err), 2 usage or configuration error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Thread budget: hardware concurrency, capped by COLLISION_SPIN_THREADS and
/// by the requested count when positive.
int thread_budget(int requested);

/// "1,2.5,3" -> {1, 2.5, 3}. Throws ConfigError.
std::vector<double> parse_list(const std::string& text);

/// Inline JSON (starting with '{') or a path to a JSON file.
MassSystem load_masses(const std::string& masses, const std::string& config);

// Writers. Floats use 17 significant digits, lines end with LF.
void write_trajectory_csv(const TrajectoryRecord& record, int shape_dim, std::ostream& os);
void write_lift_csv(const LiftResult& lift, std::ostream& os);
void write_decay_csv(const DecayReport& report, int dim, std::ostream& os);
std::string catalog_json(const std::vector<CentralConfig>& catalog);
std::string detailed_catalog_json(const MassSystem& mass, const std::vector<CentralConfig>& catalog);

}  // namespace cspin::cli
