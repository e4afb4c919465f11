#pragma once

#include "shadowflow/integrator.hpp"

#include <ostream>
#include <string>

namespace shadowflow {

std::string csv_header(const Trajectory& traj);

// One row per sample, numbers printed with 17 significant digits.
void write_csv(const Trajectory& traj, std::ostream& out);
void write_csv(const Trajectory& traj, const std::string& path);

}  // namespace shadowflow
