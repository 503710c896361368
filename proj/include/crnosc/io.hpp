#ifndef CRNOSC_IO_HPP
#define CRNOSC_IO_HPP

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crnosc/inheritance.hpp"
#include "crnosc/odeint.hpp"
#include "crnosc/orbit.hpp"

namespace crnosc {

/// CSV with header "t,<species...>", one row per accepted step, 17
/// significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& species_names);

/// CSV of orbit samples at equal time spacing over one period.
void write_samples_csv(std::ostream& os, const PeriodicOrbit& orbit, double period_start,
                       const std::vector<std::string>& species_names);

nlohmann::ordered_json orbit_report_json(const PeriodicOrbit& orbit,
                                         const std::string& samples_csv_path);

nlohmann::ordered_json inheritance_report_json(const InheritanceReport& rep,
                                               const std::string& samples_csv_path);

}  // namespace crnosc

#endif
