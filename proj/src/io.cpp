#include "crnosc/io.hpp"

#include <cstdio>

namespace crnosc {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_header(std::ostream& os, const std::vector<std::string>& names) {
  os << "t";
  for (const auto& s : names) os << "," << s;
  os << "\n";
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& species_names) {
  write_header(os, species_names);
  for (size_t i = 0; i < traj.times().size(); ++i) {
    os << g17(traj.times()[i]);
    const Eigen::VectorXd& x = traj.states()[i];
    for (int j = 0; j < x.size(); ++j) os << "," << g17(x[j]);
    os << "\n";
  }
}

void write_samples_csv(std::ostream& os, const PeriodicOrbit& orbit, double period_start,
                       const std::vector<std::string>& species_names) {
  write_header(os, species_names);
  const int count = static_cast<int>(orbit.samples.rows());
  for (int i = 0; i < count; ++i) {
    os << g17(period_start + orbit.period * i / count);
    for (int j = 0; j < orbit.samples.cols(); ++j) os << "," << g17(orbit.samples(i, j));
    os << "\n";
  }
}

nlohmann::ordered_json orbit_report_json(const PeriodicOrbit& orbit,
                                         const std::string& samples_csv_path) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["anchor"] = std::vector<double>(orbit.anchor.begin(), orbit.anchor.end());
  j["period"] = orbit.period;
  auto mult = nlohmann::ordered_json::array();
  for (int i = 0; i < orbit.multipliers_relative.size(); ++i)
    mult.push_back({{"re", orbit.multipliers_relative[i].real()},
                    {"im", orbit.multipliers_relative[i].imag()}});
  j["multipliers_relative"] = mult;
  j["classification"] = to_string(orbit.classification);
  j["samples_csv_path"] = samples_csv_path;
  return j;
}

nlohmann::ordered_json inheritance_report_json(const InheritanceReport& rep,
                                               const std::string& samples_csv_path) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["rank_check"] = {{"rank", rep.beta_rank}, {"m", rep.m}, {"ok", rep.rank_ok}};
  j["permutation"] = rep.permutation;
  nlohmann::ordered_json rates;
  rates["epsilon"] = rep.rates.epsilon;
  rates["eta"] = rep.rates.eta;
  auto arr = nlohmann::ordered_json::array();
  for (int i = 0; i < rep.rates.k_forward.size(); ++i)
    arr.push_back({{"kf", rep.rates.k_forward[i]},
                   {"kr", rep.rates.k_backward[i]},
                   {"sigma_f", rep.rates.sigma_forward[i]},
                   {"sigma_b", rep.rates.sigma_backward[i]}});
  rates["reactions"] = arr;
  j["rates"] = rates;
  if (rep.orbit)
    j["orbit"] = orbit_report_json(*rep.orbit, samples_csv_path);
  else
    j["orbit"] = {{"failure", rep.failure}};
  j["hausdorff_old_species"] = rep.hausdorff_old_species;
  nlohmann::ordered_json ranges;
  for (const SpeciesRange& r : rep.new_species_ranges)
    ranges[r.name] = {{"min", r.min}, {"max", r.max}, {"peak_to_peak", r.max - r.min}};
  j["new_species_ranges"] = ranges;
  j["conservation_drift"] = rep.conservation_drift;
  return j;
}

}  // namespace crnosc
