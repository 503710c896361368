// crnosc: mass-action reaction network oscillation toolkit.
//
// Subcommands: simulate, orbit, floquet, extend, verify.
// Exit codes: 0 success, 1 input/parse error, 2 integration failure,
// 3 no periodic orbit found, 4 rank condition failed.

#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "crnosc/inheritance.hpp"
#include "crnosc/io.hpp"
#include "crnosc/kinetics.hpp"
#include "crnosc/network.hpp"
#include "crnosc/odeint.hpp"
#include "crnosc/orbit.hpp"
#include "crnosc/stoich.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitIntegration = 2;
constexpr int kExitNoOrbit = 3;
constexpr int kExitRank = 4;

struct CliError : std::runtime_error {
  CliError(int code, const std::string& msg) : std::runtime_error(msg), exit_code(code) {}
  int exit_code;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

crnosc::Network load_network(const std::string& path) {
  try {
    return crnosc::parse_network(read_file(path));
  } catch (const crnosc::ParseError& e) {
    throw CliError(kExitInput, path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CliError(kExitInput, path + ": " + e.what());
  }
}

Eigen::VectorXd parse_values(const std::string& csv, const std::vector<std::string>& names,
                             const std::string& flag) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      vals.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw CliError(kExitInput, flag + ": '" + item + "' is not a number");
    }
  }
  if (vals.size() != names.size()) {
    if (vals.size() < names.size())
      throw CliError(kExitInput, flag + ": missing initial value for species '" +
                                     names[vals.size()] + "'");
    throw CliError(kExitInput, flag + ": expected " + std::to_string(names.size()) +
                                   " values, got " + std::to_string(vals.size()));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kExitInput, "cannot write '" + path + "'");
  out << content;
}

std::string sibling_path(const std::string& out_path, const std::string& suffix) {
  std::filesystem::path p(out_path);
  p.replace_extension();
  return p.string() + suffix;
}

struct CommonFlags {
  double rtol = 1e-9;
  double atol = 1e-11;
  long max_steps = 2'000'000;
  double burn_in = 150.0;

  void attach(CLI::App* cmd, bool with_orbit) {
    cmd->add_option("--rtol", rtol, "relative tolerance");
    cmd->add_option("--atol", atol, "absolute tolerance");
    cmd->add_option("--max-steps", max_steps, "integration step guard");
    if (with_orbit) cmd->add_option("--burn-in", burn_in, "transient time before orbit search");
  }
  crnosc::OrbitSearchConfig orbit_config() const {
    crnosc::OrbitSearchConfig cfg;
    cfg.burn_in = burn_in;
    cfg.integrator.rtol = rtol;
    cfg.integrator.atol = atol;
    cfg.integrator.max_steps = max_steps;
    return cfg;
  }
};

int run_simulate(const std::string& net_path, const std::string& x0_csv, double t_end,
                 const CommonFlags& flags, const std::string& out_path) {
  crnosc::Network net = load_network(net_path);
  Eigen::VectorXd x0 = parse_values(x0_csv, net.species_names(), "--x0");
  for (int i = 0; i < x0.size(); ++i)
    if (x0[i] < 0.0)
      throw CliError(kExitInput, "--x0: negative concentration for species '" +
                                     net.species_name(i) + "'");

  crnosc::IntegratorConfig cfg;
  cfg.rtol = flags.rtol;
  cfg.atol = flags.atol;
  cfg.max_steps = flags.max_steps;
  cfg.positive_prefix = net.species_count();
  crnosc::MassActionSystem sys(net);
  crnosc::Trajectory traj;
  try {
    traj = crnosc::integrate([&sys](const Eigen::VectorXd& x) { return sys.field_raw(x); }, x0,
                             t_end, cfg);
  } catch (const crnosc::IntegrationError& e) {
    throw CliError(kExitIntegration, std::string("integration failed: ") + e.what());
  }

  std::ostringstream csv;
  crnosc::write_trajectory_csv(csv, traj, net.species_names());
  write_text_file(out_path, csv.str());

  crnosc::ConservationLaws laws = crnosc::conservation_laws(net.stoichiometric_matrix());
  if (laws.L.rows() == 0) {
    std::cout << "conservation drift: none (no conservation laws)\n";
  } else {
    Eigen::VectorXd c0 = laws.L * traj.front();
    double drift = 0.0;
    for (const Eigen::VectorXd& x : traj.states())
      drift = std::max(drift, (laws.L * x - c0).lpNorm<Eigen::Infinity>());
    std::cout << "conservation drift: " << crnosc::format_double(drift) << " over "
              << laws.L.rows() << " law(s)\n";
  }
  return kExitOk;
}

int run_orbit(const std::string& net_path, const std::string& x0_csv, const CommonFlags& flags,
              const std::string& out_path, bool print_floquet) {
  crnosc::Network net = load_network(net_path);
  Eigen::VectorXd x0 = parse_values(x0_csv, net.species_names(), "--x0");
  for (int i = 0; i < x0.size(); ++i)
    if (x0[i] < 0.0)
      throw CliError(kExitInput, "--x0: negative concentration for species '" +
                                     net.species_name(i) + "'");

  crnosc::PeriodicOrbit orbit;
  try {
    orbit = crnosc::find_periodic_orbit(net, x0, flags.orbit_config());
  } catch (const crnosc::OrbitSearchError& e) {
    throw CliError(kExitNoOrbit, std::string("no orbit found: ") + e.what() +
                                     " [reason: " + to_string(e.kind()) + "]");
  } catch (const crnosc::IntegrationError& e) {
    throw CliError(kExitIntegration, std::string("integration failed: ") + e.what());
  }

  if (!out_path.empty()) {
    std::string samples_path = sibling_path(out_path, "_samples.csv");
    std::ostringstream csv;
    crnosc::write_samples_csv(csv, orbit, 0.0, net.species_names());
    write_text_file(samples_path, csv.str());
    write_text_file(out_path, crnosc::orbit_report_json(orbit, samples_path).dump(2) + "\n");
  }
  if (print_floquet) {
    std::cout << "period: " << crnosc::format_double(orbit.period) << "\n";
    std::cout << "relative multipliers:\n";
    for (int i = 0; i < orbit.multipliers_relative.size(); ++i) {
      auto mu = orbit.multipliers_relative[i];
      std::cout << "  " << crnosc::format_double(mu.real()) << " + "
                << crnosc::format_double(mu.imag()) << "i  (|mu| = "
                << crnosc::format_double(std::abs(mu)) << ")\n";
    }
    std::cout << "classification: " << to_string(orbit.classification) << "\n";
  } else {
    std::cout << "classification: " << to_string(orbit.classification) << "\n";
  }
  return kExitOk;
}

crnosc::Extension build_extension_or_die(const crnosc::Network& base,
                                         const std::string& add_path) {
  try {
    return crnosc::Extension::build(base, read_file(add_path));
  } catch (const crnosc::ExtensionError& e) {
    int code = e.kind() == crnosc::ExtensionError::Kind::RankDeficient ? kExitRank : kExitInput;
    throw CliError(code, e.what());
  } catch (const crnosc::ParseError& e) {
    throw CliError(kExitInput, add_path + ": " + e.what());
  }
}

int run_extend(const std::string& base_path, const std::string& add_path, double eps, double eta,
               const std::string& out_path) {
  crnosc::Network base = load_network(base_path);
  crnosc::Extension ext = build_extension_or_die(base, add_path);
  crnosc::RateSchedule sched = crnosc::synthesize_rates(ext, eps, eta);
  crnosc::Network extended = crnosc::extended_network(ext, sched);
  write_text_file(out_path, crnosc::serialize_network(extended));

  std::cout << "beta (net new-species changes, permuted rows):\n";
  Eigen::MatrixXi beta = ext.beta();
  for (int i = 0; i < beta.rows(); ++i) {
    std::cout << " ";
    for (int j = 0; j < beta.cols(); ++j) std::cout << " " << beta(i, j);
    std::cout << "\n";
  }
  std::cout << "rank: " << crnosc::rank_and_image(beta).rank << " (m = " << ext.m() << ")\n";
  std::cout << "permutation: ";
  for (size_t i = 0; i < ext.permutation().size(); ++i)
    std::cout << (i ? "," : "") << ext.permutation()[i];
  std::cout << "\nrates:";
  for (int i = 0; i < sched.k_forward.size(); ++i)
    std::cout << " kf" << i + 1 << "=" << crnosc::format_double(sched.k_forward[i]) << " kr"
              << i + 1 << "=" << crnosc::format_double(sched.k_backward[i]);
  std::cout << "\n";
  return kExitOk;
}

int run_verify_case(const crnosc::Extension& ext, const crnosc::PeriodicOrbit& base_orbit,
                    double eps, double eta, const Eigen::VectorXd& y0, const CommonFlags& flags,
                    const std::string& out_path, std::ostream& log) {
  crnosc::InheritanceReport rep =
      crnosc::verify_inheritance(base_orbit, ext, eps, eta, y0, flags.orbit_config());

  std::string samples_path;
  if (rep.orbit) {
    samples_path = sibling_path(out_path, "_samples.csv");
    std::ostringstream csv;
    crnosc::write_samples_csv(csv, *rep.orbit, 0.0, rep.extended.species_names());
    write_text_file(samples_path, csv.str());
  }
  write_text_file(out_path, crnosc::inheritance_report_json(rep, samples_path).dump(2) + "\n");

  if (!rep.orbit) {
    log << "verify(eps=" << eps << ", eta=" << eta << "): no orbit found [reason: " << rep.failure
        << "]\n";
    return rep.failure.rfind("integration", 0) == 0 ? kExitIntegration : kExitNoOrbit;
  }
  log << "verify(eps=" << crnosc::format_double(eps) << ", eta=" << crnosc::format_double(eta)
      << "): " << to_string(rep.orbit->classification)
      << ", hausdorff_old_species=" << crnosc::format_double(rep.hausdorff_old_species)
      << ", conservation_drift=" << crnosc::format_double(rep.conservation_drift) << "\n";
  return rep.stable() ? kExitOk : kExitNoOrbit;
}

int run_verify(const std::string& base_path, const std::string& add_path, double eps_flag,
               std::vector<double> eps_list, double eta_flag, bool eta_given,
               const std::string& y0_csv, const CommonFlags& flags, const std::string& out_path) {
  crnosc::Network base = load_network(base_path);
  crnosc::Extension ext = build_extension_or_die(base, add_path);

  Eigen::VectorXd y0 = parse_values(y0_csv, ext.new_species(), "--y0");
  for (int i = 0; i < y0.size(); ++i)
    if (y0[i] < 0.0)
      throw CliError(kExitInput, "--y0: negative value for species '" + ext.new_species()[i] +
                                     "'");

  // base orbit: search from all-ones when the base file gives no hint
  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(base.species_count());
  crnosc::PeriodicOrbit base_orbit;
  try {
    base_orbit = crnosc::find_periodic_orbit(base, x0, flags.orbit_config());
  } catch (const crnosc::OrbitSearchError& e) {
    throw CliError(kExitNoOrbit, std::string("base network has no orbit: ") + e.what());
  }
  if (base_orbit.classification != crnosc::OrbitClass::NondegenerateStable)
    throw CliError(kExitNoOrbit, "base orbit is not nondegenerate-stable (" +
                                     to_string(base_orbit.classification) + ")");

  if (eps_list.empty()) {
    double eta = eta_given ? eta_flag : eps_flag;
    return run_verify_case(ext, base_orbit, eps_flag, eta, y0, flags, out_path, std::cout);
  }

  // sweep: independent concurrent cases, isolated outputs, summaries printed
  // in order afterwards
  struct Case {
    std::string path;
    std::ostringstream log;
    std::future<int> result;
  };
  std::vector<std::unique_ptr<Case>> cases;
  for (double eps : eps_list) {
    double eta = eta_given ? eta_flag : eps;
    auto c = std::make_unique<Case>();
    c->path = sibling_path(out_path, "_eps" + crnosc::format_double(eps) + ".json");
    Case* raw = c.get();
    c->result = std::async(std::launch::async, [&, eps, eta, raw]() {
      return run_verify_case(ext, base_orbit, eps, eta, y0, flags, raw->path, raw->log);
    });
    cases.push_back(std::move(c));
  }
  int worst = kExitOk;
  for (auto& c : cases) {
    int code = c->result.get();
    std::cout << c->log.str() << "case " << c->path << ": exit " << code << "\n";
    worst = std::max(worst, code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mass-action reaction network oscillation toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "integrate a network and write a trajectory CSV");
  std::string sim_net, sim_x0, sim_out = "trajectory.csv";
  double sim_tend = 100.0;
  CommonFlags sim_flags;
  sim->add_option("network", sim_net, "network file")->required();
  sim->add_option("--x0", sim_x0, "comma-separated initial concentrations")->required();
  sim->add_option("--t-end", sim_tend, "integration end time");
  sim->add_option("--out", sim_out, "output CSV path");
  sim_flags.attach(sim, false);

  // orbit / floquet
  auto* orb = app.add_subcommand("orbit", "locate a periodic orbit and write a JSON report");
  std::string orb_net, orb_x0, orb_out = "orbit.json";
  CommonFlags orb_flags;
  orb->add_option("network", orb_net, "network file")->required();
  orb->add_option("--x0", orb_x0, "comma-separated initial concentrations")->required();
  orb->add_option("--out", orb_out, "output JSON path");
  orb_flags.attach(orb, true);

  auto* flo = app.add_subcommand("floquet", "print relative Floquet multipliers");
  std::string flo_net, flo_x0, flo_out;
  CommonFlags flo_flags;
  flo->add_option("network", flo_net, "network file")->required();
  flo->add_option("--x0", flo_x0, "comma-separated initial concentrations")->required();
  flo->add_option("--out", flo_out, "optional JSON path");
  flo_flags.attach(flo, true);

  // extend
  auto* extc = app.add_subcommand("extend", "extend a network with scheduled reversible reactions");
  std::string ext_base, ext_add, ext_out = "extended.crn";
  double ext_eps = 0.2, ext_eta = 0.2;
  extc->add_option("base", ext_base, "base network file")->required();
  extc->add_option("--add", ext_add, "file of reversible reactions to add")->required();
  extc->add_option("--eps", ext_eps, "epsilon (rate scale 1/eps)");
  extc->add_option("--eta", ext_eta, "eta (rate-ratio scale)");
  extc->add_option("--out", ext_out, "output network file");

  // verify
  auto* ver = app.add_subcommand("verify", "run the full oscillation-inheritance pipeline");
  std::string ver_base, ver_add, ver_y0, ver_out = "report.json";
  double ver_eps = 0.2, ver_eta = 0.2;
  std::vector<double> ver_eps_list;
  CommonFlags ver_flags;
  ver->add_option("base", ver_base, "base network file")->required();
  ver->add_option("--add", ver_add, "file of reversible reactions to add")->required();
  ver->add_option("--eps", ver_eps, "epsilon");
  auto* eps_list_opt =
      ver->add_option("--eps-list", ver_eps_list, "comma-separated sweep of epsilon values, "
                                                  "run concurrently with isolated outputs");
  eps_list_opt->delimiter(',');
  auto* eta_opt = ver->add_option("--eta", ver_eta, "eta (defaults to eps per case)");
  ver->add_option("--y0", ver_y0, "initial values of the new species")->required();
  ver->add_option("--out", ver_out, "output JSON path");
  ver_flags.attach(ver, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(sim_net, sim_x0, sim_tend, sim_flags, sim_out);
    if (*orb) return run_orbit(orb_net, orb_x0, orb_flags, orb_out, false);
    if (*flo) return run_orbit(flo_net, flo_x0, flo_flags, flo_out, true);
    if (*extc) return run_extend(ext_base, ext_add, ext_eps, ext_eta, ext_out);
    if (*ver)
      return run_verify(ver_base, ver_add, ver_eps, ver_eps_list, ver_eta, eta_opt->count() > 0,
                        ver_y0, ver_flags, ver_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
