// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Thresholds are fixed here, not tunable from outside.

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "crnosc/inheritance.hpp"
#include "crnosc/kinetics.hpp"
#include "crnosc/odeint.hpp"
#include "crnosc/orbit.hpp"
#include "crnosc/stoich.hpp"

using namespace crnosc;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Shared {
  Network base;
  Extension ext;
  PeriodicOrbit base_orbit;
  std::vector<InheritanceReport> sweep;  // eps = eta = 0.2, 0.1, 0.05
};

bool check(bool ok, const std::string& what, std::string& detail) {
  if (!ok) detail += (detail.empty() ? "" : "; ") + what;
  return ok;
}

// --- criterion 1 -----------------------------------------------------------
bool criterion_base_orbit(Shared& sh, std::string& detail) {
  auto t0 = Clock::now();
  sh.base_orbit = find_periodic_orbit(sh.base, Eigen::Vector3d(1, 1, 1));
  double elapsed = seconds_since(t0);

  bool ok = check(sh.base_orbit.classification == OrbitClass::NondegenerateStable,
                  "classification is not nondegenerate-stable", detail);
  double trivial_gap = 1e9;
  int inside = 0;
  for (int i = 0; i < sh.base_orbit.multipliers_relative.size(); ++i) {
    std::complex<double> mu = sh.base_orbit.multipliers_relative[i];
    trivial_gap = std::min(trivial_gap, std::abs(mu - std::complex<double>(1, 0)));
    if (std::abs(mu) < 1.0 - 1e-3) ++inside;
  }
  ok &= check(trivial_gap < 1e-4, "trivial multiplier off by " + std::to_string(trivial_gap),
              detail);
  ok &= check(inside == 2, "expected both nontrivial multipliers inside the unit circle", detail);
  ok &= check(elapsed < 30.0, "runtime " + std::to_string(elapsed) + " s exceeds 30 s", detail);

  std::ostringstream os;
  os << "period " << std::setprecision(8) << sh.base_orbit.period << ", " << std::setprecision(3)
     << elapsed << " s";
  if (detail.empty()) detail = os.str();
  return ok;
}

// --- criterion 2 -----------------------------------------------------------
bool criterion_rank_gate(Shared& sh, std::string& detail) {
  sh.ext = Extension::build(sh.base, testnets::kAdditionsUVW);
  Eigen::MatrixXi beta(3, 2);
  beta << 1, -1, 1, 2, 0, 1;
  bool ok = check(sh.ext.beta() == beta, "beta differs from the worked example", detail);
  ok &= check(rank_and_image(sh.ext.beta()).rank == 2, "rank(beta) != 2", detail);

  bool rejected = false;
  try {
    Extension::build(sh.base, "X + W1 <-> W1 ; kf = 1, kr = 1");
  } catch (const ExtensionError& e) {
    rejected = e.kind() == ExtensionError::Kind::RankDeficient;
  }
  ok &= check(rejected, "catalysis-only addition was not rejected as RankDeficient", detail);
  if (detail.empty()) detail = "beta = [1 -1; 1 2; 0 1], rank 2; degenerate addition refused";
  return ok;
}

// --- criterion 3 -----------------------------------------------------------
bool criterion_rate_schedule(Shared& sh, std::string& detail) {
  RateSchedule s = synthesize_rates(sh.ext, 0.2, 0.2);
  bool ok = check(s.sigma_forward(0) == 0 && s.sigma_forward(1) == 1 &&
                      s.sigma_backward(0) == 2 && s.sigma_backward(1) == 2,
                  "schedule exponents differ from (0,2),(1,2)", detail);
  ok &= check(s.k_forward(0) == 5.0 && s.k_backward(0) == 125.0 && s.k_forward(1) == 25.0 &&
                  s.k_backward(1) == 125.0,
              "constants differ from (5, 125, 25, 125)", detail);
  if (detail.empty())
    detail = "kf = 1/eps * eta^-(0,1); kr = 1/eps * eta^-(2,2); values (5, 125, 25, 125)";
  return ok;
}

// --- criterion 4 -----------------------------------------------------------
bool criterion_inheritance(Shared& sh, std::string& detail) {
  auto t0 = Clock::now();
  InheritanceReport rep =
      verify_inheritance(sh.base_orbit, sh.ext, 0.2, 0.2, Eigen::Vector3d(0, 0, 1));
  double elapsed = seconds_since(t0);
  sh.sweep.push_back(rep);

  bool ok = check(rep.orbit.has_value(), "no orbit found: " + rep.failure, detail);
  if (!rep.orbit) return false;
  ok &= check(rep.orbit->classification == OrbitClass::NondegenerateStable,
              "new orbit is not nondegenerate-stable", detail);
  ok &= check(rep.orbit->multipliers_relative.size() == 5, "relative spectrum is not 5-dim",
              detail);
  int trivial = 0;
  for (int i = 0; i < rep.orbit->multipliers_relative.size(); ++i)
    if (std::abs(rep.orbit->multipliers_relative[i] - std::complex<double>(1, 0)) < 1e-4)
      ++trivial;
  ok &= check(trivial == 1, "expected exactly one trivial relative multiplier", detail);

  // conserved quantity 3W + U - V stays at 3 over one sampled period; the
  // report's drift covers the transient as well (in units of (3W+U-V)/3)
  const int n = sh.base.species_count();
  double worst = 0.0;
  for (int i = 0; i < rep.orbit->samples.rows(); ++i) {
    double u = rep.orbit->samples(i, n), v = rep.orbit->samples(i, n + 1),
           w = rep.orbit->samples(i, n + 2);
    worst = std::max(worst, std::abs(3 * w + u - v - 3.0));
  }
  ok &= check(worst < 1e-5, "3W+U-V drifts by " + std::to_string(worst), detail);
  ok &= check(3.0 * rep.conservation_drift < 1e-5,
              "full-run conservation drift " + std::to_string(3 * rep.conservation_drift),
              detail);

  double u_p2p = 0, v_p2p = 0;
  for (const SpeciesRange& r : rep.new_species_ranges) {
    if (r.name == "U") u_p2p = r.max - r.min;
    if (r.name == "V") v_p2p = r.max - r.min;
  }
  ok &= check(u_p2p < 0.5 && v_p2p < 0.5, "U/V peak-to-peak too large", detail);
  ok &= check(rep.hausdorff_old_species < 0.5,
              "hausdorff " + std::to_string(rep.hausdorff_old_species), detail);
  ok &= check(elapsed < 120.0, "runtime " + std::to_string(elapsed) + " s exceeds 2 min", detail);

  if (detail.empty()) {
    std::ostringstream os;
    os << "stable, hausdorff " << std::setprecision(3) << rep.hausdorff_old_species << ", U p2p "
       << u_p2p << ", V p2p " << v_p2p << ", drift " << std::setprecision(2)
       << 3 * rep.conservation_drift << ", " << std::setprecision(3) << elapsed << " s";
    detail = os.str();
  }
  return ok;
}

// --- criterion 5 -----------------------------------------------------------
bool criterion_trend(Shared& sh, std::string& detail) {
  for (double eps : {0.1, 0.05})
    sh.sweep.push_back(
        verify_inheritance(sh.base_orbit, sh.ext, eps, eps, Eigen::Vector3d(0, 0, 1)));

  std::vector<double> dh, amp;
  for (const InheritanceReport& rep : sh.sweep) {
    if (!rep.orbit) {
      detail = "a sweep case found no orbit";
      return false;
    }
    dh.push_back(rep.hausdorff_old_species);
    double a = 0;
    for (const SpeciesRange& r : rep.new_species_ranges)
      if (r.name == "U" || r.name == "V") a = std::max(a, r.max - r.min);
    amp.push_back(a);
  }
  bool ok = true;
  for (size_t i = 1; i < dh.size(); ++i)
    ok &= check(dh[i] <= 1.2 * dh[i - 1], "hausdorff not non-increasing within 20%", detail);
  for (size_t i = 1; i < amp.size(); ++i)
    ok &= check(amp[i] <= 1.2 * amp[i - 1], "max(U,V) amplitude not decreasing within 20%",
                detail);
  if (detail.empty()) {
    std::ostringstream os;
    os << std::setprecision(3) << "hausdorff " << dh[0] << " -> " << dh[1] << " -> " << dh[2]
       << "; max(U,V) amplitude " << amp[0] << " -> " << amp[1] << " -> " << amp[2];
    detail = os.str();
  }
  return ok;
}

// --- criterion 6 -----------------------------------------------------------
bool criterion_theta(Shared& sh, std::string& detail) {
  std::vector<Eigen::VectorXd> zs;
  int stride = static_cast<int>(sh.base_orbit.samples.rows()) / 16;
  for (int i = 0; i < 16; ++i) zs.push_back(sh.base_orbit.samples.row(i * stride));

  std::vector<double> etas{1e-2, 1e-3, 1e-4};
  std::vector<double> cs;
  bool ok = true;
  for (double eta : etas) {
    double worst_gap = 0.0, worst_res = 0.0;
    for (const Eigen::VectorXd& z : zs) {
      Eigen::VectorXd y = slow_manifold_point(sh.ext, z, eta);
      Eigen::VectorXd seed =
          eta * (sh.ext.gamma() * z.array().log().matrix()).array().exp().matrix();
      worst_gap = std::max(worst_gap, (y - seed).norm());
      worst_res = std::max(worst_res, graph_residual(sh.ext, z, y, eta).lpNorm<Eigen::Infinity>());
      worst_res =
          std::max(worst_res, fast_rate_residual(sh.ext, z, y, eta).lpNorm<Eigen::Infinity>());
    }
    ok &= check(worst_res <= 1e-8, "residual " + std::to_string(worst_res) + " above 1e-8",
                detail);
    cs.push_back(worst_gap / (eta * eta));
  }
  double cmin = *std::min_element(cs.begin(), cs.end());
  double cmax = *std::max_element(cs.begin(), cs.end());
  ok &= check(cmax <= 3.0 * cmin, "C = |theta - eta z^gamma| / eta^2 unstable across eta", detail);
  if (detail.empty()) {
    std::ostringstream os;
    os << std::setprecision(3) << "C(eta) = " << cs[0] << ", " << cs[1] << ", " << cs[2]
       << " (ratio " << cmax / cmin << ")";
    detail = os.str();
  }
  return ok;
}

// --- criterion 7 -----------------------------------------------------------
bool criterion_wbar(Shared& sh, std::string& detail) {
  ReducedJacobian unit = reduced_jacobian_limit(sh.ext, Eigen::Vector3d(1, 1, 1));
  Eigen::MatrixXd bh = sh.ext.beta_hat().cast<double>();
  bool ok = check((unit.wbar - (-bh * bh.transpose())).cwiseAbs().maxCoeff() == 0.0,
                  "Wbar(1) != -beta_hat beta_hat^t exactly", detail);

  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double worst_real = -1e300, worst_imag = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector3d z(std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)));
    ReducedJacobian rj = reduced_jacobian_limit(sh.ext, z);
    double rho = rj.eigenvalues.cwiseAbs().maxCoeff();
    for (int i = 0; i < rj.eigenvalues.size(); ++i) {
      worst_imag = std::max(worst_imag, std::abs(rj.eigenvalues[i].imag()) / rho);
      worst_real = std::max(worst_real, rj.eigenvalues[i].real());
    }
  }
  ok &= check(worst_imag < 1e-9, "eigenvalues not numerically real", detail);
  ok &= check(worst_real < 0.0, "an eigenvalue reached the right half-plane", detail);
  if (detail.empty()) {
    std::ostringstream os;
    os << std::setprecision(3) << "max real part " << worst_real << " over 50 points; Wbar(1) = "
       << "-beta_hat beta_hat^t exactly";
    detail = os.str();
  }
  return ok;
}

// --- criterion 8 -----------------------------------------------------------
bool criterion_properties(Shared& sh, std::string& detail) {
  bool ok = true;

  // similarity invariance of Floquet spectra, 20 random conjugations
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd raw(3, 3);
    for (int i = 0; i < 9; ++i) raw(i / 3, i % 3) = g(rng);
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ();
    Eigen::Vector3d d(scale(rng), scale(rng), scale(rng));
    if (!floquet_invariance_check(sh.base_orbit, q * d.asDiagonal(), 1e-7)) {
      ok = check(false, "similarity conjugation changed the spectrum", detail);
      break;
    }
  }

  // conservation drift below 100 x rtol on simulated trajectories
  const InheritanceReport& rep = sh.sweep.front();
  MassActionSystem sys(rep.extended);
  IntegratorConfig icfg;
  icfg.positive_prefix = rep.extended.species_count();
  ConservationLaws laws = conservation_laws(rep.extended.stoichiometric_matrix());
  Eigen::VectorXd start(6);
  start << 1, 1, 1, 0.2, 0.1, 1;
  Trajectory traj = integrate([&sys](const Eigen::VectorXd& v) { return sys.field_raw(v); },
                              start, 200.0, icfg);
  Eigen::VectorXd c0 = laws.L * traj.front();
  double drift = 0.0;
  for (const Eigen::VectorXd& x : traj.states())
    drift = std::max(drift, (laws.L * x - c0).lpNorm<Eigen::Infinity>());
  ok &= check(drift < 100.0 * icfg.rtol, "conservation drift " + std::to_string(drift), detail);

  // analytic Jacobians vs central finite differences
  std::uniform_real_distribution<double> upos(0.2, 2.5);
  const std::vector<const Network*> nets = {&sh.base, &rep.extended};
  for (const Network* net : nets) {
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd x(net->species_count());
      for (int i = 0; i < x.size(); ++i) x[i] = upos(rng);
      Eigen::MatrixXd jac = field_jacobian(*net, x);
      Eigen::MatrixXd fd(jac.rows(), jac.cols());
      for (int i = 0; i < x.size(); ++i) {
        double h = 1e-6 * x[i];
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd.col(i) = (vector_field(*net, xp) - vector_field(*net, xm)) / (2 * h);
      }
      if ((fd - jac).norm() > 1e-6 * jac.norm()) {
        ok = check(false, "analytic Jacobian deviates from finite differences", detail);
        break;
      }
    }
  }

  // spectrum split: eig(M) = eig(M_rel) + {1}^(n-r)
  const PeriodicOrbit& orbit = *rep.orbit;
  Eigen::VectorXcd full = Eigen::EigenSolver<Eigen::MatrixXd>(orbit.monodromy).eigenvalues();
  Eigen::VectorXcd expected(full.size());
  expected.head(orbit.multipliers_relative.size()) = orbit.multipliers_relative;
  for (int i = static_cast<int>(orbit.multipliers_relative.size()); i < full.size(); ++i)
    expected(i) = std::complex<double>(1, 0);
  ok &= check(spectra_distance(full, expected) < 1e-4,
              "full spectrum is not relative spectrum + transverse ones", detail);

  if (detail.empty())
    detail = "similarity invariance, conservation drift, FD Jacobians, spectrum split all hold";
  return ok;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<bool(Shared&, std::string&)> run;
  };
  const std::vector<Entry> criteria = {
      {"base oscillator orbit found and linearly stable", criterion_base_orbit},
      {"rank gate on added reactions", criterion_rank_gate},
      {"eps/eta rate schedule", criterion_rate_schedule},
      {"inheritance at eps = eta = 0.2", criterion_inheritance},
      {"asymptotic trend over eps = eta = 0.2, 0.1, 0.05", criterion_trend},
      {"slow-manifold theta diagnostics", criterion_theta},
      {"Wbar Hurwitz stability", criterion_wbar},
      {"property suites", criterion_properties},
  };

  Shared sh;
  sh.base = parse_network(testnets::kOscillator3);
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(sh, detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": " << criteria[i].name
              << " -- " << detail << "\n";
    if (!ok) ++failures;
  }
  std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed"
                              : "ACCEPTANCE: " + std::to_string(failures) + " criterion(s) failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
