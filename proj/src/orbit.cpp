#include "crnosc/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "crnosc/kinetics.hpp"

namespace crnosc {

std::string to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::NondegenerateStable: return "nondegenerate-stable";
    case OrbitClass::NondegenerateUnstable: return "nondegenerate-unstable";
    case OrbitClass::Degenerate: return "degenerate";
    case OrbitClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string to_string(OrbitFailure f) {
  switch (f) {
    case OrbitFailure::NoReturn: return "no-return";
    case OrbitFailure::ConvergedToEquilibrium: return "converged-to-equilibrium";
    case OrbitFailure::MaxReturnsExceeded: return "max-returns-exceeded";
  }
  return "no-return";
}

FloquetResult relative_floquet(const Eigen::MatrixXd& monodromy, const ImageBasis& basis,
                               const OrbitSearchConfig& cfg) {
  if (monodromy.rows() != monodromy.cols() || monodromy.rows() != basis.B.rows())
    throw std::invalid_argument("relative_floquet: basis/monodromy dimension mismatch");

  FloquetResult res;
  Eigen::MatrixXd m_rel = basis.B.transpose() * monodromy * basis.B;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m_rel);
  res.multipliers = es.eigenvalues();

  int trivial = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < res.multipliers.size(); ++i) {
    double d = std::abs(res.multipliers[i] - std::complex<double>(1.0, 0.0));
    if (d < best) {
      best = d;
      trivial = i;
    }
  }
  if (trivial < 0 || best > cfg.trivial_tol)
    throw std::runtime_error(
        "no Floquet multiplier near 1 (closest at distance " + std::to_string(best) +
        "); the monodromy is probably inaccurate");
  res.trivial_index = trivial;

  bool any_outside = false;
  bool any_on_band = false;
  bool all_band_exact = true;
  for (int i = 0; i < res.multipliers.size(); ++i) {
    if (i == trivial) continue;
    double dist = std::abs(std::abs(res.multipliers[i]) - 1.0);
    if (dist <= cfg.unit_circle_tol) {
      any_on_band = true;
      if (dist > 1e-12) all_band_exact = false;
    } else if (std::abs(res.multipliers[i]) > 1.0) {
      any_outside = true;
    }
  }
  if (any_on_band)
    // numerically ON the circle (e.g. identity monodromy) vs merely too close
    // to call
    res.classification = all_band_exact ? OrbitClass::Degenerate : OrbitClass::Undetermined;
  else
    res.classification =
        any_outside ? OrbitClass::NondegenerateUnstable : OrbitClass::NondegenerateStable;
  return res;
}

double spectra_distance(Eigen::VectorXcd a, Eigen::VectorXcd b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int pick = -1;
    for (int j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(a[i] - b[j]);
      if (d < best) {
        best = d;
        pick = j;
      }
    }
    used[pick] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

bool floquet_invariance_check(const Eigen::MatrixXd& monodromy, const Eigen::MatrixXd& A,
                              double tol) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw std::invalid_argument("floquet_invariance_check: singular A");
  Eigen::MatrixXd conj = A * monodromy * lu.inverse();
  Eigen::VectorXcd ea = Eigen::EigenSolver<Eigen::MatrixXd>(monodromy).eigenvalues();
  Eigen::VectorXcd eb = Eigen::EigenSolver<Eigen::MatrixXd>(conj).eigenvalues();
  double scale = std::max(1.0, ea.cwiseAbs().maxCoeff());
  return spectra_distance(ea, eb) < tol * scale;
}

bool floquet_invariance_check(const PeriodicOrbit& orbit, const Eigen::MatrixXd& A, double tol) {
  return floquet_invariance_check(orbit.monodromy, A, tol);
}

double hausdorff_distance(const Eigen::MatrixXd& samples_a, const Eigen::MatrixXd& samples_b,
                          const std::vector<int>& projection) {
  if (samples_a.rows() == 0 || samples_b.rows() == 0)
    throw std::invalid_argument("hausdorff_distance: empty point cloud");
  Eigen::MatrixXd A, B;
  if (projection.empty()) {
    A = samples_a;
    B = samples_b;
  } else {
    A.resize(samples_a.rows(), projection.size());
    B.resize(samples_b.rows(), projection.size());
    for (size_t j = 0; j < projection.size(); ++j) {
      A.col(j) = samples_a.col(projection[j]);
      B.col(j) = samples_b.col(projection[j]);
    }
  }
  auto directed = [](const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
    double worst = 0.0;
    for (int i = 0; i < P.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < Q.rows(); ++j)
        best = std::min(best, (P.row(i) - Q.row(j)).squaredNorm());
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(A, B), directed(B, A));
}

namespace {

struct Section {
  Eigen::VectorXd point;
  Eigen::VectorXd normal;  // unit
};

// Orthonormal basis of {w in im Gamma : normal . w = 0}, the section tangent
// within the stoichiometry class.
Eigen::MatrixXd section_tangent_basis(const ImageBasis& basis, const Eigen::VectorXd& normal) {
  const Eigen::VectorXd u = basis.B.transpose() * normal;  // unit since normal is in im Gamma
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(basis.rank, basis.rank) -
                      (u * u.transpose()) / u.squaredNorm();
  // extract rank-1-deficient orthonormal factor
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeFullU);
  return basis.B * svd.matrixU().leftCols(basis.rank - 1);
}

struct ReturnHit {
  double time = 0.0;
  Eigen::VectorXd state;
  Eigen::MatrixXd fundamental;  // Phi at the hit (empty if not requested)
};

class OrbitSearcher {
 public:
  OrbitSearcher(const FieldFn& field, const JacobianFn& jac, const OrbitSearchConfig& cfg,
                const ImageBasis& basis)
      : field_(field), jac_(jac), cfg_(cfg), basis_(basis) {}

  PeriodicOrbit run(const Eigen::VectorXd& x0);

 private:
  double field_scale(const Eigen::VectorXd& x) const { return 1.0 + x.norm(); }

  bool near_equilibrium(const Eigen::VectorXd& x) const {
    return field_(x).norm() < 1e-9 * field_scale(x);
  }

  // First directed section crossing with time > t_min; integrates in chunks
  // of `chunk` time units up to t_max. Returns false when none found.
  bool first_return(const Eigen::VectorXd& from, const Section& sec, double t_min, double t_max,
                    bool with_variational, ReturnHit& hit, Eigen::VectorXd* final_state = nullptr);

  const FieldFn& field_;
  const JacobianFn& jac_;
  OrbitSearchConfig cfg_;
  ImageBasis basis_;
};

bool OrbitSearcher::first_return(const Eigen::VectorXd& from, const Section& sec, double t_min,
                                 double t_max, bool with_variational, ReturnHit& hit,
                                 Eigen::VectorXd* final_state) {
  const double chunk = std::max(1.0, t_max / 8.0);
  Eigen::VectorXd x = from;
  Eigen::MatrixXd phi_acc;
  const int n = static_cast<int>(from.size());
  if (with_variational) phi_acc = Eigen::MatrixXd::Identity(n, n);

  double t_base = 0.0;
  while (t_base < t_max) {
    double t_span = std::min(chunk, t_max - t_base);
    Trajectory traj;
    FundamentalPath path;
    if (with_variational) {
      std::tie(traj, path) = integrate_with_variational(field_, jac_, x, t_span, cfg_.integrator);
    } else {
      traj = integrate(field_, x, t_span, cfg_.integrator);
    }
    auto hits = find_crossings(traj, sec.point, sec.normal, +1);
    for (const auto& [tc, xc] : hits) {
      if (t_base + tc <= t_min) continue;
      hit.time = t_base + tc;
      hit.state = xc;
      if (with_variational) hit.fundamental = path.at(tc) * phi_acc;
      return true;
    }
    t_base += t_span;
    x = traj.back();
    if (with_variational) phi_acc = path.matrices.back() * phi_acc;
    if (final_state) *final_state = x;
  }
  if (final_state) *final_state = x;
  return false;
}

PeriodicOrbit OrbitSearcher::run(const Eigen::VectorXd& x0) {
  // 1. burn in the transient
  Eigen::VectorXd xa = cfg_.burn_in > 0.0 ? flow(field_, x0, cfg_.burn_in, cfg_.integrator) : x0;
  if (near_equilibrium(xa))
    throw OrbitSearchError(OrbitFailure::ConvergedToEquilibrium,
                           "trajectory converged to an equilibrium during burn-in");

  // 2. section through the burned-in state, normal along the flow
  Section sec;
  sec.point = xa;
  sec.normal = field_(xa).normalized();

  // 3. pre-scan for a period estimate
  double horizon = std::max(20.0, cfg_.burn_in / 2.0);
  ReturnHit hit;
  Eigen::VectorXd wander;
  if (!first_return(xa, sec, 1e-9, horizon, false, hit, &wander)) {
    if (!first_return(xa, sec, 1e-9, 4.0 * horizon, false, hit, &wander)) {
      if (near_equilibrium(wander))
        throw OrbitSearchError(OrbitFailure::ConvergedToEquilibrium,
                               "trajectory converged to an equilibrium; no returns to the section");
      throw OrbitSearchError(OrbitFailure::NoReturn,
                             "trajectory did not return to the Poincare section");
    }
  }
  double t_est = hit.time;
  Eigen::VectorXd x = hit.state;

  // 4. return-map iteration: Newton on the in-class section coordinates,
  //    damped, with plain fixed-point fallback
  const Eigen::MatrixXd S = section_tangent_basis(basis_, sec.normal);
  double err_prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  double period = t_est;
  int returns = 0;
  for (; returns < cfg_.max_returns; ++returns) {
    ReturnHit r;
    if (!first_return(x, sec, 0.5 * t_est, 4.0 * t_est, true, r))
      throw OrbitSearchError(OrbitFailure::NoReturn,
                             "return map lost the orbit (no section crossing)");
    Eigen::VectorXd gap = r.state - x;
    double err = gap.norm();
    period = r.time;
    t_est = 0.5 * (t_est + r.time);
    if (err <= cfg_.newton_tol * field_scale(x)) {
      converged = true;
      break;
    }

    bool newton_ok = false;
    if (S.cols() > 0) {
      // derivative of the return map on the section
      Eigen::VectorXd fP = field_(r.state);
      double fn = sec.normal.dot(fP);
      if (std::abs(fn) > 1e-12 * fP.norm()) {
        Eigen::MatrixXd DP = (Eigen::MatrixXd::Identity(x.size(), x.size()) -
                              fP * sec.normal.transpose() / fn) *
                             r.fundamental;
        Eigen::MatrixXd A = S.transpose() * DP * S -
                            Eigen::MatrixXd::Identity(S.cols(), S.cols());
        Eigen::VectorXd rhs = S.transpose() * gap;
        Eigen::VectorXd d = A.fullPivLu().solve(-rhs);
        for (double damp = 1.0; damp >= 0.25; damp *= 0.5) {
          Eigen::VectorXd cand = x + damp * (S * d);
          ReturnHit probe;
          try {
            if (!first_return(cand, sec, 0.5 * t_est, 4.0 * t_est, false, probe)) continue;
          } catch (const IntegrationError&) {
            continue;  // candidate escaped the domain; damp harder
          }
          if ((probe.state - cand).norm() < err) {
            x = cand;
            newton_ok = true;
            break;
          }
        }
      }
    }
    if (!newton_ok) x = r.state;  // fixed-point fallback
    err_prev = err;
  }
  if (!converged)
    throw OrbitSearchError(OrbitFailure::MaxReturnsExceeded,
                           "return map did not converge within max_returns=" +
                               std::to_string(cfg_.max_returns) +
                               " (last residual " + std::to_string(err_prev) + ")");

  // 5. final pass: monodromy, refined period and samples over one loop
  auto [traj, path] = integrate_with_variational(field_, jac_, x, 1.25 * period, cfg_.integrator);
  auto hits = find_crossings(traj, sec.point, sec.normal, +1);
  double T = period;
  for (const auto& [tc, xc] : hits)
    if (tc > 0.5 * period) {
      T = tc;
      break;
    }

  PeriodicOrbit orbit;
  orbit.anchor = x;
  orbit.period = T;
  orbit.monodromy = path.at(T);
  const int n = static_cast<int>(x.size());
  orbit.samples.resize(cfg_.sample_count, n);
  for (int i = 0; i < cfg_.sample_count; ++i)
    orbit.samples.row(i) = traj.at(T * static_cast<double>(i) / cfg_.sample_count).transpose();

  double return_err = (traj.at(T) - x).norm();
  if (return_err > cfg_.return_tol_rel * std::max(1.0, x.norm()))
    throw OrbitSearchError(OrbitFailure::MaxReturnsExceeded,
                           "converged anchor fails the return tolerance (residual " +
                               std::to_string(return_err) + ")");

  // a closed loop of zero extent is an equilibrium in disguise
  double extent = 0.0;
  for (int i = 0; i < orbit.samples.rows(); ++i)
    extent = std::max(extent, (orbit.samples.row(i).transpose() - x).norm());
  if (extent < 1e-6 * field_scale(x))
    throw OrbitSearchError(OrbitFailure::ConvergedToEquilibrium,
                           "returns contracted to a point (equilibrium)");

  FloquetResult fr = relative_floquet(orbit.monodromy, basis_, cfg_);
  orbit.multipliers_relative = fr.multipliers;
  orbit.classification = fr.classification;
  return orbit;
}

}  // namespace

PeriodicOrbit find_periodic_orbit(const FieldFn& field, const JacobianFn& jacobian,
                                  const Eigen::VectorXd& x0, const OrbitSearchConfig& cfg,
                                  const ImageBasis& basis) {
  return OrbitSearcher(field, jacobian, cfg, basis).run(x0);
}

PeriodicOrbit find_periodic_orbit(const Network& net, const Eigen::VectorXd& x0,
                                  const OrbitSearchConfig& cfg) {
  MassActionSystem sys(net);
  FieldFn f = [sys](const Eigen::VectorXd& x) { return sys.field_raw(x); };
  JacobianFn j = [sys](const Eigen::VectorXd& x) { return sys.field_jacobian_raw(x); };
  OrbitSearchConfig c = cfg;
  c.integrator.positive_prefix = net.species_count();
  return find_periodic_orbit(f, j, x0, c, rank_and_image(net.stoichiometric_matrix()));
}

}  // namespace crnosc
