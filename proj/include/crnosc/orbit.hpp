#ifndef CRNOSC_ORBIT_HPP
#define CRNOSC_ORBIT_HPP

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crnosc/network.hpp"
#include "crnosc/odeint.hpp"
#include "crnosc/stoich.hpp"

namespace crnosc {

enum class OrbitClass {
  NondegenerateStable,
  NondegenerateUnstable,
  Degenerate,
  Undetermined,
};

std::string to_string(OrbitClass c);

struct OrbitSearchConfig {
  double burn_in = 150.0;    // transient time before anchoring the section
  int max_returns = 50;      // return-map iterations before giving up
  double newton_tol = 1e-10; // convergence of ||P(x) - x|| relative to 1+||x||
  double trivial_tol = 1e-4; // band around 1 for the trivial multiplier
  double unit_circle_tol = 1e-3;
  int sample_count = 512;
  double return_tol_rel = 1e-7;  // flow(anchor, T) must return this close
  IntegratorConfig integrator{};
};

struct PeriodicOrbit {
  Eigen::VectorXd anchor;
  double period = 0.0;
  Eigen::MatrixXd samples;    // sample_count x n, equal time spacing over one period
  Eigen::MatrixXd monodromy;  // n x n fundamental matrix over one period
  Eigen::VectorXcd multipliers_relative;  // r values, trivial one included
  OrbitClass classification = OrbitClass::Undetermined;
};

enum class OrbitFailure {
  NoReturn,
  ConvergedToEquilibrium,
  MaxReturnsExceeded,
};

class OrbitSearchError : public std::runtime_error {
 public:
  OrbitSearchError(OrbitFailure kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  OrbitFailure kind() const { return kind_; }

 private:
  OrbitFailure kind_;
};

std::string to_string(OrbitFailure f);

struct FloquetResult {
  Eigen::VectorXcd multipliers;  // eigenvalues of B^t M B (r values)
  int trivial_index = -1;        // position of the multiplier nearest 1
  OrbitClass classification = OrbitClass::Undetermined;
};

/// Multipliers of the monodromy restricted to the stoichiometric subspace
/// (valid because the flow maps cosets of im Gamma to themselves), with the
/// trivial multiplier identified and the rest classified against the unit
/// circle.
FloquetResult relative_floquet(const Eigen::MatrixXd& monodromy, const ImageBasis& basis,
                               const OrbitSearchConfig& cfg = {});

using FieldFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Poincare-section orbit search: burn in, anchor a section normal to the
/// field, iterate the return map with Newton acceleration on the section
/// coordinates (restricted to the class basis), then recompute monodromy,
/// samples and Floquet data over one converged period.
PeriodicOrbit find_periodic_orbit(const FieldFn& field, const JacobianFn& jacobian,
                                  const Eigen::VectorXd& x0, const OrbitSearchConfig& cfg,
                                  const ImageBasis& basis);

/// Network overload: mass-action field/Jacobian, image basis from Gamma,
/// positivity guard on all species.
PeriodicOrbit find_periodic_orbit(const Network& net, const Eigen::VectorXd& x0,
                                  const OrbitSearchConfig& cfg = {});

/// True iff eig(A M A^-1) matches eig(M) as multisets within tol
/// (similarity invariance of Floquet spectra).
bool floquet_invariance_check(const Eigen::MatrixXd& monodromy, const Eigen::MatrixXd& A,
                              double tol = 1e-7);
bool floquet_invariance_check(const PeriodicOrbit& orbit, const Eigen::MatrixXd& A,
                              double tol = 1e-7);

/// Greedy multiset match of two complex spectra; max pairing distance.
double spectra_distance(Eigen::VectorXcd a, Eigen::VectorXcd b);

/// Discrete symmetric Hausdorff distance between two point clouds (rows),
/// optionally projected onto a coordinate subset.
double hausdorff_distance(const Eigen::MatrixXd& samples_a, const Eigen::MatrixXd& samples_b,
                          const std::vector<int>& projection = {});

}  // namespace crnosc

#endif
