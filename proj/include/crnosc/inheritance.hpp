#ifndef CRNOSC_INHERITANCE_HPP
#define CRNOSC_INHERITANCE_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crnosc/network.hpp"
#include "crnosc/orbit.hpp"

namespace crnosc {

class ExtensionError : public std::runtime_error {
 public:
  enum class Kind { RankDeficient, NotReversible, NoNewSpecies, NoAddedReactions };

  ExtensionError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// A base network extended by m reversible reactions over the base species
/// and m+k new species. Holds the reactant/product coefficient matrices
///   a, a' (n x m, base species) and b, b' ((m+k) x m, new species),
/// their net changes alpha = a'-a and beta = b'-b, and a permutation of the
/// new species placing m rows of beta that form a nonsingular beta_hat first.
/// Construction is refused unless rank(beta) = m.
class Extension {
 public:
  /// added_text: reaction-format text; names matching base species bind to
  /// them, unknown names become new species in first-appearance order. All
  /// added reactions must be reversible; rate constants in the text are
  /// placeholders (synthesize_rates supplies the real ones).
  static Extension build(const Network& base, std::string_view added_text);

  const Network& base() const { return base_; }
  /// Added reactions with complexes indexed over base + permuted new species.
  const std::vector<Reaction>& added() const { return added_; }
  /// New species names in permuted order (the extended network's order).
  const std::vector<std::string>& new_species() const { return new_species_; }
  const std::vector<int>& permutation() const { return perm_; }

  int n() const { return base_.species_count(); }
  int m() const { return static_cast<int>(added_.size()); }
  int k() const { return static_cast<int>(new_species_.size()) - m(); }

  // integer matrices; rows of b/b'/beta follow the permuted new-species order
  const Eigen::MatrixXi& a() const { return a_; }
  const Eigen::MatrixXi& a_prime() const { return a_prime_; }
  const Eigen::MatrixXi& b() const { return b_; }
  const Eigen::MatrixXi& b_prime() const { return b_prime_; }
  const Eigen::MatrixXi& alpha() const { return alpha_; }
  const Eigen::MatrixXi& beta() const { return beta_; }
  Eigen::MatrixXi beta_hat() const { return beta_.topRows(m()); }
  Eigen::MatrixXi beta_hathat() const { return beta_.bottomRows(k()); }
  Eigen::MatrixXi b_hat() const { return b_.topRows(m()); }
  Eigen::MatrixXi b_hat_prime() const { return b_prime_.topRows(m()); }

  /// gamma = -(alpha beta_hat^-1)^t, m x n.
  const Eigen::MatrixXd& gamma() const { return gamma_; }
  /// delta = -(beta_hathat beta_hat^-1)^t, m x k (empty when k = 0).
  const Eigen::MatrixXd& delta() const { return delta_; }
  /// alpha * beta_hat^-1, n x m (the z = x - alpha beta_hat^-1 y_hat factor).
  const Eigen::MatrixXd& alpha_beta_hat_inv() const { return alpha_bhinv_; }

 private:
  Network base_;
  std::vector<Reaction> added_;
  std::vector<std::string> new_species_;
  std::vector<int> perm_;  // perm_[i] = first-appearance index of permuted species i
  Eigen::MatrixXi a_, a_prime_, b_, b_prime_, alpha_, beta_;
  Eigen::MatrixXd gamma_, delta_, alpha_bhinv_;
};

inline Extension build_extension(const Network& base, std::string_view added_text) {
  return Extension::build(base, added_text);
}

/// Mass-action constants realizing the singular-perturbation schedule: the
/// net rate of added reaction i equals (1/eps) * f_i(x, y, eta) where
///   k_forward[i]  = eps^-1 * eta^-(column sum i of b_hat),
///   k_backward[i] = eps^-1 * eta^-(column sum i of b_hat').
struct RateSchedule {
  double epsilon = 0.0;
  double eta = 0.0;
  Eigen::VectorXi sigma_forward;   // exponents of eta^-1 in k_forward
  Eigen::VectorXi sigma_backward;  // exponents of eta^-1 in k_backward
  Eigen::VectorXd k_forward;
  Eigen::VectorXd k_backward;
};

RateSchedule synthesize_rates(const Extension& ext, double epsilon, double eta);

/// Network over n+m+k species (base order, then permuted new species) whose
/// stoichiometric matrix is the block matrix [[Gamma, alpha], [0, beta]].
Network extended_network(const Extension& ext, const RateSchedule& sched);

/// Scaled net rate of the added reactions on the constraint slice
/// (conserved combination fixed at 1):
///   f_*(z, y_hat, eta) with x = z + alpha beta_hat^-1 y_hat,
///   y = (y_hat, 1 - delta^t y_hat).
Eigen::VectorXd fast_rate_residual(const Extension& ext, const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& y_hat, double eta);

/// Fixed-point form with the same positive zero set:
///   g_*(z, y_hat, eta) = y_hat - eta x^gamma o (1 - delta^t y_hat)^delta.
Eigen::VectorXd graph_residual(const Extension& ext, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& y_hat, double eta);

/// Solves g_*(z, y_hat, eta) = 0 by Newton from the first-order seed
/// eta * z^gamma; the returned y_hat is strictly positive and satisfies
/// |f_*| <= 1e-8 componentwise. Fails when eta is too large for the seed.
Eigen::VectorXd slow_manifold_point(const Extension& ext, const Eigen::VectorXd& z, double eta);

struct ReducedJacobian {
  Eigen::MatrixXd wbar;          // -beta_hat diag(T(z,0)) beta_hat^t diag(1/z^gamma)
  Eigen::VectorXcd eigenvalues;  // provably real and negative for z >> 0
};

/// W-bar(z, 0): the eta->0 limit of the scaled fast-subsystem Jacobian on the
/// slow manifold, with T(z,0) = z^{a^t} o z^{b_hat^t gamma}.
ReducedJacobian reduced_jacobian_limit(const Extension& ext, const Eigen::VectorXd& z);

/// Bundled slow-manifold machinery of an extension: the coefficient matrices
/// gamma and delta plus pointwise evaluators for theta and W-bar.
class SlowManifoldDiagnostics {
 public:
  explicit SlowManifoldDiagnostics(Extension ext) : ext_(std::move(ext)) {}

  const Eigen::MatrixXd& gamma() const { return ext_.gamma(); }
  const Eigen::MatrixXd& delta() const { return ext_.delta(); }

  /// theta(z, eta): positive zero of g_*; theta(z, 0) = 0 identically.
  Eigen::VectorXd theta(const Eigen::VectorXd& z, double eta) const {
    if (eta == 0.0) return Eigen::VectorXd::Zero(ext_.m());
    return slow_manifold_point(ext_, z, eta);
  }
  ReducedJacobian wbar(const Eigen::VectorXd& z) const {
    return reduced_jacobian_limit(ext_, z);
  }

 private:
  Extension ext_;
};

struct ZyCoordinates {
  Eigen::VectorXd z;          // x - alpha beta_hat^-1 y_hat
  Eigen::VectorXd y_hat;      // first m new-species coordinates (permuted order)
  Eigen::VectorXd conserved;  // delta^t y_hat + y_hathat, constant along trajectories
};

/// y is in the extended network's new-species order (permuted).
ZyCoordinates to_zy_coordinates(const Extension& ext, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y);

struct SpeciesRange {
  std::string name;
  double min = 0.0;
  double max = 0.0;
};

struct InheritanceReport {
  int beta_rank = 0;
  int m = 0;
  bool rank_ok = false;
  std::vector<int> permutation;
  RateSchedule rates;
  Network extended;

  std::optional<PeriodicOrbit> orbit;  // empty on failure
  std::string failure;                 // failure mode when no orbit

  double hausdorff_old_species = 0.0;      // base-species projection vs base orbit
  std::vector<SpeciesRange> new_species_ranges;
  double conservation_drift = 0.0;         // max |delta^t y_hat + y_hathat - value at start|

  bool stable() const {
    return orbit && orbit->classification == OrbitClass::NondegenerateStable;
  }
};

/// The end-to-end check: synthesize rates at (epsilon, eta), simulate the
/// extended network from (base anchor, y0), locate the new orbit, classify it
/// relative to the extended stoichiometric subspace, and measure proximity to
/// the base orbit. Orbit-search failures are recorded in the report rather
/// than thrown.
InheritanceReport verify_inheritance(const PeriodicOrbit& base_orbit, const Extension& ext,
                                     double epsilon, double eta, const Eigen::VectorXd& y0,
                                     const OrbitSearchConfig& cfg = {});

}  // namespace crnosc

#endif
