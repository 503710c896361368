#ifndef CRNOSC_KINETICS_HPP
#define CRNOSC_KINETICS_HPP

#include <vector>

#include <Eigen/Core>

#include "crnosc/network.hpp"

namespace crnosc {

/// Mass-action rate law machinery for a fixed network, compiled to flat
/// per-reaction term lists for cheap repeated evaluation.
///
/// Net rate of reaction j: k_f * x^reactant_j  -  k_b * x^product_j (the
/// backward term only for reversible reactions). Monomials use integer
/// exponents with the empty-product convention, so species with coefficient 0
/// are never touched and evaluation extends to the boundary of the orthant.
class MassActionSystem {
 public:
  explicit MassActionSystem(const Network& net);

  int species_count() const { return n_; }
  int reaction_count() const { return static_cast<int>(terms_.size()); }
  const Eigen::MatrixXd& stoichiometry() const { return gamma_; }

  /// Unchecked polynomial evaluations (integrator hot path).
  Eigen::VectorXd rates_raw(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd rate_jacobian_raw(const Eigen::VectorXd& x) const;
  Eigen::VectorXd field_raw(const Eigen::VectorXd& x) const { return gamma_ * rates_raw(x); }
  Eigen::MatrixXd field_jacobian_raw(const Eigen::VectorXd& x) const {
    return gamma_ * rate_jacobian_raw(x);
  }

 private:
  struct Monomial {
    double k = 0.0;
    std::vector<std::pair<int, int>> powers;  // (species index, exponent >= 1)
  };
  struct ReactionTerms {
    Monomial forward;
    Monomial backward;  // k == 0 for irreversible reactions
  };

  static double eval(const Monomial& m, const Eigen::VectorXd& x);
  static void add_gradient(const Monomial& m, const Eigen::VectorXd& x, double sign,
                           Eigen::MatrixXd& jac, int row);

  int n_ = 0;
  std::vector<ReactionTerms> terms_;
  Eigen::MatrixXd gamma_;
};

/// v(x): length-r0 net reaction rate vector. Rejects negative concentrations;
/// zeros are allowed (mass-action monomials extend to the boundary).
Eigen::VectorXd rate_vector(const Network& net, const Eigen::VectorXd& x);

/// Analytic derivative of rate_vector, r0 x n. Assembled per-term by the
/// power rule (equivalently diag(w) A diag(1/x) applied to each monomial).
Eigen::MatrixXd rate_jacobian(const Network& net, const Eigen::VectorXd& x);

/// Gamma * v(x).
Eigen::VectorXd vector_field(const Network& net, const Eigen::VectorXd& x);

/// Gamma * Dv(x), n x n.
Eigen::MatrixXd field_jacobian(const Network& net, const Eigen::VectorXd& x);

}  // namespace crnosc

#endif
