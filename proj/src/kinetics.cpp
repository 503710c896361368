#include "crnosc/kinetics.hpp"

#include <string>

namespace crnosc {

namespace {

void check_nonnegative(const Eigen::VectorXd& x, const Network& net) {
  if (x.size() != net.species_count())
    throw std::invalid_argument("state length does not match species count");
  for (int i = 0; i < x.size(); ++i)
    if (x[i] < 0.0)
      throw std::domain_error("nonpositive concentration for species '" + net.species_name(i) +
                              "'");
}

}  // namespace

MassActionSystem::MassActionSystem(const Network& net) : n_(net.species_count()) {
  gamma_ = net.stoichiometric_matrix().cast<double>();
  terms_.reserve(net.reaction_count());
  for (const Reaction& r : net.reactions()) {
    ReactionTerms t;
    t.forward.k = r.k_forward;
    for (const auto& [i, c] : r.reactant.coefficients()) t.forward.powers.emplace_back(i, c);
    if (r.reversible) {
      t.backward.k = r.k_backward;
      for (const auto& [i, c] : r.product.coefficients()) t.backward.powers.emplace_back(i, c);
    }
    terms_.push_back(std::move(t));
  }
}

double MassActionSystem::eval(const Monomial& m, const Eigen::VectorXd& x) {
  double v = m.k;
  for (const auto& [i, p] : m.powers) {
    double b = x[i];
    for (int q = 0; q < p; ++q) v *= b;
  }
  return v;
}

void MassActionSystem::add_gradient(const Monomial& m, const Eigen::VectorXd& x, double sign,
                                    Eigen::MatrixXd& jac, int row) {
  // d/dx_i (k prod x^p) = k p_i x_i^{p_i - 1} prod_{l != i} x_l^{p_l};
  // finite on the boundary, unlike the diag(1/x) form.
  for (size_t d = 0; d < m.powers.size(); ++d) {
    double g = m.k;
    for (size_t l = 0; l < m.powers.size(); ++l) {
      const auto& [i, p] = m.powers[l];
      int e = (l == d) ? p - 1 : p;
      double b = x[i];
      for (int q = 0; q < e; ++q) g *= b;
      if (l == d) g *= p;
    }
    jac(row, m.powers[d].first) += sign * g;
  }
}

Eigen::VectorXd MassActionSystem::rates_raw(const Eigen::VectorXd& x) const {
  Eigen::VectorXd v(reaction_count());
  for (int j = 0; j < reaction_count(); ++j) {
    v[j] = eval(terms_[j].forward, x);
    if (terms_[j].backward.k != 0.0) v[j] -= eval(terms_[j].backward, x);
  }
  return v;
}

Eigen::MatrixXd MassActionSystem::rate_jacobian_raw(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(reaction_count(), n_);
  for (int j = 0; j < reaction_count(); ++j) {
    add_gradient(terms_[j].forward, x, +1.0, jac, j);
    if (terms_[j].backward.k != 0.0) add_gradient(terms_[j].backward, x, -1.0, jac, j);
  }
  return jac;
}

Eigen::VectorXd rate_vector(const Network& net, const Eigen::VectorXd& x) {
  check_nonnegative(x, net);
  return MassActionSystem(net).rates_raw(x);
}

Eigen::MatrixXd rate_jacobian(const Network& net, const Eigen::VectorXd& x) {
  check_nonnegative(x, net);
  return MassActionSystem(net).rate_jacobian_raw(x);
}

Eigen::VectorXd vector_field(const Network& net, const Eigen::VectorXd& x) {
  check_nonnegative(x, net);
  return MassActionSystem(net).field_raw(x);
}

Eigen::MatrixXd field_jacobian(const Network& net, const Eigen::VectorXd& x) {
  check_nonnegative(x, net);
  return MassActionSystem(net).field_jacobian_raw(x);
}

}  // namespace crnosc
