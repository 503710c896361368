#ifndef CRNOSC_STOICH_HPP
#define CRNOSC_STOICH_HPP

#include <Eigen/Core>

namespace crnosc {

/// Orthonormal basis of image(Gamma), the stoichiometric subspace.
struct ImageBasis {
  Eigen::MatrixXd B;  // n x r, orthonormal columns
  int rank = 0;
};

/// Rows span the left nullspace of Gamma; L * Gamma = 0, rows orthonormal.
struct ConservationLaws {
  Eigen::MatrixXd L;  // (n - r) x n
};

/// Rank decided by SVD: singular values below rank_tol * sigma_max count as
/// zero. Gamma is small (tens of rows), so the SVD cost is negligible.
ImageBasis rank_and_image(const Eigen::MatrixXi& gamma, double rank_tol = 1e-10);

ConservationLaws conservation_laws(const Eigen::MatrixXi& gamma, double rank_tol = 1e-10);

/// Distance of x - x0 from image(Gamma): zero iff x and x0 share a
/// stoichiometry-class coset.
double class_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
                      const ImageBasis& basis);

}  // namespace crnosc

#endif
