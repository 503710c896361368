#include "crnosc/stoich.hpp"

#include <stdexcept>

#include <Eigen/SVD>

namespace crnosc {

namespace {

struct Decomposition {
  Eigen::MatrixXd U;
  int rank;
};

Decomposition full_left_factor(const Eigen::MatrixXi& gamma, double rank_tol) {
  const int n = static_cast<int>(gamma.rows());
  if (n == 0 || gamma.cols() == 0 || gamma.isZero()) {
    return {Eigen::MatrixXd::Identity(n, n), 0};
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gamma.cast<double>(), Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > rank_tol * sv[0]) ++rank;
  return {svd.matrixU(), rank};
}

}  // namespace

ImageBasis rank_and_image(const Eigen::MatrixXi& gamma, double rank_tol) {
  auto [U, rank] = full_left_factor(gamma, rank_tol);
  return {U.leftCols(rank), rank};
}

ConservationLaws conservation_laws(const Eigen::MatrixXi& gamma, double rank_tol) {
  auto [U, rank] = full_left_factor(gamma, rank_tol);
  return {U.rightCols(static_cast<int>(gamma.rows()) - rank).transpose()};
}

double class_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
                      const ImageBasis& basis) {
  if (x.size() != x0.size() || x.size() != basis.B.rows())
    throw std::invalid_argument("class_residual: dimension mismatch");
  Eigen::VectorXd d = x - x0;
  return (d - basis.B * (basis.B.transpose() * d)).norm();
}

}  // namespace crnosc
