#include "fusioncurve/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

GaussHermiteRule gauss_hermite(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "Gauss-Hermite rule needs at least one node");
  // Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double b = std::sqrt(static_cast<double>(i + 1));
    jacobi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = b;
    jacobi(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()(static_cast<Eigen::Index>(i));
    const double v = eig.eigenvectors()(0, static_cast<Eigen::Index>(i));
    rule.weights[i] = v * v;
    total += rule.weights[i];
  }
  for (auto& w : rule.weights) w /= total;
  return rule;
}

}  // namespace fusioncurve
