#pragma once

#include <cstddef>
#include <vector>

namespace fusioncurve {

/// Gauss-Hermite rule for the standard normal measure: sum_i w_i g(z_i)
/// approximates E[g(Z)], Z ~ N(0,1). Weights sum to one.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Golub-Welsch construction; exact for polynomials of degree <= 2n-1.
GaussHermiteRule gauss_hermite(std::size_t n);

}  // namespace fusioncurve
