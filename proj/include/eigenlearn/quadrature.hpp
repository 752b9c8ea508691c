// Gauss-Jacobi quadrature for the symmetric weight (1 - t^2)^alpha on [-1, 1],
// computed in extended precision so deep spectral tails stay above the noise
// floor.
#pragma once

#include <vector>

namespace eigenlearn {

struct JacobiRule {
    std::vector<long double> nodes;    // ascending in (-1, 1)
    std::vector<long double> weights;  // sum equals mu0
    long double mu0 = 0.0L;            // integral of the weight
};

JacobiRule gauss_jacobi_symmetric(int n, double alpha);

}  // namespace eigenlearn
