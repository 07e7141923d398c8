#pragma once

#include <vector>

#include "twiqrnn/complex_matrix.hpp"

namespace twiqrnn {

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // column k is the eigenvector of values[k]
};

// Cyclic Jacobi diagonalization of a Hermitian matrix. Throws
// std::invalid_argument when the input fails the Hermiticity tolerance.
HermitianEigen hermitian_eigen(const ComplexMatrix& h,
                               double herm_tol = 1e-8);

// exp(-i h t) for Hermitian h, via eigendecomposition.
ComplexMatrix hermitian_expm(const ComplexMatrix& h, double t);

}  // namespace twiqrnn
