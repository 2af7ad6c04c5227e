#pragma once

#include <vector>

#include "screener/feature_matrix.hpp"

namespace screener {

struct SymmetricEigen {
  std::vector<double> values;  // descending
  DenseMatrix vectors;         // column j is the unit eigenvector for values[j]
};

// Full eigendecomposition of a real symmetric matrix by Householder
// tridiagonalisation followed by the implicit QL algorithm. Only the lower
// triangle of `a` is read. Throws InvalidArgument for non-square input and
// Error if QL fails to converge.
SymmetricEigen symmetric_eigen(const DenseMatrix& a);

}  // namespace screener
