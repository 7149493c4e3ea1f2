#pragma once

#include <vector>

#include "specmap/matrix.hpp"

namespace specmap::linalg {

// Full symmetric eigendecomposition. Eigenvalues ascending; vectors(i, j) is
// component i of the eigenvector paired with values[j].
struct SymEig {
    std::vector<double> values;
    Matrix vectors;
};

SymEig sym_eig(const Matrix& a);

// Solve a symmetric positive (semi)definite system a w = b via LDLT.
std::vector<double> solve_sym(const Matrix& a, const std::vector<double>& b);

} // namespace specmap::linalg
