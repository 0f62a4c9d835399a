#pragma once

#include <vector>

#include "drmea/matrix.hpp"

namespace drmea {

// Eigendecomposition of a symmetric matrix. values sorted descending;
// column i of vectors is the unit eigenvector for values[i]. Each
// eigenvector is sign-normalized so its largest-magnitude entry is
// non-negative (first such entry on ties), which makes the output
// deterministic for identical input bits.
struct SymEig {
    std::vector<double> values;
    Matrix vectors;
};

// Sample covariance, columns of x are samples: C = (1/(n-1)) Xc Xc^T.
// Requires at least 2 columns.
Matrix covariance(const Matrix& x);

// Full eigendecomposition via Householder tridiagonalization + implicit QL.
// Input is symmetrized as (A + A^T)/2; asymmetry beyond 1e-9 max-norm is an error.
SymEig sym_eig(const Matrix& a);

// Column j becomes x_j / max(||x_j||_2, eps).
Matrix normalize_columns_value(const Matrix& x, double eps);

}  // namespace drmea
