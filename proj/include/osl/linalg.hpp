#pragma once

#include <vector>

namespace osl {

// Dense row-major helpers sized for the small systems handled here.

// (A + A^T) / 2
std::vector<double> symmetric_part(const std::vector<double>& A, int n);

// A^T * A
std::vector<double> gram(const std::vector<double>& A, int n);

// All eigenvalues of a symmetric matrix, ascending.  Closed-form
// (characteristic polynomial) for n <= 3, cyclic Jacobi for larger n.
std::vector<double> sym_eigenvalues(std::vector<double> S, int n);

double max_sym_eigenvalue(const std::vector<double>& S, int n);

// Spectral norm of A via power iteration on A^T A.
double spectral_norm(const std::vector<double>& A, int n);

}  // namespace osl
