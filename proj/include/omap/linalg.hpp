#pragma once
// Dense complex linear algebra: LAPACK-backed eigenvalues/SVD and a
// deterministic power iteration for operator norms.

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace omap::la {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// All eigenvalues of a square complex matrix (LAPACK zgeev, values only).
std::vector<std::complex<double>> eigenvalues(const CMatrix& a);

/// Largest singular value. Deterministic power iteration on A*A with a fixed
/// starting vector; falls back to a second start if convergence stalls.
double operator_norm(const CMatrix& a, double tol = 1e-12, int max_iter = 2000);

/// Largest singular value of the product A_k ... A_1 applied as a chain
/// (never forms the product matrix).
double chain_operator_norm(const std::vector<const CMatrix*>& chain, double tol = 1e-12,
                           int max_iter = 2000);

/// Largest singular value of matrix power A^k via the chain norm.
double power_norm(const CMatrix& a, int k, double tol = 1e-12);

/// Full singular values via LAPACK zgesdd (small matrices, exact route).
std::vector<double> singular_values(const CMatrix& a);

double spectral_radius(const CMatrix& a);

}  // namespace omap::la
