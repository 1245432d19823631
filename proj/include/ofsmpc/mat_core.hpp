#pragma once

// Dense linear algebra shared by the whole library. Matrices are plain
// Eigen dynamic matrices; the functions here add the checks and the few
// algorithms (Jacobi eigensolver, Riccati iteration) the controller needs.

#include <Eigen/Dense>

namespace ofsmpc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

constexpr double kSymmetryTol = 1e-12;

/// Throws PreconditionError if any entry is NaN or infinite.
void require_finite(const Mat& m, const char* what);

/// |M - M^T|_max <= rel_tol * (1 + |M|_max)
bool is_symmetric(const Mat& m, double rel_tol = kSymmetryTol);

/// Checks finiteness and symmetry, then returns the exactly symmetrized copy.
Mat make_symmetric(const Mat& m, const char* what = "matrix");

struct SymEigResult {
  Vec values;   // descending
  Mat vectors;  // orthonormal columns, same order as values
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps stop once
/// the off-diagonal Frobenius norm drops below rel_tol * ||M||_F.
SymEigResult sym_eig(const Mat& m, double rel_tol = 1e-14);

double min_eigenvalue(const Mat& sym);
double max_eigenvalue(const Mat& sym);

/// Loewner order test: lambda_min(rhs - lhs) >= -tol.
bool psd_leq(const Mat& lhs, const Mat& rhs, double tol);

struct DareOptions {
  double tol = 1e-12;
  int max_iter = 100000;
};

/// Control-form Riccati map
///   f(P) = A^T P A - A^T P G (G^T P G + Rc)^{-1} G^T P A + Qc.
Mat riccati_map(const Mat& p, const Mat& a, const Mat& g, const Mat& qc,
                const Mat& rc);

/// Fixed point of riccati_map by value iteration from P0 = Qc. Call with
/// (A^T, C^T, Q, R) for the steady-state filter covariance.
///
/// Converges when |P - f(P)|_max <= tol; throws DivergenceError with the
/// last residual otherwise.
Mat dare(const Mat& a, const Mat& g, const Mat& qc, const Mat& rc,
         const DareOptions& opts = {});

/// Solves M X = rhs for symmetric positive definite M.
Mat chol_solve(const Mat& m, const Mat& rhs);

/// num * S^{-1} for symmetric PSD S. If S is singular the product is only
/// defined when num vanishes (a zero prior covariance gives a zero gain);
/// that case returns zero, anything else throws FactorizationError.
Mat psd_right_divide(const Mat& num, const Mat& s);

/// Lower-triangular F with F F^T = M for symmetric PSD M. Pivots below
/// zero_tol * (1 + |M|_max) are treated as zero; a clearly negative pivot
/// throws FactorizationError.
Mat psd_factor(const Mat& m, double zero_tol = 1e-12);

double spectral_radius(const Mat& m);

bool is_controllable(const Mat& a, const Mat& b);
bool is_observable(const Mat& a, const Mat& c);

}  // namespace ofsmpc
