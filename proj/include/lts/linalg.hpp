#pragma once

#include "lts/types.hpp"

#include <utility>

namespace lts {

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
struct SpdFactor {
    Matrix L;

    Index dim() const { return L.rows(); }
    Matrix reconstruct() const { return L * L.transpose(); }
};

/// Cholesky factorization; throws NotPositiveDefiniteError (with the failing
/// pivot index) if S is not positive definite.
SpdFactor factor_spd(const Matrix& S);

/// Solves S x = b from the factor of S.
Vector solve_spd(const SpdFactor& f, const Vector& b);
Matrix solve_spd(const SpdFactor& f, const Matrix& B);

/// Minimum eigenvalue and a matching unit eigenvector of a symmetric matrix.
std::pair<double, Vector> min_eig_sym(const Matrix& S);

/// (Q + sign * a a^T)^{-1} from Q^{-1} via the Sherman-Morrison formula.
/// Throws SingularUpdateError when the update denominator vanishes.
Matrix sherman_morrison_inverse(const Matrix& Q_inv, const Vector& a, int sign);

}  // namespace lts
