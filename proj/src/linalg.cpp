#include "lts/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace lts {

namespace {

void check_symmetric(const Matrix& S, const char* where) {
    if (S.rows() != S.cols()) {
        throw PreconditionError(std::string(where) + ": matrix is not square");
    }
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw PreconditionError(std::string(where) + ": matrix is not symmetric");
    }
}

// Locates the first leading principal minor that is not positive definite.
Index failing_pivot(const Matrix& S) {
    for (Index k = 1; k <= S.rows(); ++k) {
        Eigen::LLT<Matrix> llt(S.topLeftCorner(k, k));
        if (llt.info() != Eigen::Success) return k - 1;
    }
    return S.rows() - 1;
}

}  // namespace

SpdFactor factor_spd(const Matrix& S) {
    check_symmetric(S, "factor_spd");
    Eigen::LLT<Matrix> llt(S.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefiniteError("factor_spd: matrix is not positive definite",
                                       failing_pivot(S));
    }
    SpdFactor f{llt.matrixL()};
    for (Index i = 0; i < f.L.rows(); ++i) {
        if (!(f.L(i, i) > 0.0) || !std::isfinite(f.L(i, i))) {
            throw NotPositiveDefiniteError("factor_spd: non-positive pivot", i);
        }
    }
    return f;
}

Vector solve_spd(const SpdFactor& f, const Vector& b) {
    if (b.size() != f.dim()) throw PreconditionError("solve_spd: dimension mismatch");
    Vector x = f.L.triangularView<Eigen::Lower>().solve(b);
    f.L.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

Matrix solve_spd(const SpdFactor& f, const Matrix& B) {
    if (B.rows() != f.dim()) throw PreconditionError("solve_spd: dimension mismatch");
    Matrix X = f.L.triangularView<Eigen::Lower>().solve(B);
    f.L.transpose().triangularView<Eigen::Upper>().solveInPlace(X);
    return X;
}

std::pair<double, Vector> min_eig_sym(const Matrix& S) {
    check_symmetric(S, "min_eig_sym");
    Eigen::SelfAdjointEigenSolver<Matrix> es(S.selfadjointView<Eigen::Lower>());
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("min_eig_sym: eigensolver failed to converge");
    }
    return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

Matrix sherman_morrison_inverse(const Matrix& Q_inv, const Vector& a, int sign) {
    if (Q_inv.rows() != Q_inv.cols() || Q_inv.rows() != a.size()) {
        throw PreconditionError("sherman_morrison_inverse: dimension mismatch");
    }
    if (sign != 1 && sign != -1) {
        throw PreconditionError("sherman_morrison_inverse: sign must be +1 or -1");
    }
    const Vector Qa = Q_inv * a;
    const double denom = 1.0 + sign * a.dot(Qa);
    if (denom <= 1e-12) {
        throw SingularUpdateError("sherman_morrison_inverse: singular rank-one update");
    }
    return Q_inv - (sign / denom) * (Qa * Qa.transpose());
}

}  // namespace lts
