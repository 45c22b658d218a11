#pragma once

#include "lts/linalg.hpp"
#include "lts/types.hpp"

namespace lts {

/// Per-datapoint convexification artifacts for one quadratic error term
/// (c + w - a^T x)^2 + x^T Q x. L_inv satisfies L_inv^T L_inv = Q + a a^T;
/// shift = Q^{-1} a / (1+s) and weight = 1/(1+s) with s = a^T Q^{-1} a.
/// L_inv is stored explicitly because a term is evaluated millions of times
/// inside branch and bound while n stays small.
struct HullTerm {
    Matrix L_inv;
    Vector shift;
    Vector a;
    double weight = 1.0;
    double s = 0.0;
    double c = 0.0;
};

/// Regularization matrix, optionally strengthened by the Gram contribution of
/// reliable rows, together with its Cholesky factor.
struct Regularizer {
    Matrix Q_reg;
    SpdFactor factor;
};

/// Two points of the single-row epigraph whose convex combination reproduces a
/// given fractional point; exists to witness that any convex relaxation of
/// that set alone is trivial.
struct HullWitness {
    Vector x1;
    double z1 = 1.0, t1 = 0.0;
    Vector x2;
    double z2 = 0.0, t2 = 0.0;
    double theta = 0.0;  // mixing weight on (x1, z1, t1)
};

/// Closed convex envelope of t >= x^T Q x + (a^T x)^2 (1 - z) over z in [0,1]:
/// x^T Q x + (1-z)(a^T x)^2 / (1 + z a^T Q^{-1} a).
double envelope_homogeneous(const Matrix& Q, const Vector& a, const Vector& x, double z);

/// Extended-space hull value
///   c^2 + 2c(w - a^T x) + ||L^{-1}(x - shift w)||^2 + weight w^2 / z.
/// At z = 0 the perspective term closes: returns +inf unless |w| <= 1e-12.
double hull_term_value(const HullTerm& term, const Vector& x, double w, double z);

HullTerm build_hull_term(const Matrix& Q_share, const Vector& a, double c);

/// Largest delta with Q1 - delta e_{n+1} e_{n+1}^T still PSD, where Q1 is the
/// bordered matrix [[Q + a a^T, -a], [-a^T, 1]]; equals 1/(1 + a^T Q^{-1} a).
double delta_max(const Matrix& Q, const Vector& a);

Regularizer reliable_regularizer(double lambda, const Matrix& T,
                                 const StandardizedInstance& inst);

/// Explicit decomposition of a fractional point (x, z, t), 0 < z < 1, t >= 0,
/// into two feasible points of the single-row epigraph. Requires a != 0.
HullWitness trivial_hull_witness(const Vector& a, double c, const Vector& x, double z,
                                 double t);

}  // namespace lts
