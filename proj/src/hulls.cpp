#include "lts/hulls.hpp"

#include <cmath>
#include <limits>

namespace lts {

double envelope_homogeneous(const Matrix& Q, const Vector& a, const Vector& x, double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw PreconditionError("envelope_homogeneous: z must be in [0,1]");
    const SpdFactor f = factor_spd(Q);
    const double s = a.dot(solve_spd(f, a));
    const double ax = a.dot(x);
    return x.dot(Q * x) + (1.0 - z) * ax * ax / (1.0 + z * s);
}

double hull_term_value(const HullTerm& term, const Vector& x, double w, double z) {
    const double ax = term.a.dot(x);
    const double base = term.c * term.c + 2.0 * term.c * (w - ax) +
                        (term.L_inv * (x - term.shift * w)).squaredNorm();
    if (z <= 0.0) {
        if (std::abs(w) > 1e-12) return std::numeric_limits<double>::infinity();
        return base;
    }
    return base + term.weight * w * w / z;
}

HullTerm build_hull_term(const Matrix& Q_share, const Vector& a, double c) {
    HullTerm term;
    term.a = a;
    term.c = c;
    const SpdFactor f = factor_spd(Q_share);
    const Vector Qinv_a = solve_spd(f, a);
    term.s = a.dot(Qinv_a);
    term.weight = 1.0 / (1.0 + term.s);
    term.shift = Qinv_a * term.weight;
    // chol(Q + a a^T) = C with C C^T = Q + a a^T; the inverse factor is C^T.
    term.L_inv = factor_spd(Q_share + a * a.transpose()).L.transpose();
    return term;
}

double delta_max(const Matrix& Q, const Vector& a) {
    const SpdFactor f = factor_spd(Q);
    return 1.0 / (1.0 + a.dot(solve_spd(f, a)));
}

Regularizer reliable_regularizer(double lambda, const Matrix& T,
                                 const StandardizedInstance& inst) {
    if (!(lambda > 0.0)) throw PreconditionError("reliable_regularizer: lambda must be positive");
    const Index n = inst.cols();
    if (T.rows() != n || T.cols() != n) {
        throw PreconditionError("reliable_regularizer: T dimension mismatch");
    }
    Regularizer reg;
    reg.Q_reg = lambda * (T.transpose() * T);
    for (Index i = 0; i < inst.rows(); ++i) {
        if (inst.is_reliable(i)) {
            reg.Q_reg.noalias() += inst.A.row(i).transpose() * inst.A.row(i);
        }
    }
    reg.Q_reg = 0.5 * (reg.Q_reg + reg.Q_reg.transpose());
    reg.factor = factor_spd(reg.Q_reg);
    return reg;
}

HullWitness trivial_hull_witness(const Vector& a, double c, const Vector& x, double z,
                                 double t) {
    if (a.squaredNorm() <= 0.0) {
        throw PreconditionError("trivial_hull_witness: unsupported direction a = 0");
    }
    if (!(z > 0.0 && z < 1.0)) throw PreconditionError("trivial_hull_witness: z must be in (0,1)");
    if (!(t >= 0.0)) throw PreconditionError("trivial_hull_witness: t must be nonnegative");

    const Vector anchor = (c / a.squaredNorm()) * a;  // minimizes (c - a^T x)^2
    HullWitness wit;
    wit.x1 = x / z - ((1.0 - z) / z) * anchor;
    wit.z1 = 1.0;
    wit.t1 = 0.0;
    wit.x2 = anchor;
    wit.z2 = 0.0;
    wit.t2 = t / (1.0 - z);
    wit.theta = z;
    return wit;
}

}  // namespace lts
