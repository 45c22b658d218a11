#include "lts/instance.hpp"

#include <cmath>

namespace lts {

double SolveInstance::objective(const Vector& x, const Vector& z) const {
    const Vector r = y - A * x;
    double obj = lambda * (T_eff * x).squaredNorm();
    for (Index i = 0; i < rows(); ++i) {
        obj += (1.0 - z(i)) * r(i) * r(i);
    }
    return obj;
}

Solution SolveInstance::to_solution(const Vector& x_eff, const Vector& z, const Vector& w,
                                    double obj) const {
    Solution sol;
    sol.z = z;
    sol.w = w;
    sol.objective = obj;
    if (has_intercept_col) {
        sol.x = x_eff.tail(x_eff.size() - 1);
        sol.intercept = x_eff(0) + intercept_baseline;
    } else {
        sol.x = x_eff;
        sol.intercept = 0.0;
    }
    return sol;
}

namespace {

Matrix effective_T(const Matrix& T, Index n, InterceptMode mode) {
    Matrix base = T.size() == 0 ? Matrix::Identity(n, n) : T;
    if (base.rows() != n || base.cols() != n) {
        throw PreconditionError("make_solve_instance: T dimension mismatch");
    }
    if (mode == InterceptMode::Zero) return base;
    Matrix ext = Matrix::Zero(n + 1, n + 1);
    ext.bottomRightCorner(n, n) = base;
    if (mode == InterceptMode::Proxy) ext(0, 0) = 1.0;
    return ext;
}

}  // namespace

SolveInstance make_solve_instance(const StandardizedInstance& std_inst,
                                  const ProblemSpec& spec) {
    const Index m = std_inst.rows();
    const Index n = std_inst.cols();
    const Index reliable = std_inst.reliable_count();
    if (spec.budget < 0 || spec.budget > m - 1) {
        throw PreconditionError("budget must lie in [0, m-1]");
    }
    if (spec.budget + reliable > m) {
        throw PreconditionError("budget plus reliable rows exceeds row count");
    }
    const bool needs_lambda = spec.method == Method::Conic || spec.method == Method::ConicPlus;
    if (needs_lambda && !(spec.lambda > 0.0)) {
        throw PreconditionError("conic methods require lambda > 0");
    }
    if (spec.intercept_mode == InterceptMode::Reliable && reliable == 0) {
        throw PreconditionError("reliable intercept mode needs at least one reliable row");
    }

    SolveInstance inst;
    inst.lambda = spec.lambda;
    inst.budget = spec.budget;
    inst.tol = spec.tol;
    inst.has_intercept_col = spec.intercept_mode != InterceptMode::Zero;
    inst.T_eff = effective_T(spec.T, n, spec.intercept_mode);

    if (inst.has_intercept_col) {
        inst.A.resize(m, n + 1);
        inst.A.col(0).setOnes();
        inst.A.rightCols(n) = std_inst.A;
    } else {
        inst.A = std_inst.A;
    }
    inst.y = std_inst.y;

    if (spec.intercept_mode == InterceptMode::Proxy) {
        // Baseline intercept from the plain ridge fit; folding it into the
        // response centers the penalty at zero.
        const Matrix base_T = effective_T(spec.T, n, InterceptMode::Zero);
        Matrix H = std_inst.A.transpose() * std_inst.A +
                   spec.lambda * (base_T.transpose() * base_T);
        H = 0.5 * (H + H.transpose());
        const Vector x0 = solve_spd(factor_spd(H), Vector(std_inst.A.transpose() * std_inst.y));
        inst.intercept_baseline = (std_inst.y - std_inst.A * x0).mean();
        inst.y.array() -= inst.intercept_baseline;
    }

    inst.flaggable.resize(static_cast<size_t>(m), 1);
    for (Index i = 0; i < m; ++i) {
        if (std_inst.is_reliable(i)) inst.flaggable[static_cast<size_t>(i)] = 0;
    }
    inst.flaggable_count = m - reliable;

    Matrix q = spec.lambda * (inst.T_eff.transpose() * inst.T_eff);
    for (Index i = 0; i < m; ++i) {
        if (!inst.is_flaggable(i)) {
            q.noalias() += inst.A.row(i).transpose() * inst.A.row(i);
        }
    }
    inst.Q_reg = 0.5 * (q + q.transpose());
    inst.Q_reg_factor = factor_spd(inst.Q_reg);

    Matrix r = inst.A.transpose() * inst.A +
               spec.lambda * (inst.T_eff.transpose() * inst.T_eff);
    inst.R = 0.5 * (r + r.transpose());
    return inst;
}

RidgeFit ridge_on_subset(const SolveInstance& inst, const std::vector<std::uint8_t>& discard) {
    const Index m = inst.rows();
    const Index p = inst.cols();
    Matrix H = inst.lambda * (inst.T_eff.transpose() * inst.T_eff);
    Vector g = Vector::Zero(p);
    for (Index i = 0; i < m; ++i) {
        if (discard[static_cast<size_t>(i)]) continue;
        H.noalias() += inst.A.row(i).transpose() * inst.A.row(i);
        g.noalias() += inst.A.row(i).transpose() * inst.y(i);
    }
    const SpdFactor f = factor_spd(Matrix(0.5 * (H + H.transpose())));
    RidgeFit fit;
    fit.x = solve_spd(f, g);
    fit.objective = inst.lambda * (inst.T_eff * fit.x).squaredNorm();
    for (Index i = 0; i < m; ++i) {
        if (discard[static_cast<size_t>(i)]) continue;
        const double r = inst.y(i) - inst.A.row(i).dot(fit.x);
        fit.objective += r * r;
    }
    return fit;
}

}  // namespace lts
