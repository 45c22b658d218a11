#include "lts/heuristics.hpp"

#include <algorithm>
#include <cmath>

namespace lts {

namespace {

Solution solution_from_discard(const SolveInstance& inst,
                               const std::vector<std::uint8_t>& discard) {
    const RidgeFit fit = ridge_on_subset(inst, discard);
    const Index m = inst.rows();
    Vector z = Vector::Zero(m);
    Vector w = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) {
        if (discard[static_cast<size_t>(i)]) {
            z(i) = 1.0;
            w(i) = inst.A.row(i).dot(fit.x) - inst.y(i);
        }
    }
    return inst.to_solution(fit.x, z, w, fit.objective);
}

}  // namespace

Solution ls_l2(const SolveInstance& inst) {
    std::vector<std::uint8_t> keep_all(static_cast<size_t>(inst.rows()), 0);
    try {
        return solution_from_discard(inst, keep_all);
    } catch (const NotPositiveDefiniteError&) {
        throw DataError("ls_l2: singular normal matrix");
    }
}

Solution lad(const SolveInstance& inst, double tol, int max_iters, bool* warning) {
    const Index m = inst.rows();
    const Index p = inst.cols();
    if (m <= p) throw PreconditionError("lad: needs more rows than coefficients");
    constexpr double kSmooth = 1e-8;

    Vector x = Vector::Zero(p);
    double obj = inst.y.cwiseAbs().sum();
    bool converged = false;
    for (int it = 0; it < max_iters; ++it) {
        const Vector r = inst.y - inst.A * x;
        Matrix H = Matrix::Zero(p, p);
        Vector g = Vector::Zero(p);
        for (Index i = 0; i < m; ++i) {
            const double wgt = 1.0 / std::max(kSmooth, std::abs(r(i)));
            H.noalias() += wgt * (inst.A.row(i).transpose() * inst.A.row(i));
            g.noalias() += wgt * inst.y(i) * inst.A.row(i).transpose();
        }
        Vector x_new;
        try {
            x_new = solve_spd(factor_spd(Matrix(0.5 * (H + H.transpose()))), g);
        } catch (const NotPositiveDefiniteError&) {
            H += 1e-10 * std::max(1.0, H.trace()) * Matrix::Identity(p, p);
            x_new = solve_spd(factor_spd(Matrix(0.5 * (H + H.transpose()))), g);
        }
        // Damped acceptance keeps the l1 objective monotone.
        double alpha = 1.0;
        double obj_new = (inst.y - inst.A * x_new).cwiseAbs().sum();
        for (int h = 0; h < 30 && obj_new > obj; ++h) {
            alpha *= 0.5;
            obj_new = (inst.y - inst.A * (x + alpha * (x_new - x))).cwiseAbs().sum();
        }
        x += alpha * (x_new - x);
        if (std::abs(obj - obj_new) <= tol * std::max(1.0, obj_new)) {
            obj = obj_new;
            converged = true;
            break;
        }
        obj = obj_new;
    }
    if (warning != nullptr) *warning = !converged;

    const Vector z = Vector::Zero(m);
    return inst.to_solution(x, z, Vector::Zero(m), inst.objective(x, z));
}

Solution alt_opt(const SolveInstance& inst, int max_iters) {
    const Index m = inst.rows();
    const size_t b = static_cast<size_t>(inst.budget);

    std::vector<Index> flaggable;
    for (Index i = 0; i < m; ++i) {
        if (inst.is_flaggable(i)) flaggable.push_back(i);
    }

    std::vector<std::uint8_t> discard(static_cast<size_t>(m), 0);
    Vector x = ridge_on_subset(inst, discard).x;
    std::vector<std::uint8_t> prev(static_cast<size_t>(m), 2);  // never equals a real set

    for (int it = 0; it < std::max(1, max_iters); ++it) {
        const Vector r = inst.y - inst.A * x;
        std::vector<Index> ranked = flaggable;
        std::sort(ranked.begin(), ranked.end(), [&](Index i, Index j) {
            const double ri = std::abs(r(i)), rj = std::abs(r(j));
            if (ri != rj) return ri > rj;
            return i < j;
        });
        std::fill(discard.begin(), discard.end(), 0);
        for (size_t k = 0; k < b && k < ranked.size(); ++k) {
            discard[static_cast<size_t>(ranked[k])] = 1;
        }
        if (discard == prev) break;
        prev = discard;
        x = ridge_on_subset(inst, discard).x;
    }
    return solution_from_discard(inst, prev);
}

}  // namespace lts
