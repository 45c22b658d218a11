#include "lts/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual weight of one row of the eliminated value function:
// rho(z) = d (1-z) / (d + z (1-d)), with rho(0) = 1 and rho(1) = 0.
double rho_of_z(double d, double z) {
    return d * (1.0 - z) / (d + z * (1.0 - d));
}

// d rho / d z = -d / (d + z (1-d))^2 (always negative).
double rho_prime(double d, double z) {
    const double den = d + z * (1.0 - d);
    return -d / (den * den);
}

}  // namespace

Vector initial_weights(const SolveInstance& inst) {
    const Index m = inst.rows();
    const double mf = static_cast<double>(inst.flaggable_count);
    Vector d(m);
    for (Index i = 0; i < m; ++i) {
        const Vector a = inst.A.row(i).transpose();
        const double s = mf * a.dot(solve_spd(inst.Q_reg_factor, a));
        d(i) = 1.0 / (1.0 + s);
    }
    return d;
}

Matrix weight_psd_matrix(const SolveInstance& inst, const Vector& u,
                         const std::vector<std::uint8_t>& rows) {
    Matrix M = inst.R;
    for (Index i = 0; i < inst.rows(); ++i) {
        if (rows[static_cast<size_t>(i)]) {
            M.noalias() -= u(i) * (inst.A.row(i).transpose() * inst.A.row(i));
        }
    }
    return 0.5 * (M + M.transpose());
}

WeightVector make_weight_vector(const SolveInstance& inst, Vector d) {
    const Index m = inst.rows();
    if (d.size() != m) throw InvalidWeightsError("weight vector has wrong length");
    WeightVector wv;
    wv.u.resize(m);
    for (Index i = 0; i < m; ++i) {
        if (!(d(i) > 0.0 && d(i) < 1.0)) {
            throw InvalidWeightsError("weights must lie strictly in (0,1)");
        }
        wv.u(i) = 1.0 / (1.0 - d(i));
    }
    const Matrix M = weight_psd_matrix(inst, wv.u, inst.flaggable);
    const double scale = std::max(1.0, inst.R.norm());
    if (min_eig_sym(M).first < -1e-8 * scale) {
        throw InvalidWeightsError("weights violate the PSD contract");
    }
    wv.d = std::move(d);
    return wv;
}

NodeState NodeState::root(const SolveInstance& inst) {
    NodeState node;
    node.fix.resize(static_cast<size_t>(inst.rows()), RowFix::Free);
    for (Index i = 0; i < inst.rows(); ++i) {
        if (!inst.is_flaggable(i)) node.fix[static_cast<size_t>(i)] = RowFix::Zero;
    }
    node.remaining_budget = inst.budget;
    return node;
}

Index NodeState::free_count() const {
    return static_cast<Index>(std::count(fix.begin(), fix.end(), RowFix::Free));
}

double objective_generic(const SolveInstance& inst, const WeightVector& wv,
                         const Vector& x, const Vector& z, const Vector& w) {
    const Index m = inst.rows();
    double val = inst.y.squaredNorm() - 2.0 * inst.y.dot(inst.A * x - w) + x.dot(inst.R * x);
    for (Index i = 0; i < m; ++i) {
        if (!inst.is_flaggable(i)) {
            if (std::abs(w(i)) > 1e-12) return kInf;
            continue;
        }
        const double wi = w(i);
        val += -2.0 * wi * inst.A.row(i).dot(x) + (1.0 - wv.d(i)) * wi * wi;
        if (z(i) <= 0.0) {
            if (std::abs(wi) > 1e-12) return kInf;
        } else {
            val += wv.d(i) * wi * wi / z(i);
        }
    }
    return val;
}

Vector z_step(const Vector& scores, double budget) {
    const Index m = scores.size();
    if (budget < 0.0) throw PreconditionError("z_step: budget must be nonnegative");
    for (Index i = 0; i < m; ++i) {
        if (!(scores(i) >= 0.0)) throw PreconditionError("z_step: scores must be nonnegative");
    }
    Vector z = Vector::Zero(m);
    if (m == 0 || budget <= 0.0) return z;

    std::vector<Index> pos;
    pos.reserve(static_cast<size_t>(m));
    for (Index i = 0; i < m; ++i) {
        if (scores(i) > 0.0) pos.push_back(i);
    }
    if (pos.empty()) {
        z.setConstant(std::min(1.0, budget / static_cast<double>(m)));
        return z;
    }
    if (static_cast<double>(pos.size()) <= budget) {
        for (Index i : pos) z(i) = 1.0;
        return z;
    }

    std::sort(pos.begin(), pos.end(), [&](Index a, Index b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return a < b;
    });
    const size_t np = pos.size();
    std::vector<double> root(np), suffix(np + 1, 0.0);
    for (size_t k = 0; k < np; ++k) root[k] = std::sqrt(scores(pos[k]));
    for (size_t k = np; k-- > 0;) suffix[k] = suffix[k + 1] + root[k];

    // k entries capped at 1, the rest proportional to sqrt(score).
    for (size_t k = 0; static_cast<double>(k) < budget && k < np; ++k) {
        const double rem = budget - static_cast<double>(k);
        const double sq_mu = suffix[k] / rem;  // sqrt(mu)
        const double mu = sq_mu * sq_mu;
        const bool cap_ok = (k == 0) || (scores(pos[k - 1]) >= mu * (1.0 - 1e-12));
        const bool un_ok = scores(pos[k]) <= mu * (1.0 + 1e-12);
        if (cap_ok && un_ok) {
            for (size_t j = 0; j < np; ++j) {
                z(pos[j]) = j < k ? 1.0 : root[j] / sq_mu;
            }
            return z;
        }
    }
    // Numerically degenerate pivot scan; fall back to capping the largest scores.
    const size_t k = static_cast<size_t>(std::min<double>(budget, static_cast<double>(np)));
    for (size_t j = 0; j < k; ++j) z(pos[j]) = 1.0;
    return z;
}

Vector project_budget_box(const Vector& v, double lo, double hi, double budget) {
    Vector z = v.cwiseMax(lo).cwiseMin(hi);
    if (z.sum() <= budget) return z;
    double tlo = 0.0, thi = (v.maxCoeff() - lo);
    for (int it = 0; it < 100; ++it) {
        const double t = 0.5 * (tlo + thi);
        const double s = (v.array() - t).cwiseMax(lo).cwiseMin(hi).sum();
        if (s > budget) {
            tlo = t;
        } else {
            thi = t;
        }
    }
    return (v.array() - thi).cwiseMax(lo).cwiseMin(hi);
}

namespace {

struct NodeRows {
    std::vector<Index> free_rows;
    std::vector<std::uint8_t> discard_fixed;  // rows fixed to z = 1
};

NodeRows classify(const SolveInstance& inst, const NodeState& node) {
    NodeRows rows;
    rows.discard_fixed.resize(static_cast<size_t>(inst.rows()), 0);
    for (Index i = 0; i < inst.rows(); ++i) {
        switch (node.fix[static_cast<size_t>(i)]) {
            case RowFix::Free: rows.free_rows.push_back(i); break;
            case RowFix::One: rows.discard_fixed[static_cast<size_t>(i)] = 1; break;
            case RowFix::Zero: break;
        }
    }
    return rows;
}

// Exact result when the node has no continuous z left to optimize:
// all free rows collapse to a known binary value.
RelaxationResult exact_leaf(const SolveInstance& inst, const NodeState& node,
                            bool free_to_one) {
    const Index m = inst.rows();
    std::vector<std::uint8_t> discard(static_cast<size_t>(m), 0);
    Vector z = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) {
        const RowFix f = node.fix[static_cast<size_t>(i)];
        const bool drop = f == RowFix::One || (f == RowFix::Free && free_to_one);
        if (drop) {
            discard[static_cast<size_t>(i)] = 1;
            z(i) = 1.0;
        }
    }
    const RidgeFit fit = ridge_on_subset(inst, discard);
    RelaxationResult res;
    res.x = fit.x;
    res.z = std::move(z);
    res.w = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) {
        if (discard[static_cast<size_t>(i)]) res.w(i) = inst.A.row(i).dot(res.x) - inst.y(i);
    }
    res.value = fit.objective;
    res.certified_lb = fit.objective - 1e-11 * std::max(1.0, std::abs(fit.objective));
    res.converged = true;
    return res;
}

// One evaluation of the eliminated value function at fixed z (free rows only):
// weighted ridge solve plus gradient bookkeeping.
struct PhiEval {
    Vector zf;      // free-row z
    Vector x;
    Vector r;       // full residual y - A x
    Vector grad;    // d phi / d z on free rows (<= 0)
    Vector scores;  // d_i w_i^2 on free rows
    double value = 0.0;
};

PhiEval eval_phi(const SolveInstance& inst, const WeightVector& wv, const NodeState& node,
                 const std::vector<Index>& free_rows, Vector zf) {
    const Index m = inst.rows();
    const Index p = inst.cols();
    Vector rho = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) {
        switch (node.fix[static_cast<size_t>(i)]) {
            case RowFix::Zero: rho(i) = 1.0; break;
            case RowFix::One: rho(i) = 0.0; break;
            case RowFix::Free: break;
        }
    }
    for (size_t k = 0; k < free_rows.size(); ++k) {
        rho(free_rows[k]) = rho_of_z(wv.d(free_rows[k]), zf(static_cast<Index>(k)));
    }

    Matrix H = inst.lambda * (inst.T_eff.transpose() * inst.T_eff);
    Vector g = Vector::Zero(p);
    for (Index i = 0; i < m; ++i) {
        if (rho(i) > 0.0) {
            H.noalias() += rho(i) * (inst.A.row(i).transpose() * inst.A.row(i));
            g.noalias() += rho(i) * inst.y(i) * inst.A.row(i).transpose();
        }
    }
    PhiEval ev;
    ev.zf = std::move(zf);
    ev.x = solve_spd(factor_spd(Matrix(0.5 * (H + H.transpose()))), g);
    ev.r = inst.y - inst.A * ev.x;
    ev.value = inst.lambda * (inst.T_eff * ev.x).squaredNorm();
    for (Index i = 0; i < m; ++i) ev.value += rho(i) * ev.r(i) * ev.r(i);

    const Index nf = static_cast<Index>(free_rows.size());
    ev.grad.resize(nf);
    ev.scores.resize(nf);
    for (Index k = 0; k < nf; ++k) {
        const Index i = free_rows[static_cast<size_t>(k)];
        const double d = wv.d(i);
        const double z = ev.zf(k);
        const double r2 = ev.r(i) * ev.r(i);
        ev.grad(k) = r2 * rho_prime(d, z);
        const double w = -ev.r(i) * (1.0 - rho(i));
        ev.scores(k) = d * w * w;
    }
    return ev;
}

// Supporting-hyperplane bound: value + min over the node's (unclamped)
// feasible set of grad^T (z - z_bar). All gradients are nonpositive, so the
// linear minimum puts z = 1 on the budget's worth of most negative entries.
double linearized_bound(const PhiEval& ev, int budget) {
    const Index nf = ev.grad.size();
    double bound = ev.value - ev.grad.dot(ev.zf);
    if (budget >= nf) {
        bound += ev.grad.sum();
        return bound;
    }
    std::vector<double> g(ev.grad.data(), ev.grad.data() + nf);
    std::nth_element(g.begin(), g.begin() + budget, g.end());
    for (int k = 0; k < budget; ++k) bound += g[static_cast<size_t>(k)];
    return bound;
}

}  // namespace

RelaxationResult solve_perspective_relaxation(const SolveInstance& inst,
                                              const WeightVector& wv, const NodeState& node,
                                              double tol, int max_iters,
                                              const Vector* z_warm) {
    if (node.remaining_budget < 0) throw PreconditionError("negative remaining budget");
    const NodeRows rows = classify(inst, node);
    const Index nf = static_cast<Index>(rows.free_rows.size());
    const int b = node.remaining_budget;
    if (b == 0 || nf == 0) return exact_leaf(inst, node, false);
    if (b >= nf) return exact_leaf(inst, node, true);

    const double z_floor = inst.tol.z_floor;
    Vector zf(nf);
    if (z_warm != nullptr && z_warm->size() == inst.rows()) {
        for (Index k = 0; k < nf; ++k) zf(k) = (*z_warm)(rows.free_rows[static_cast<size_t>(k)]);
        zf = project_budget_box(zf, z_floor, 1.0, static_cast<double>(b));
    } else {
        zf.setConstant(std::min(1.0, static_cast<double>(b) / static_cast<double>(nf)));
    }

    PhiEval cur = eval_phi(inst, wv, node, rows.free_rows, zf);
    double best_lb = -kInf;
    double pg_step = 1.0;
    int it = 0;
    bool converged = false;

    for (it = 1; it <= max_iters; ++it) {
        best_lb = std::max(best_lb, linearized_bound(cur, b));
        if (cur.value - best_lb <= tol * std::max(1.0, std::abs(cur.value))) {
            converged = true;
            break;
        }

        // Exact minimization of the separable perspective block for fixed w;
        // never increases the value function.
        Vector z_bcd = z_step(cur.scores, static_cast<double>(b)).cwiseMax(z_floor);
        PhiEval cand = eval_phi(inst, wv, node, rows.free_rows, std::move(z_bcd));

        // Projected-gradient step with backtracking, useful when the
        // alternating step crawls along the budget face.
        double t = pg_step;
        for (int ls = 0; ls < 12; ++ls) {
            Vector z_pg = project_budget_box(cur.zf - t * cur.grad, z_floor, 1.0,
                                             static_cast<double>(b));
            const double pred = cur.grad.dot(z_pg - cur.zf);
            if (pred >= -1e-16) break;  // projection did not move
            PhiEval trial = eval_phi(inst, wv, node, rows.free_rows, std::move(z_pg));
            if (trial.value <= cur.value + 1e-4 * pred) {
                if (trial.value < cand.value) cand = std::move(trial);
                pg_step = t * 2.0;
                break;
            }
            t *= 0.5;
        }
        cur = std::move(cand);
    }
    best_lb = std::max(best_lb, linearized_bound(cur, b));
    if (cur.value - best_lb <= tol * std::max(1.0, std::abs(cur.value))) converged = true;

    RelaxationResult res;
    res.x = cur.x;
    res.z = Vector::Zero(inst.rows());
    res.w = Vector::Zero(inst.rows());
    for (Index i = 0; i < inst.rows(); ++i) {
        if (node.fix[static_cast<size_t>(i)] == RowFix::One) {
            res.z(i) = 1.0;
            res.w(i) = -cur.r(i);
        }
    }
    for (Index k = 0; k < nf; ++k) {
        const Index i = rows.free_rows[static_cast<size_t>(k)];
        res.z(i) = cur.zf(k);
        res.w(i) = -cur.r(i) * (1.0 - rho_of_z(wv.d(i), cur.zf(k)));
    }
    res.value = cur.value;
    res.certified_lb = best_lb;
    res.iterations = it;
    res.converged = converged;
    return res;
}

namespace {

// Water-filled big-M budget allocation for fixed residual magnitudes:
// minimizes sum of (|r_i| - M z_i)_+^2 over the free rows.
Vector bigm_allocation(const std::vector<Index>& free_rows, const Vector& r, double big_m,
                       int budget) {
    const size_t nf = free_rows.size();
    Vector z = Vector::Zero(static_cast<Index>(nf));
    if (nf == 0 || budget <= 0) return z;
    auto fill = [&](double nu) {
        double total = 0.0;
        for (size_t k = 0; k < nf; ++k) {
            const double zi =
                std::min(1.0, std::max(0.0, (std::abs(r(free_rows[k])) - nu) / big_m));
            z(static_cast<Index>(k)) = zi;
            total += zi;
        }
        return total;
    };
    if (fill(0.0) <= static_cast<double>(budget)) return z;
    double lo = 0.0, hi = 0.0;
    for (size_t k = 0; k < nf; ++k) hi = std::max(hi, std::abs(r(free_rows[k])));
    for (int it = 0; it < 100; ++it) {
        const double nu = 0.5 * (lo + hi);
        if (fill(nu) > static_cast<double>(budget)) {
            lo = nu;
        } else {
            hi = nu;
        }
    }
    fill(hi);  // feasible side
    return z;
}

struct PsiEval {
    Vector x;
    Vector r;       // y - A x
    Vector z_free;  // allocation on free rows
    Vector grad;
    double value = 0.0;
};

PsiEval eval_psi(const SolveInstance& inst, const NodeState& node,
                 const std::vector<Index>& free_rows, double big_m, Vector x) {
    PsiEval ev;
    ev.x = std::move(x);
    ev.r = inst.y - inst.A * ev.x;
    ev.z_free = bigm_allocation(free_rows, ev.r, big_m, node.remaining_budget);
    ev.value = inst.lambda * (inst.T_eff * ev.x).squaredNorm();
    ev.grad = 2.0 * inst.lambda * (inst.T_eff.transpose() * (inst.T_eff * ev.x));
    size_t kf = 0;
    for (Index i = 0; i < inst.rows(); ++i) {
        double cap = 0.0;
        switch (node.fix[static_cast<size_t>(i)]) {
            case RowFix::Zero: cap = 0.0; break;
            case RowFix::One: cap = big_m; break;
            case RowFix::Free: cap = big_m * ev.z_free(static_cast<Index>(kf++)); break;
        }
        const double h = std::max(0.0, std::abs(ev.r(i)) - cap);
        if (h > 0.0) {
            ev.value += h * h;
            const double sgn = ev.r(i) >= 0.0 ? 1.0 : -1.0;
            ev.grad.noalias() -= 2.0 * h * sgn * inst.A.row(i).transpose();
        }
    }
    return ev;
}

}  // namespace

RelaxationResult solve_bigM_relaxation(const SolveInstance& inst, double big_m,
                                       const NodeState& node, double tol, int max_iters,
                                       const Vector* x_warm) {
    if (!(big_m > 0.0)) throw PreconditionError("big-M constant must be positive");
    const NodeRows rows = classify(inst, node);
    const Index nf = static_cast<Index>(rows.free_rows.size());
    if (node.remaining_budget == 0 || nf == 0) return exact_leaf(inst, node, false);

    // Strong convexity modulus of the value function; the reliable-row Grams
    // inside Q_reg keep it positive even when T_eff is singular.
    const double mu_sc = 2.0 * min_eig_sym(inst.Q_reg).first;

    Vector x0 = (x_warm != nullptr && x_warm->size() == inst.cols()) ? *x_warm
                                                                     : Vector::Zero(inst.cols());
    PsiEval cur = eval_psi(inst, node, rows.free_rows, big_m, std::move(x0));
    double best_lb = -kInf;
    double step = 1.0;
    int it = 0;
    bool converged = false;
    for (it = 1; it <= max_iters; ++it) {
        best_lb = std::max(best_lb, cur.value - cur.grad.squaredNorm() / (2.0 * mu_sc));
        if (cur.value - best_lb <= tol * std::max(1.0, std::abs(cur.value))) {
            converged = true;
            break;
        }
        const double g2 = cur.grad.squaredNorm();
        bool moved = false;
        double t = step;
        for (int ls = 0; ls < 40; ++ls) {
            PsiEval trial = eval_psi(inst, node, rows.free_rows, big_m,
                                     Vector(cur.x - t * cur.grad));
            if (trial.value <= cur.value - 1e-4 * t * g2) {
                cur = std::move(trial);
                step = t * 2.0;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    best_lb = std::max(best_lb, cur.value - cur.grad.squaredNorm() / (2.0 * mu_sc));
    if (cur.value - best_lb <= tol * std::max(1.0, std::abs(cur.value))) converged = true;

    RelaxationResult res;
    res.x = cur.x;
    res.z = Vector::Zero(inst.rows());
    res.w = Vector::Zero(inst.rows());
    size_t kf = 0;
    for (Index i = 0; i < inst.rows(); ++i) {
        switch (node.fix[static_cast<size_t>(i)]) {
            case RowFix::Zero: break;
            case RowFix::One: res.z(i) = 1.0; break;
            case RowFix::Free: res.z(i) = cur.z_free(static_cast<Index>(kf++)); break;
        }
        const double cap = big_m * res.z(i);
        res.w(i) = std::clamp(-cur.r(i), -cap, cap);
    }
    res.value = cur.value;
    res.certified_lb = best_lb;
    res.iterations = it;
    res.converged = converged;
    return res;
}

namespace {

struct Cut {
    Vector g;  // coefficients (a_i^T v)^2 on active rows
    double rhs = 0.0;
    double mu = 0.0;  // dual multiplier
};

constexpr double kUCap = 1e7;

Vector u_from_sigma(const Vector& c, const Vector& sigma, double u_floor) {
    Vector u(c.size());
    for (Index i = 0; i < c.size(); ++i) {
        u(i) = sigma(i) > 0.0 ? std::clamp(std::sqrt(c(i) / sigma(i)), u_floor, kUCap) : kUCap;
    }
    return u;
}

// min sum c_i / u_i subject to the accumulated linear cuts and u in
// [u_floor, cap], by coordinate ascent on the cut multipliers.
Vector solve_cut_master(std::vector<Cut>& cuts, const Vector& c, double u_floor) {
    const Index ma = c.size();
    Vector sigma = Vector::Zero(ma);
    for (const Cut& cut : cuts) sigma.noalias() += cut.mu * cut.g;

    for (int sweep = 0; sweep < 60; ++sweep) {
        double worst = 0.0;
        for (Cut& cut : cuts) {
            const Vector sig_other = sigma - cut.mu * cut.g;
            auto slack = [&](double mu) {
                double s = 0.0;
                for (Index i = 0; i < ma; ++i) {
                    const double sg = sig_other(i) + mu * cut.g(i);
                    const double ui =
                        sg > 0.0 ? std::clamp(std::sqrt(c(i) / sg), u_floor, kUCap) : kUCap;
                    s += cut.g(i) * ui;
                }
                return s - cut.rhs;
            };
            double mu_new = 0.0;
            if (slack(0.0) > 0.0) {
                double hi = std::max(cut.mu, 1.0);
                int grow = 0;
                while (slack(hi) > 0.0 && grow++ < 60) hi *= 4.0;
                if (slack(hi) > 0.0) {
                    mu_new = hi;  // violated even at the floor; restoration handles it
                } else {
                    double lo = 0.0;
                    for (int b = 0; b < 60; ++b) {
                        const double mid = 0.5 * (lo + hi);
                        (slack(mid) > 0.0 ? lo : hi) = mid;
                    }
                    mu_new = hi;
                }
            }
            sigma.noalias() += (mu_new - cut.mu) * cut.g;
            cut.mu = mu_new;
        }
        const Vector u = u_from_sigma(c, sigma, u_floor);
        for (const Cut& cut : cuts) {
            worst = std::max(worst, (cut.g.dot(u) - cut.rhs) / std::max(1.0, std::abs(cut.rhs)));
        }
        if (worst <= 1e-10) break;
    }
    return u_from_sigma(c, sigma, u_floor);
}

}  // namespace

WeightVector solve_weight_sdp(const SolveInstance& inst, const Vector& z_bar,
                              const Vector& w_bar, const std::vector<RowFix>& fix,
                              double u_floor, double tol_psd, bool* stall_warning) {
    const Index m = inst.rows();
    std::vector<std::uint8_t> active(static_cast<size_t>(m), 0);
    std::vector<Index> act_rows;
    for (Index i = 0; i < m; ++i) {
        if (inst.is_flaggable(i) && fix[static_cast<size_t>(i)] != RowFix::Zero) {
            active[static_cast<size_t>(i)] = 1;
            act_rows.push_back(i);
        }
    }
    for (Index i : act_rows) {
        if (inst.A.row(i).squaredNorm() <= 0.0) {
            throw PreconditionError("weight tuning requires no zero rows in the design");
        }
    }
    const Index ma = static_cast<Index>(act_rows.size());
    Vector c(ma);
    for (Index k = 0; k < ma; ++k) {
        const Index i = act_rows[static_cast<size_t>(k)];
        const double z = std::clamp(z_bar(i), inst.tol.z_floor, 1.0);
        c(k) = std::max(inst.tol.eps_c, w_bar(i) * w_bar(i) * (1.0 / z - 1.0));
    }

    const double scale = std::max(1.0, inst.R.norm());
    auto psd_matrix = [&](const Vector& u_act) {
        Matrix M = inst.R;
        for (Index k = 0; k < ma; ++k) {
            const Index i = act_rows[static_cast<size_t>(k)];
            M.noalias() -= u_act(k) * (inst.A.row(i).transpose() * inst.A.row(i));
        }
        return Matrix(0.5 * (M + M.transpose()));
    };

    std::vector<Cut> cuts;
    Vector u = Vector::Constant(ma, kUCap);
    bool stalled = true;
    for (int round = 0; round < 120; ++round) {
        const auto [lam, v] = min_eig_sym(psd_matrix(u));
        if (lam >= -tol_psd * scale) {
            stalled = false;
            break;
        }
        Cut cut;
        cut.g.resize(ma);
        for (Index k = 0; k < ma; ++k) {
            const double av = inst.A.row(act_rows[static_cast<size_t>(k)]).dot(v);
            cut.g(k) = av * av;
        }
        cut.rhs = v.dot(inst.R * v);
        cuts.push_back(std::move(cut));
        u = solve_cut_master(cuts, c, u_floor);
    }
    if (stall_warning != nullptr) *stall_warning = stalled;

    // Contract toward u = 1 (where the matrix equals Q_reg, strictly PD)
    // until the PSD constraint holds.
    const Vector ones = Vector::Ones(ma);
    auto feasible = [&](double theta) {
        return min_eig_sym(psd_matrix(ones + theta * (u - ones))).first >= -tol_psd * scale;
    };
    double theta = 1.0;
    if (!feasible(1.0)) {
        double lo = 0.0, hi = 1.0;
        for (int b = 0; b < 60; ++b) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
        theta = lo;
    }
    const Vector u_act = ones + theta * (u - ones);

    Vector d = initial_weights(inst);  // placeholder values on inactive rows
    for (Index k = 0; k < ma; ++k) {
        d(act_rows[static_cast<size_t>(k)]) = 1.0 - 1.0 / u_act(k);
    }
    WeightVector wv;
    wv.d = std::move(d);
    wv.u.resize(m);
    for (Index i = 0; i < m; ++i) wv.u(i) = 1.0 / (1.0 - wv.d(i));
    return wv;
}

TuneResult tune_conic_plus(const SolveInstance& inst,
                           const std::function<bool()>& out_of_time) {
    const Tolerances& tol = inst.tol;
    const NodeState root = NodeState::root(inst);
    TuneResult res;

    WeightVector wv = make_weight_vector(inst, initial_weights(inst));
    res.weights = wv;
    double best_lb = -kInf;
    double best_ub = kInf;
    double prev_gap = kInf;
    int stall = 0;
    Vector z_warm;

    for (int k = 1; k <= tol.alg1_max_iters; ++k) {
        res.iterations = k;
        const RelaxationResult relax = solve_perspective_relaxation(
            inst, wv, root, 0.01 * tol.relax_tol, tol.relax_max_iters,
            z_warm.size() > 0 ? &z_warm : nullptr);
        res.last_z = relax.z;
        z_warm = relax.z;

        const Solution rounded = round_heuristic(inst, relax, root);
        if (relax.certified_lb > best_lb) {
            best_lb = relax.certified_lb;
            res.weights = wv;
        }
        if (rounded.objective < best_ub) {
            best_ub = rounded.objective;
            res.best_solution = rounded;
        }
        res.lb_trace.push_back(best_lb);
        res.ub_trace.push_back(best_ub);

        const double gap = (best_ub - best_lb) / std::max(best_ub, 1e-12);
        if (k > 1 && prev_gap - gap < tol.alg1_stall_eps) {
            if (++stall >= tol.alg1_stall_limit) {
                res.stalled = true;
                break;
            }
        }
        prev_gap = gap;
        if (out_of_time && out_of_time()) break;
        if (k == tol.alg1_max_iters) break;

        bool warn = false;
        const WeightVector d_star = solve_weight_sdp(inst, relax.z, relax.w, root.fix,
                                                     tol.u_floor, tol.psd_tol, &warn);
        res.sdp_warning = res.sdp_warning || warn;
        const Vector d_new = wv.d + (1.0 / static_cast<double>(k)) * (d_star.d - wv.d);
        wv = make_weight_vector(inst, d_new);
    }
    res.best_lb = best_lb;
    return res;
}

Solution round_heuristic(const SolveInstance& inst, const RelaxationResult& relax,
                         const NodeState& node) {
    const Index m = inst.rows();
    std::vector<Index> free_rows;
    std::vector<std::uint8_t> discard(static_cast<size_t>(m), 0);
    for (Index i = 0; i < m; ++i) {
        switch (node.fix[static_cast<size_t>(i)]) {
            case RowFix::Free: free_rows.push_back(i); break;
            case RowFix::One: discard[static_cast<size_t>(i)] = 1; break;
            case RowFix::Zero: break;
        }
    }
    std::sort(free_rows.begin(), free_rows.end(), [&](Index a, Index b) {
        if (relax.z(a) != relax.z(b)) return relax.z(a) > relax.z(b);
        return a < b;
    });
    const size_t take = std::min(free_rows.size(), static_cast<size_t>(node.remaining_budget));
    for (size_t k = 0; k < take; ++k) discard[static_cast<size_t>(free_rows[k])] = 1;

    const RidgeFit fit = ridge_on_subset(inst, discard);
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

}  // namespace lts
