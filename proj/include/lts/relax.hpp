#pragma once

#include "lts/instance.hpp"
#include "lts/types.hpp"

#include <functional>
#include <vector>

namespace lts {

/// Per-row perspective weights d in (0,1) and their counterparts u = 1/(1-d).
/// Validity contract: the quadratic block [[A^T A + lambda T^T T, -A_f^T],
/// [-A_f, I - Diag(d_f)]] over the flaggable rows is PSD (checked through its
/// Schur complement A^T A + lambda T^T T - A_f^T Diag(u_f) A_f).
struct WeightVector {
    Vector d;
    Vector u;
};

/// Throws InvalidWeightsError when d is outside (0,1) or the PSD contract fails.
WeightVector make_weight_vector(const SolveInstance& inst, Vector d);

/// Closed-form per-row weights of the plain conic reformulation:
/// d_i = 1 / (1 + m_f a_i^T Q_reg^{-1} a_i); PSD-feasible by construction.
Vector initial_weights(const SolveInstance& inst);

/// Schur-complement matrix A^T A + lambda T^T T - A_f^T Diag(u) A_f whose
/// nonnegativity certifies the weight vector (rows restricted to `rows`).
Matrix weight_psd_matrix(const SolveInstance& inst, const Vector& u,
                         const std::vector<std::uint8_t>& rows);

/// Branching state: every row is free, fixed to outlier (z=1) or fixed to
/// retained (z=0); reliable rows are always fixed to retained.
enum class RowFix : std::int8_t { Free = 0, One = 1, Zero = 2 };

struct NodeState {
    std::vector<RowFix> fix;
    int remaining_budget = 0;

    static NodeState root(const SolveInstance& inst);
    Index free_count() const;
};

struct RelaxationResult {
    Vector x;  // effective coordinates
    Vector z;  // full m-vector honoring the node fixings
    Vector w;
    double value = 0.0;
    double certified_lb = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Relaxation objective ||y||^2 - 2 y^T (A x - w) + [x;w]^T Sigma [x;w]
/// + sum_i d_i w_i^2 / z_i, with the perspective closed at z_i = 0
/// (+inf unless w_i = 0).
double objective_generic(const SolveInstance& inst, const WeightVector& wv,
                         const Vector& x, const Vector& z, const Vector& w);

/// Exact minimizer of sum_i scores_i / z_i over sum z <= budget, 0 < z <= 1,
/// by water-filling: z_i = min(1, sqrt(scores_i / mu)). Zero scores receive
/// z = 0 (the closure limit); all-zero scores yield a uniform spread.
Vector z_step(const Vector& scores, double budget);

/// Euclidean projection onto {l <= z <= u, sum z <= budget}.
Vector project_budget_box(const Vector& v, double lo, double hi, double budget);

/// Minimizes the perspective relaxation at a node for fixed weights, by
/// eliminating (x, w) in closed form and descending on the convex value
/// function of z. certified_lb is a valid bound independent of convergence,
/// from the supporting hyperplane of the value function over the node's
/// feasible set.
RelaxationResult solve_perspective_relaxation(const SolveInstance& inst,
                                              const WeightVector& wv, const NodeState& node,
                                              double tol, int max_iters,
                                              const Vector* z_warm = nullptr);

/// Big-M node relaxation: eliminates (w, z) for fixed x into a convex value
/// function minimized by gradient descent; certifies through strong convexity.
RelaxationResult solve_bigM_relaxation(const SolveInstance& inst, double big_m,
                                       const NodeState& node, double tol, int max_iters,
                                       const Vector* x_warm = nullptr);

/// Weight-tuning problem: min sum c_i / u_i subject to
/// A^T A + lambda T^T T - A_f^T Diag(u) A_f PSD and u >= u_floor, with
/// c_i = w_i^2 (1/z_i - 1). Solved by eigenvector cutting planes with a
/// feasibility-restoring contraction toward u = 1.
WeightVector solve_weight_sdp(const SolveInstance& inst, const Vector& z_bar,
                              const Vector& w_bar, const std::vector<RowFix>& fix,
                              double u_floor, double tol_psd, bool* stall_warning = nullptr);

struct TuneResult {
    WeightVector weights;          // iterate with the best certified root bound
    std::vector<double> lb_trace;  // best-so-far lower bounds, nondecreasing
    std::vector<double> ub_trace;  // best-so-far upper bounds, nonincreasing
    int iterations = 0;
    bool stalled = false;  // stopped by the stall rule rather than a cap
    bool sdp_warning = false;
    double best_lb = 0.0;
    Solution best_solution;  // incumbent produced by the rounding heuristic
    Vector last_z;           // relaxation point of the final iteration
};

/// Primal-dual loop alternating the root relaxation with the weight-tuning
/// problem, averaging iterates; stops after `alg1_stall_limit` iterations
/// (not necessarily consecutive) with gap improvement below `alg1_stall_eps`.
TuneResult tune_conic_plus(const SolveInstance& inst,
                           const std::function<bool()>& out_of_time = {});

/// Rounds a relaxation point: flags the remaining_budget largest free z
/// (ties to the lower index), then refits the ridge on the retained rows.
/// Always returns a feasible solution, hence a valid upper bound.
Solution round_heuristic(const SolveInstance& inst, const RelaxationResult& relax,
                         const NodeState& node);

}  // namespace lts
