#pragma once

#include "lts/instance.hpp"
#include "lts/types.hpp"

namespace lts {

/// Ridge fit on all rows; z = 0, w = 0. Requires a nonsingular normal matrix.
Solution ls_l2(const SolveInstance& inst);

/// Least absolute deviations by smoothed iteratively reweighted least squares.
/// The reported objective is the trimmed-squares functional at z = 0, for
/// comparability across methods; the l1 loss drives the iteration.
/// Sets *warning when the iteration cap is reached before convergence.
Solution lad(const SolveInstance& inst, double tol = 1e-6, int max_iters = 10000,
             bool* warning = nullptr);

/// Alternating heuristic: flag the budget largest residuals, refit the ridge
/// on the rest, repeat until the flagged set repeats. Reliable rows are never
/// flagged. The objective is nonincreasing across iterations.
Solution alt_opt(const SolveInstance& inst, int max_iters = 500);

}  // namespace lts
