#pragma once

#include "lts/hulls.hpp"
#include "lts/linalg.hpp"
#include "lts/types.hpp"

#include <vector>

namespace lts {

/// Fully materialized problem over which relaxations and heuristics run.
/// Intercept handling is baked in up front: proxy mode appends a penalized
/// all-ones column (response shifted by the baseline), reliable mode appends
/// an unpenalized one whose curvature comes from reliable-row Grams.
struct SolveInstance {
    Matrix A;      // m x p effective design (p = n, or n+1 with intercept column first)
    Vector y;      // m effective response
    Matrix T_eff;  // p x p effective regularization operator
    Matrix Q_reg;  // lambda T_eff^T T_eff + sum of reliable-row Grams; PD
    SpdFactor Q_reg_factor;
    Matrix R;      // A^T A + lambda T_eff^T T_eff
    double lambda = 0.0;
    int budget = 0;
    std::vector<std::uint8_t> flaggable;  // per row; reliable rows are 0
    Index flaggable_count = 0;

    bool has_intercept_col = false;
    double intercept_baseline = 0.0;  // proxy-mode shift folded out of the response
    Tolerances tol;

    Index rows() const { return A.rows(); }
    Index cols() const { return A.cols(); }
    bool is_flaggable(Index i) const { return flaggable[static_cast<size_t>(i)] != 0; }

    /// Trimmed objective sum_i (1-z_i)(y_i - a_i^T x)^2 + lambda ||T_eff x||^2.
    double objective(const Vector& x, const Vector& z) const;

    /// Splits the effective coefficient vector into (model coefficients,
    /// intercept in standardized response units).
    Solution to_solution(const Vector& x_eff, const Vector& z, const Vector& w,
                         double objective) const;
};

SolveInstance make_solve_instance(const StandardizedInstance& std_inst,
                                  const ProblemSpec& spec);

/// Ridge fit over the retained rows (discard[i] != 0 means row i is dropped).
struct RidgeFit {
    Vector x;          // effective coordinates (intercept column included)
    double objective;  // trimmed objective of the induced binary z
};
RidgeFit ridge_on_subset(const SolveInstance& inst, const std::vector<std::uint8_t>& discard);

}  // namespace lts
